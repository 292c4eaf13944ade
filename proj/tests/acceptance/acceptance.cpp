// Acceptance harness: one PASS/FAIL line per criterion, tolerances pinned
// below. Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "gradcheck_suite.hpp"
#include "hih/guidance.hpp"
#include "hih/hgd.hpp"
#include "hih/losses.hpp"
#include "hih/model.hpp"
#include "hih/ops.hpp"
#include "hih/retrieval.hpp"
#include "hih/warp.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace hih;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kIdentityTol = 1e-12;
constexpr double kIdentitySeconds = 1.0;
constexpr double kOpGradTol = 1e-5;
constexpr double kModelGradTol = 1e-4;
constexpr std::size_t kGradSeeds = 5;
constexpr double kGradSeconds = 120.0;
constexpr int kOracleTrials = 100;
constexpr double kLinearOpTol = 1e-12;
constexpr double kLossMetricTol = 1e-10;
constexpr double kWorkedTol = 1e-12;
constexpr double kLossRatio = 0.5;
constexpr double kRank1Floor = 0.90;
constexpr std::size_t kLossWindow = 20;
constexpr double kTrainSeconds = 900.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

int run(std::vector<std::string> args, std::string* captured = nullptr) {
  args.insert(args.begin(), "hih");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (captured) *captured = out.str() + err.str();
  if (code != 0) std::cerr << "  hih " << args[1] << " exited " << code << ": " << err.str();
  return code;
}

fs::path write_config(const fs::path& dir, const json& j) {
  fs::create_directories(dir);
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_bytes(e.path());
  return out;
}

oracle::Conv to_oracle(const ConvSpec& s) {
  oracle::Conv c;
  c.in = s.in_channels;
  c.out = s.out_channels;
  c.k = {s.kernel.t, s.kernel.h, s.kernel.w};
  c.s = {s.stride.t, s.stride.h, s.stride.w};
  c.p = {s.padding.t, s.padding.h, s.padding.w};
  c.w = oracle::values(s.weights);
  if (s.bias.defined()) c.b = oracle::values(s.bias);
  return c;
}

oracle::Stage to_oracle(const HgdStage& st) {
  oracle::Stage o;
  for (const auto& s : st.scales()) {
    o.strips.push_back(s.strips);
    o.spatial.push_back(to_oracle(s.spatial));
    o.temporal.push_back(to_oracle(s.temporal));
  }
  o.refine_spatial = to_oracle(st.refine_spatial());
  o.refine_temporal = to_oracle(st.refine_temporal());
  o.has_skip = st.skip().has_value();
  if (o.has_skip) o.skip = to_oracle(*st.skip());
  o.downsample = st.config().spatial_downsample;
  return o;
}

void fill(Tensor t, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  for (double& v : t.mutable_data()) v = d(rng);
}

Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return oracle::tensor(shape, oracle::uniform(shape_numel(shape), rng, lo, hi));
}

// 1. Identity suite.
Outcome identity_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(11);
  double worst = 0.0;
  Tensor x = random_tensor({8, 30, 16, 11}, rng);
  const oracle::Vec xv = oracle::values(x);
  worst = std::max(worst, oracle::max_abs_diff(oracle::values(bilinear_warp(x, Tensor::zeros({2, 30, 16, 11}))), xv));
  worst = std::max(worst, oracle::max_abs_diff(oracle::values(trilinear_warp(x, Tensor::zeros({3, 30, 16, 11}))), xv));
  Tensor pose = random_tensor({1, 30, 16, 11}, rng, 0.0, 1.0);
  worst = std::max(worst, oracle::max_abs_diff(oracle::values(dse_apply(x, pose, DseConfig::make())), xv));
  const Tensor dta = dta_apply(x, pose, DtaConfig::make(1, 3));
  const Tensor pooled = max_pool3d(x, {3, 1, 1}, {3, 1, 1});
  if (dta.shape() != pooled.shape()) return {false, "DTA output shape differs from the stride-3 max-pool"};
  worst = std::max(worst, oracle::max_abs_diff(oracle::values(dta), oracle::values(pooled)));
  const double secs = seconds_since(t0);
  return {worst <= kIdentityTol && secs < kIdentitySeconds,
          "max deviation " + fmt(worst) + " (tol " + fmt(kIdentityTol) + "), " + fmt(secs) + " s"};
}

// 2. Gradient suite.
Outcome gradient_suite() {
  const auto t0 = Clock::now();
  const auto rows = cli::run_gradient_suite(kGradSeeds, kOpGradTol, kModelGradTol);
  const double secs = seconds_since(t0);
  double op_worst = 0.0, model_worst = 0.0;
  std::string failed;
  for (const auto& r : rows) {
    double& worst = r.tolerance == kModelGradTol ? model_worst : op_worst;
    worst = std::max(worst, r.max_rel_error);
    if (!r.passed) failed += " " + r.name;
  }
  std::string detail = std::to_string(rows.size()) + " cases x " + std::to_string(kGradSeeds) + " seeds, ops " +
                       fmt(op_worst) + ", end-to-end " + fmt(model_worst) + ", " + fmt(secs) + " s";
  if (!failed.empty()) detail += ", failed:" + failed;
  return {failed.empty() && secs < kGradSeconds, detail};
}

// 3. Oracle equivalence.
struct Tally {
  std::string name;
  int instances = 0;
  double worst = 0.0;
  double tol = 0.0;
  void add(double err) {
    ++instances;
    worst = std::max(worst, err);
  }
  bool ok() const { return instances >= kOracleTrials && worst <= tol; }
};

Outcome oracle_equivalence() {
  std::mt19937_64 rng(33);
  std::uniform_int_distribution<std::size_t> pick(1, 3);
  Tally conv{"conv3d", 0, 0, kLinearOpTol}, pool{"pooling", 0, 0, kLinearOpTol},
      lin{"linear", 0, 0, kLinearOpTol}, hgd{"hgd_stage", 0, 0, kLinearOpTol},
      tri{"triplet", 0, 0, kLossMetricTol}, ce{"cross_entropy", 0, 0, kLossMetricTol},
      met{"metrics", 0, 0, kLossMetricTol};

  for (int trial = 0; trial < kOracleTrials; ++trial) {
    const Extent3 k{pick(rng), pick(rng), pick(rng)};
    const Extent3 s{pick(rng), pick(rng), pick(rng)};
    const Extent3 p{pick(rng) - 1, pick(rng) - 1, pick(rng) - 1};
    const oracle::Dims4 d{pick(rng), k.t + pick(rng), k.h + pick(rng) + 2, k.w + pick(rng) + 1};
    ConvSpec spec = ConvSpec::make(d[0], pick(rng), k, p, trial % 2 == 0, s);
    fill(spec.weights, rng, -1, 1);
    if (spec.bias.defined()) fill(spec.bias, rng, -1, 1);
    const oracle::Vec x = oracle::uniform(d[0] * d[1] * d[2] * d[3], rng);
    oracle::Dims4 od{};
    const oracle::Vec ref = oracle::conv3d(x, d, to_oracle(spec), &od);
    const Tensor y = conv3d(oracle::tensor({d[0], d[1], d[2], d[3]}, x), spec);
    conv.add(y.shape() == Shape{od[0], od[1], od[2], od[3]} ? oracle::max_abs_diff(oracle::values(y), ref) : INFINITY);
  }

  for (int trial = 0; trial < kOracleTrials; ++trial) {
    const oracle::Dims4 k{1, pick(rng), pick(rng), pick(rng)};
    const oracle::Dims4 s{1, pick(rng), pick(rng), pick(rng)};
    const oracle::Dims4 d{pick(rng), k[1] + pick(rng), k[2] + pick(rng), k[3] + pick(rng)};
    const oracle::Vec x = oracle::uniform(d[0] * d[1] * d[2] * d[3], rng);
    const Tensor xt = oracle::tensor({d[0], d[1], d[2], d[3]}, x);
    const PoolWindow w{{k[0], k[1], k[2], k[3]}, {s[0], s[1], s[2], s[3]}};
    pool.add(std::max(oracle::max_abs_diff(oracle::values(max_pool(xt, w)), oracle::max_pool(x, d, k, s)),
                      oracle::max_abs_diff(oracle::values(avg_pool(xt, w)), oracle::avg_pool(x, d, k, s))));
  }

  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int trial = 0; trial < kOracleTrials; ++trial) {
    const std::size_t rows = dim(rng), din = dim(rng), dout = dim(rng);
    const oracle::Vec xv = oracle::uniform(rows * din, rng);
    const oracle::Vec wv = oracle::uniform(dout * din, rng);
    const oracle::Vec bv = oracle::uniform(dout, rng);
    const Tensor out =
        linear(oracle::tensor({rows, din}, xv), oracle::tensor({dout, din}, wv), oracle::tensor({dout}, bv));
    lin.add(oracle::max_abs_diff(oracle::values(out), oracle::linear(xv, rows, din, wv, dout, bv)));
  }

  {
    NoGradGuard guard;
    std::uniform_real_distribution<double> bias(0.05, 0.3);
    for (int trial = 0; trial < kOracleTrials; ++trial) {
      const bool grow = trial % 2 == 0;
      HgdStage st(HgdStageConfig::standard(2, 2, grow ? 3 : 2, trial % 3 == 0));
      st.init(rng);
      ParameterList params;
      st.append_parameters(params, "s");
      for (auto& prm : params)
        if (prm.name.ends_with(".bias"))
          for (double& b : prm.tensor.mutable_data()) b = bias(rng);
      const oracle::Dims4 d{2, 3, 8, 6};
      const oracle::Vec x = oracle::uniform(2 * 3 * 8 * 6, rng);
      oracle::Dims4 od{};
      const oracle::Vec ref = oracle::hgd_stage(x, d, to_oracle(st), &od);
      const Tensor y = st.forward(oracle::tensor({2, 3, 8, 6}, x));
      hgd.add(y.shape() == Shape{od[0], od[1], od[2], od[3]} ? oracle::max_abs_diff(oracle::values(y), ref)
                                                            : INFINITY);
    }
  }

  std::uniform_int_distribution<std::size_t> pk(2, 3), ud(1, 3);
  for (int trial = 0; trial < kOracleTrials; ++trial) {
    const std::size_t p = pk(rng), k = pk(rng), u = std::min<std::size_t>(ud(rng), 2), d = ud(rng);
    const double margin = trial % 5 == 0 ? 0.0 : 0.2 + 0.1 * (trial % 3);
    const oracle::Vec e = oracle::uniform(p * k * u * d, rng);
    const TripletResult r = triplet_loss(oracle::tensor({p, k, u, d}, e), margin);
    const oracle::TripletOut ref = oracle::triplet(e, p, k, u, d, margin);
    tri.add(r.n_tri == ref.n_tri ? std::abs(r.loss.item() - ref.loss) : INFINITY);
  }

  for (int trial = 0; trial < kOracleTrials; ++trial) {
    const std::size_t b = 1 + trial % 4, u = 1 + trial % 3, n = 2 + trial % 5;
    const oracle::Vec z = oracle::uniform(b * u * n, rng, -8, 8);
    std::vector<std::size_t> y(b);
    for (auto& l : y) l = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    ce.add(std::abs(cross_entropy(oracle::tensor({b, u, n}, z), y).item() - oracle::cross_entropy(z, b, u, n, y)));
  }

  for (int trial = 0; trial < kOracleTrials; ++trial) {
    const std::size_t stripes = 1 + trial % 3;
    ProbeGallerySplit split;
    split.stripes = stripes;
    split.exclusion = trial % 2 ? Exclusion::identical_view : Exclusion::none;
    std::size_t n = 0;
    const std::size_t subjects = 2 + trial % 4, seqs = 2 + trial % 3;
    for (std::size_t sj = 0; sj < subjects; ++sj)
      for (std::size_t q = 0; q < seqs; ++q)
        for (const char* view : {"000", "090"}) {
          const std::string subject = "s" + std::to_string(sj), seq = "nm-0" + std::to_string(q);
          RetrievalEntry e{subject + "/" + seq + "-" + view, subject, seq, view, "nm",
                           oracle::uniform(2 * stripes, rng)};
          (n++ % 3 == 0 ? split.probes : split.gallery).push_back(std::move(e));
        }
    if (split.probes.size() + split.gallery.size() > 20) split.gallery.resize(20 - split.probes.size());
    auto conv_entries = [](const std::vector<RetrievalEntry>& v) {
      std::vector<oracle::Entry> out;
      for (const auto& e : v) out.push_back({e.sequence_id, e.subject, e.view, e.embedding});
      return out;
    };
    const MetricSummary got = evaluate(split).overall;
    const oracle::Metrics ref = oracle::retrieval(conv_entries(split.probes), conv_entries(split.gallery), stripes,
                                                  split.exclusion == Exclusion::identical_view);
    const bool counts = got.evaluated == ref.evaluated && got.dropped == ref.dropped;
    met.add(counts ? std::max({std::abs(got.rank1 - ref.rank1), std::abs(got.rank5 - ref.rank5),
                               std::abs(got.rank10 - ref.rank10), std::abs(got.rank20 - ref.rank20),
                               std::abs(got.map - ref.map), std::abs(got.minp - ref.minp)})
                   : INFINITY);
  }

  const TripletResult worked = triplet_loss(Tensor::from_data({2, 2, 1, 1}, {0, 1, 0.5, 1.5}));
  const double worked_err = std::abs(worked.loss.item() - 0.7);
  const std::vector<std::size_t> labels{2, 0};
  const double uniform_err = std::abs(cross_entropy(Tensor::zeros({2, 3, 4}), labels).item() - std::log(4.0));

  bool ok = worked.n_tri == 6 && worked_err <= kWorkedTol && uniform_err <= kWorkedTol;
  std::string detail;
  for (const Tally* t : {&conv, &pool, &lin, &hgd, &tri, &ce, &met}) {
    ok = ok && t->ok();
    detail += t->name + " " + std::to_string(t->instances) + "/" + fmt(t->worst) + ", ";
  }
  detail += "triplet example n_tri " + std::to_string(worked.n_tri) + " err " + fmt(worked_err) +
            ", CE uniform err " + fmt(uniform_err);
  return {ok, detail};
}

// 4. Shape contract.
Outcome shape_contract() {
  NoGradGuard guard;
  HihModel m(ModelConfig::outdoor(4));
  m.init(5);
  std::mt19937_64 rng(44);
  const Tensor sil = random_tensor({1, 30, 64, 44}, rng, 0.0, 1.0);
  const Tensor pose = random_tensor({1, 30, 64, 44}, rng, 0.0, 1.0);
  std::vector<Tensor> stages;
  m.backbone(sil, pose, &stages);
  const std::vector<Shape> expect{{64, 30, 64, 44}, {128, 30, 32, 22}, {256, 10, 16, 11}, {256, 10, 16, 11}};
  bool ok = stages.size() == expect.size();
  std::string trace;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (ok) ok = stages[i].shape() == expect[i];
    std::string s = "(";
    for (std::size_t j = 0; j < stages[i].shape().size(); ++j) s += (j ? "," : "") + std::to_string(stages[i].shape()[j]);
    trace += (i ? " -> " : "") + s + ")";
  }
  const std::vector<Tensor> sils{sil}, poses{pose};
  const ModelOutput y = m.forward(sils, poses, false);
  const bool emb_ok = y.embedding.shape() == Shape{1, 16, 256};
  return {ok && emb_ok, trace + ", embedding " + std::to_string(y.embedding.shape()[1]) + "x" +
                            std::to_string(y.embedding.shape()[2])};
}

// 5. Training sanity.
Outcome training_sanity(const fs::path& work) {
  const auto t0 = Clock::now();
  const fs::path dir = work / "training";
  fs::remove_all(dir);
  const json cfg = {
      {"seed", 7},
      {"output_dir", "out"},
      {"dataset", {{"root", "data"}}},
      {"synth", {{"subjects", 8}, {"frames", 30}}},
      {"model", {{"channels", {4, 4, 8, 8}}, {"embedding_dim", 16}}},
      {"train",
       {{"iterations", 800}, {"p", 4}, {"k", 2}, {"min_frames", 12}, {"max_frames", 12}, {"lr", 0.1},
        {"sequences", {"nm-01", "nm-02"}}, {"eval_every", 200}, {"grad_clip", 1.0}}},
      {"eval", {{"protocol", "gait3d-style"}, {"sequences", {"nm-03", "nm-04"}}}}};
  const std::string path = write_config(dir, cfg).string();
  if (run({"synth", "--config", path}) != 0) return {false, "synth failed"};
  if (run({"train", "--config", path}) != 0) return {false, "train failed"};
  if (run({"eval", "--config", path}) != 0) return {false, "eval failed"};

  std::vector<double> losses;
  std::ifstream log(dir / "out/train.log");
  for (std::string line; std::getline(log, line);)
    if (!line.empty()) losses.push_back(json::parse(line).at("l_joint").get<double>());
  if (losses.size() < kLossWindow) return {false, "train.log has " + std::to_string(losses.size()) + " lines"};
  // Mean of the last window: single-batch losses swing with the P x K draw.
  const double tail =
      std::accumulate(losses.end() - static_cast<long>(kLossWindow), losses.end(), 0.0) / kLossWindow;
  const json report = json::parse(read_bytes(dir / "out/eval_gait3d-style/report.json"));
  const double rank1 = report.at("rank1").get<double>();
  const double secs = seconds_since(t0);
  const bool ok = tail < kLossRatio * losses.front() && rank1 >= kRank1Floor && losses.size() <= 2000;
  return {ok, "l_joint iter 1 " + fmt(losses.front()) + ", last-" + std::to_string(kLossWindow) + " mean " + fmt(tail) +
                  " (ratio " + fmt(tail / losses.front()) + "), rank-1 " + fmt(rank1) + ", " + fmt(secs) +
                  " s (budget " + fmt(kTrainSeconds) + " s on 4 cores, informational)"};
}

json tiny_config() {
  return {{"seed", 3},
          {"output_dir", "out"},
          {"dataset", {{"root", "data"}}},
          {"synth", {{"subjects", 4}, {"frames", 10}, {"sequences", {"nm-01", "nm-02", "nm-03", "nm-04"}}}},
          {"model", {{"channels", {2, 2, 4, 4}}, {"embedding_dim", 4}, {"hp_bins", 4}}},
          {"train",
           {{"iterations", 4}, {"p", 2}, {"k", 2}, {"min_frames", 6}, {"max_frames", 6},
            {"sequences", {"nm-01", "nm-02"}}, {"log_wall_time", false}, {"grad_clip", 1.0}}},
          {"eval", {{"sequences", {"nm-03", "nm-04"}}}},
          {"gradcheck", {{"seeds", 1}}},
          {"dump_maps", {{"frames", {0, 3}}}},
          {"ablate", {{"iterations", 2}}}};
}

// 6. Ablation harness.
Outcome ablation_harness(const fs::path& work) {
  const fs::path dir = work / "ablation";
  fs::remove_all(dir);
  const std::string path = write_config(dir, tiny_config()).string();
  if (run({"synth", "--config", path}) != 0) return {false, "synth failed"};
  if (run({"ablate", "--config", path}) != 0) return {false, "ablate failed"};
  const json rep = json::parse(read_bytes(dir / "out/ablation/ablation.json"));
  const std::vector<std::string> keys{"row",  "variant", "depth",      "width",         "dse",
                                      "dta",  "rank1",   "rank5",      "mAP",           "mINP",
                                      "iterations", "final_l_joint", "parameter_count"};
  bool schema = rep.contains("rows") && rep["rows"].is_array();
  std::set<std::pair<bool, bool>> combos;
  std::size_t rows = 0;
  if (schema) {
    for (const auto& row : rep["rows"]) {
      ++rows;
      for (const auto& k : keys) schema = schema && row.contains(k);
      if (!schema) break;
      if (row["width"].get<bool>()) combos.insert({row["dse"].get<bool>(), row["dta"].get<bool>()});
      schema = schema && fs::exists(dir / "out/ablation" / row["row"].get<std::string>() / "checkpoint.hihc");
    }
  }
  const std::string table = read_bytes(dir / "out/ablation/ablation.txt");
  const bool header = table.find("Width") != std::string::npos && table.find("DSE") != std::string::npos &&
                      table.find("DTA") != std::string::npos && table.find("Rank-1") != std::string::npos;
  const bool ok = schema && header && combos.size() == 4;
  return {ok, std::to_string(rows) + " rows, " + std::to_string(combos.size()) + "/4 width-on guidance combinations, " +
                  (schema ? "schema ok" : "schema mismatch") + ", " + (header ? "table ok" : "table header missing")};
}

// 7. Determinism.
Outcome determinism(const fs::path& work) {
  const fs::path dir = work / "determinism";
  fs::remove_all(dir);
  const std::string path = write_config(dir, tiny_config()).string();
  auto all = [&](bool force) {
    std::vector<std::string> synth{"synth", "--config", path};
    if (force) synth.push_back("--force");
    const std::vector<std::vector<std::string>> commands{synth,
                                                         {"train", "--config", path},
                                                         {"eval", "--config", path},
                                                         {"gradcheck", "--config", path},
                                                         {"dump-maps", "--config", path}};
    for (const auto& args : commands)
      if (run(args) != 0) return false;
    return true;
  };
  if (!all(false)) return {false, "first run failed"};
  const auto first = snapshot(dir);
  if (!all(true)) return {false, "second run failed"};
  const auto second = snapshot(dir);
  std::size_t differing = 0;
  std::string example;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) {
      ++differing;
      if (example.empty()) example = name;
    }
  }
  const bool ok = differing == 0 && first.size() == second.size();
  std::string detail = std::to_string(first.size()) + " files compared, " + std::to_string(differing) + " differ";
  if (!example.empty()) detail += " (e.g. " + example + ")";
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  fs::path workdir = fs::temp_directory_path() / "hih_acceptance";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Scratch directory for training runs");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"identity suite", identity_suite},
      {"gradient suite", gradient_suite},
      {"oracle equivalence", oracle_equivalence},
      {"shape contract", shape_contract},
      {"training sanity", [&] { return training_sanity(workdir); }},
      {"ablation harness", [&] { return ablation_harness(workdir); }},
      {"determinism", [&] { return determinism(workdir); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << "): " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
