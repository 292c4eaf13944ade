#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "gradcheck_suite.hpp"
#include "hih/checkpoint.hpp"
#include "hih/dataset.hpp"
#include "hih/errors.hpp"
#include "hih/walker.hpp"
#include "json.hpp"
#include "training.hpp"

namespace hih::cli {

namespace fs = std::filesystem;

namespace {

void set_identity_field(WalkerIdentity& id, const std::string& key, double v) {
  if (key == "torso") id.torso = v;
  else if (key == "upper_arm") id.upper_arm = v;
  else if (key == "lower_arm") id.lower_arm = v;
  else if (key == "upper_leg") id.upper_leg = v;
  else if (key == "lower_leg") id.lower_leg = v;
  else if (key == "thickness") id.thickness = v;
  else if (key == "frequency") id.frequency = v;
  else if (key == "amplitude") id.amplitude = v;
  else if (key == "height_scale") id.height_scale = v;
  else throw ConfigError("synth.identity: unknown field '" + key + "'");
}

double parse_view(const std::string& tag) {
  std::size_t used = 0;
  double deg = 0.0;
  try {
    deg = std::stod(tag, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used != tag.size()) throw ConfigError("synth.views: '" + tag + "' is not a yaw angle in degrees");
  return deg;
}

std::string covariate_of(const std::string& sequence) {
  const std::string cov = sequence.substr(0, sequence.find('-'));
  if (!is_known_covariate(cov)) {
    throw ConfigError("synth.sequences: '" + sequence + "' does not start with a covariate (nm, bg, fs, sl)");
  }
  return cov;
}

std::string subject_name(std::size_t i) {
  std::ostringstream os;
  os << 's' << std::setw(3) << std::setfill('0') << i;
  return os.str();
}

fs::path checkpoint_path(const RunConfig& config, const CommandOptions& options) {
  return options.checkpoint.empty() ? config.output_dir / "checkpoint.hihc" : options.checkpoint;
}

struct AblationRow {
  const char* label;
  bool width;
  bool dse;
  bool dta;
  ModelMode mode;
};

constexpr AblationRow kAblationRows[] = {
    {"depth", false, false, false, ModelMode::silhouette_only},
    {"depth+width", true, false, false, ModelMode::silhouette_only},
    {"depth+width+dse", true, true, false, ModelMode::multi_modal},
    {"depth+width+dta", true, false, true, ModelMode::multi_modal},
    {"depth+width+dse+dta", true, true, true, ModelMode::multi_modal},
};

}  // namespace

int cmd_synth(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const fs::path root = config.dataset_root;
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!options.force) throw ConfigError(root.string() + " exists and is not empty (use --force)");
    fs::remove_all(root);
  }
  const auto& s = config.synth;
  std::vector<double> yaws;
  for (const auto& v : s.views) yaws.push_back(parse_view(v));
  std::vector<std::string> covariates;
  for (const auto& q : s.sequences) covariates.push_back(covariate_of(q));

  std::mt19937_64 rng(config.seed);
  std::vector<WalkerIdentity> identities;
  for (std::size_t i = 0; i < s.subjects; ++i) {
    WalkerIdentity id = WalkerIdentity::random(rng);
    for (const auto& [key, v] : s.identity) set_identity_field(id, key, v);
    try {
      id.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("subject " + subject_name(i) + ": " + e.what());
    }
    identities.push_back(id);
  }

  fs::create_directories(root);
  echo_config(config, root);
  std::size_t sequences = 0, frames = 0;
  for (std::size_t i = 0; i < s.subjects; ++i) {
    for (std::size_t q = 0; q < s.sequences.size(); ++q) {
      for (std::size_t v = 0; v < s.views.size(); ++v) {
        std::seed_seq seq_seed{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                               static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(q),
                               static_cast<std::uint32_t>(v)};
        std::mt19937_64 seq_rng(seq_seed);
        WalkerIdentity id = identities[i];
        std::uniform_real_distribution<double> jitter(-s.sequence_jitter, s.sequence_jitter);
        id.frequency *= 1.0 + jitter(seq_rng);
        id.amplitude = std::min(1.0, id.amplitude * (1.0 + jitter(seq_rng)));
        const SequenceData data = generate_sequence(id, yaws[v], covariates[q], s.frames, seq_rng);
        const std::string dir = s.views.size() == 1 ? s.sequences[q] : s.sequences[q] + "_" + s.views[v];
        write_sequence(root / subject_name(i) / dir, {subject_name(i), s.sequences[q], s.views[v], covariates[q]},
                       data);
        ++sequences;
        frames += data.frames;
      }
    }
  }
  out << "synth: " << s.subjects << " subjects, " << sequences << " sequences, " << frames << " frames -> "
      << root.string() << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& config, const CommandOptions&, std::ostream& out) {
  const TrainOutcome t = run_training(config, config.output_dir);
  out << "train: " << config.variant_label() << ", " << t.parameter_count << " parameters, "
      << t.history.size() << " iterations\n";
  if (!t.history.empty()) {
    out << "  l_joint first " << t.history.front().l_joint << ", last " << t.history.back().l_joint << '\n';
  }
  if (t.final_eval) out << report_table(*t.final_eval);
  out << "  checkpoint " << t.checkpoint.string() << '\n';
  return kExitOk;
}

int cmd_eval(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const fs::path ckpt = checkpoint_path(config, options);
  HihModel model = load_model(ckpt);
  ProtocolOptions protocol = config.eval.options;
  if (!options.protocol.empty()) protocol.name = options.protocol;
  const fs::path eval_root = config.eval_root.empty() ? config.dataset_root : config.eval_root;
  if (protocol.name == "cross-dataset") {
    const auto meta = nlohmann::json::parse(read_checkpoint(ckpt).config_json);
    protocol.train_root = meta.at("run").value("dataset_root", "");
    protocol.eval_root = fs::weakly_canonical(eval_root).string();
    if (!protocol.train_root.empty()) protocol.train_root = fs::weakly_canonical(protocol.train_root).string();
  }
  const Manifest manifest = load_dataset(eval_root);
  for (const auto& issue : manifest.issues) {
    std::cerr << "warning: " << issue.path.string() << ": " << issue.message << '\n';
  }
  const auto seqs = load_sequences(manifest, config.eval.sequences);
  if (seqs.empty()) throw IoError(eval_root.string() + ": no evaluation sequences");
  const EvalOutcome ev = evaluate_model(model, seqs, config.eval, protocol);

  const fs::path dir = config.output_dir / ("eval_" + protocol.name);
  echo_config(config, dir);
  write_file(dir / "report.json", report_json(ev.report) + "\n");
  write_file(dir / "report.txt", report_table(ev.report));
  export_embeddings(dir / "embeddings", ev.entries);
  if (config.eval.dump_distances) {
    std::ofstream csv(dir / "distances.csv");
    write_distance_csv(csv, ev.split);
  }
  out << report_table(ev.report);
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& config, const CommandOptions&, std::ostream& out) {
  const auto& g = config.gradcheck;
  const auto rows = run_gradient_suite(g.seeds, g.op_tolerance, g.model_tolerance, g.corrupt);
  bool ok = true;
  nlohmann::ordered_json report = nlohmann::ordered_json::array();
  out << std::left << std::setw(20) << "case" << std::right << std::setw(14) << "max_rel_err"
      << std::setw(10) << "tol" << "  result\n";
  for (const auto& r : rows) {
    ok = ok && r.passed;
    out << std::left << std::setw(20) << r.name << std::right << std::scientific << std::setprecision(2)
        << std::setw(14) << r.max_rel_error << std::setw(10) << r.tolerance << "  "
        << (r.passed ? "PASS" : "FAIL") << '\n'
        << std::defaultfloat;
    nlohmann::ordered_json j;
    j["case"] = r.name;
    j["max_rel_error"] = r.max_rel_error;
    j["tolerance"] = r.tolerance;
    j["coordinates"] = r.coordinates;
    j["resampled"] = r.resampled;
    j["passed"] = r.passed;
    report.push_back(j);
  }
  const fs::path dir = config.output_dir / "gradcheck";
  echo_config(config, dir);
  write_file(dir / "report.json", report.dump(2) + "\n");
  if (!ok) {
    for (const auto& r : rows)
      if (!r.passed) out << "gradcheck failed: " << r.name << '\n';
  }
  return ok ? kExitOk : kExitValidation;
}

int cmd_dump_maps(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  HihModel model = load_model(checkpoint_path(config, options));
  const Manifest manifest = load_dataset(config.dataset_root);
  const SequenceRecord* record = nullptr;
  for (const auto& r : manifest.records)
    if (config.dump_maps.sequence.empty() || r.id() == config.dump_maps.sequence) {
      record = &r;
      break;
    }
  if (!record) throw ConfigError("dump_maps.sequence '" + config.dump_maps.sequence + "' not in dataset");
  const SequenceData data = read_sequence(*record);
  for (std::size_t f : config.dump_maps.frames)
    if (f >= data.frames) {
      throw ConfigError("dump_maps.frames: " + std::to_string(f) + " outside sequence of " +
                        std::to_string(data.frames) + " frames");
    }
  std::vector<Tensor> stages;
  {
    NoGradGuard no_grad;
    const auto frames = all_frames(data);
    model.backbone(silhouette_tensor(data, frames), heatmap_tensor(data, frames), &stages);
  }
  const fs::path dir = config.output_dir / "maps";
  echo_config(config, dir);
  std::size_t written = 0;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const Tensor& m = stages[s];
    const std::size_t c = m.dim(0), t = m.dim(1), h = m.dim(2), w = m.dim(3);
    auto v = m.data();
    for (std::size_t f : config.dump_maps.frames) {
      const std::size_t tf = f * t / data.frames;
      std::vector<double> norm(h * w, 0.0);
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < h * w; ++i) {
          const double x = v[(ch * t + tf) * h * w + i];
          norm[i] += x * x;
        }
      for (auto& n : norm) n = std::sqrt(n);
      const auto [lo, hi] = std::minmax_element(norm.begin(), norm.end());
      const double range = *hi - *lo;
      std::vector<std::uint8_t> px(h * w, 0);
      if (range > 0.0)
        for (std::size_t i = 0; i < h * w; ++i) px[i] = static_cast<std::uint8_t>(std::lround(255.0 * (norm[i] - *lo) / range));
      char name[64];
      std::snprintf(name, sizeof name, "stage%zu_frame%04zu.pgm", s + 1, f);
      write_pgm(dir / name, h, w, px.data());
      ++written;
    }
  }
  out << "dump-maps: " << written << " maps for " << record->id() << " -> " << dir.string() << '\n';
  return kExitOk;
}

int cmd_ablate(const RunConfig& config, const CommandOptions&, std::ostream& out) {
  if (config.eval.sequences.empty()) {
    throw ConfigError("ablate needs eval.sequences to select held-out sequences");
  }
  const fs::path root = config.output_dir / "ablation";
  fs::create_directories(root);
  echo_config(config, root);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::ostringstream table;
  table << std::fixed << std::setprecision(1);
  table << std::setw(7) << "Depth" << std::setw(7) << "Width" << std::setw(5) << "DSE" << std::setw(5) << "DTA"
        << " |" << std::setw(8) << "Rank-1" << std::setw(8) << "Rank-5" << std::setw(8) << "mAP" << std::setw(8)
        << "mINP" << '\n';
  for (const auto& row : kAblationRows) {
    RunConfig c = config;
    c.model.mode = row.mode;
    c.ablation = {row.width, row.dse, row.dta};
    if (config.ablate.iterations > 0) c.train.iterations = config.ablate.iterations;
    c.train.eval_every = 0;
    const TrainOutcome t = run_training(c, root / row.label);
    const MetricSummary& m = t.final_eval->overall;
    nlohmann::ordered_json j;
    j["row"] = row.label;
    j["variant"] = c.variant_label();
    j["depth"] = true;
    j["width"] = row.width;
    j["dse"] = row.dse;
    j["dta"] = row.dta;
    j["rank1"] = m.rank1;
    j["rank5"] = m.rank5;
    j["mAP"] = m.map;
    j["mINP"] = m.minp;
    j["iterations"] = c.train.iterations;
    j["final_l_joint"] = t.history.empty() ? 0.0 : t.history.back().l_joint;
    j["parameter_count"] = t.parameter_count;
    rows.push_back(j);
    auto mark = [](bool b) { return b ? "x" : ""; };
    table << std::setw(7) << "x" << std::setw(7) << mark(row.width) << std::setw(5) << mark(row.dse)
          << std::setw(5) << mark(row.dta) << " |" << std::setw(8) << 100.0 * m.rank1 << std::setw(8)
          << 100.0 * m.rank5 << std::setw(8) << 100.0 * m.map << std::setw(8) << 100.0 * m.minp << '\n';
  }
  nlohmann::ordered_json report;
  report["protocol"] = config.eval.protocol;
  report["rows"] = rows;
  write_file(root / "ablation.json", report.dump(2) + "\n");
  write_file(root / "ablation.txt", table.str());
  out << table.str();
  return kExitOk;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"HiH gait recognition: synthesis, training, evaluation and diagnostics", "hih"};
  app.require_subcommand(1);
  std::string config_path, ablation, checkpoint, protocol;
  bool force = false;
  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, const CommandOptions&, std::ostream&);
  };
  const Sub subs[] = {
      {"synth", "Generate a synthetic walker dataset", cmd_synth},
      {"train", "Train a model and write checkpoint and logs", cmd_train},
      {"eval", "Evaluate a checkpoint under a retrieval protocol", cmd_eval},
      {"gradcheck", "Compare analytic and finite-difference gradients", cmd_gradcheck},
      {"dump-maps", "Write per-stage activation-norm maps", cmd_dump_maps},
      {"ablate", "Train and compare the ablation rows", cmd_ablate},
  };
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "JSON run config")->required();
    sub->add_flag("--force", force, "Overwrite a non-empty output directory");
    sub->add_option("--ablation", ablation, "Switch overrides, e.g. dse=off,dta=on");
    sub->add_option("--checkpoint", checkpoint, "Checkpoint path");
    sub->add_option("--protocol", protocol, "Evaluation protocol");
    apps.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  try {
    RunConfig config = load_run_config(config_path);
    if (!ablation.empty()) apply_ablation_overrides(config, ablation);
    CommandOptions options{force, checkpoint, protocol};
    for (std::size_t i = 0; i < apps.size(); ++i)
      if (apps[i]->parsed()) return subs[i].fn(config, options, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace hih::cli
