#include "training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include "hih/augment.hpp"
#include "hih/checkpoint.hpp"
#include "hih/errors.hpp"
#include "hih/sampler.hpp"
#include "json.hpp"

namespace hih::cli {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot write");
  out << text;
  if (!out) throw IoError(path.string() + ": write failed");
}

void echo_config(const RunConfig& config, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "config.json", config.source_text);
}

std::vector<LoadedSequence> load_sequences(const Manifest& manifest, const std::vector<std::string>& tags) {
  std::vector<LoadedSequence> out;
  for (const auto& r : manifest.records) {
    if (!tags.empty() && std::find(tags.begin(), tags.end(), r.meta.sequence) == tags.end()) continue;
    out.push_back({r, read_sequence(r)});
  }
  return out;
}

std::vector<RetrievalEntry> embed_sequences(HihModel& model, const std::vector<LoadedSequence>& seqs,
                                            std::size_t max_frames) {
  NoGradGuard no_grad;
  std::vector<RetrievalEntry> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) {
    std::vector<std::size_t> frames = all_frames(s.data);
    if (max_frames > 0 && frames.size() > max_frames) frames.resize(max_frames);
    const Tensor sil = silhouette_tensor(s.data, frames);
    const Tensor pose = heatmap_tensor(s.data, frames);
    const ModelOutput y = model.forward(std::span(&sil, 1), std::span(&pose, 1), false);
    auto e = y.embedding.data();
    out.push_back({s.record.id(), s.record.meta.subject, s.record.meta.sequence, s.record.meta.view,
                   s.record.meta.covariate, {e.begin(), e.end()}});
  }
  return out;
}

EvalOutcome evaluate_model(HihModel& model, const std::vector<LoadedSequence>& seqs, const EvalConfig& eval,
                           const ProtocolOptions& options) {
  EvalOutcome o;
  o.entries = embed_sequences(model, seqs, eval.max_frames);
  o.split = build_protocol(o.entries, model.config().hp_bins, options);
  o.report = evaluate(o.split);
  return o;
}

namespace {

nlohmann::ordered_json summary_json(const MetricReport& r, std::size_t iter) {
  nlohmann::ordered_json j;
  j["iter"] = iter;
  j["rank1"] = r.overall.rank1;
  j["rank5"] = r.overall.rank5;
  j["mAP"] = r.overall.map;
  j["mINP"] = r.overall.minp;
  return j;
}

}  // namespace

TrainOutcome run_training(const RunConfig& config, const fs::path& out_dir) {
  const Manifest manifest = load_dataset(config.dataset_root);
  for (const auto& issue : manifest.issues) {
    std::cerr << "warning: " << issue.path.string() << ": " << issue.message << '\n';
  }
  const std::vector<LoadedSequence> train_set = load_sequences(manifest, config.train.sequences);
  if (train_set.empty()) throw IoError(config.dataset_root.string() + ": no training sequences");

  // Class labels follow sorted subject order.
  std::vector<std::string> subjects;
  for (const auto& s : train_set) subjects.push_back(s.record.meta.subject);
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
  DatasetIndex index;
  index.sequences_by_subject.resize(subjects.size());
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    const auto it = std::lower_bound(subjects.begin(), subjects.end(), train_set[i].record.meta.subject);
    index.sequences_by_subject[static_cast<std::size_t>(it - subjects.begin())].push_back(i);
    index.frame_counts.push_back(train_set[i].data.frames);
  }

  std::vector<LoadedSequence> eval_set;
  if (!config.eval.sequences.empty()) eval_set = load_sequences(manifest, config.eval.sequences);

  HihModel model(config.effective_model(subjects.size()));
  model.init(config.seed);
  const ParameterList params = model.parameters();

  fs::create_directories(out_dir);
  echo_config(config, out_dir);
  TrainOutcome outcome;
  outcome.parameter_count = model.parameter_count();
  outcome.checkpoint = out_dir / "checkpoint.hihc";
  {
    nlohmann::ordered_json run;
    run["variant"] = config.variant_label();
    run["mode"] = mode_name(model.config().mode);
    run["hgd_width"] = config.ablation.hgd_width;
    run["dse"] = config.ablation.dse;
    run["dta"] = config.ablation.dta;
    run["subjects"] = subjects.size();
    run["training_sequences"] = train_set.size();
    run["parameter_count"] = outcome.parameter_count;
    write_file(out_dir / "run.json", run.dump(2) + "\n");
  }
  nlohmann::ordered_json meta;
  meta["dataset_root"] = config.dataset_root.string();
  meta["variant"] = config.variant_label();
  meta["seed"] = config.seed;
  meta["classes"] = subjects;

  std::ofstream log(out_dir / "train.log", std::ios::binary);
  std::ofstream eval_log;
  if (!eval_set.empty()) eval_log.open(out_dir / "eval.log", std::ios::binary);
  if (!log) throw IoError((out_dir / "train.log").string() + ": cannot write");

  std::mt19937_64 sampler_rng(config.seed + 1);
  std::mt19937_64 augment_rng(config.seed + 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto start = std::chrono::steady_clock::now();
  const auto& plan = config.train.plan;

  for (std::size_t iter = 1; iter <= config.train.iterations; ++iter) {
    const auto batch = sample_batch(index, plan, sampler_rng);
    std::vector<Tensor> sils, poses;
    std::vector<std::size_t> labels;
    for (const auto& ref : batch) {
      SequenceData data = train_set[ref.sequence].data;
      if (config.train.hflip_probability > 0.0 && unit(augment_rng) < config.train.hflip_probability) {
        data = hflip(data);
      }
      if (config.train.rotate_degrees > 0.0) {
        const double deg = (2.0 * unit(augment_rng) - 1.0) * config.train.rotate_degrees;
        data = rotate(data, deg);
      }
      sils.push_back(silhouette_tensor(data, ref.frames));
      poses.push_back(heatmap_tensor(data, ref.frames));
      labels.push_back(ref.label);
    }
    LossReport report;
    double grad_norm = 0.0;
    try {
      const ModelOutput y = model.forward(sils, poses, true);
      const JointLoss loss = joint_loss(y.embedding, y.logits, labels, plan.p, plan.k, config.train.margin);
      report = loss.report;
      for (const auto& p : params) Tensor(p.tensor).zero_grad();
      loss.total.backward();
      for (const auto& p : params) {
        for (double g : p.tensor.grad())
          if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + p.name);
      }
    } catch (const NumericError& e) {
      throw NumericError("iteration " + std::to_string(iter) + ": " + e.what() +
                         " (last good checkpoint kept)");
    }
    {
      NoGradGuard no_grad;
      grad_norm = clip_grad_norm(params, config.train.grad_clip);
      sgd_step(params, config.train.lr);
    }
    outcome.history.push_back(report);

    nlohmann::ordered_json line;
    line["iter"] = iter;
    line["l_tri"] = report.l_tri;
    line["l_ce"] = report.l_ce;
    line["l_joint"] = report.l_joint;
    line["n_tri"] = report.n_tri;
    line["lr"] = config.train.lr;
    line["grad_norm"] = grad_norm;
    line["elapsed_ms"] =
        config.train.log_wall_time
            ? std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count()
            : 0;
    line["variant"] = config.variant_label();
    log << line.dump() << '\n';
    log.flush();

    if (config.train.checkpoint_every > 0 && iter % config.train.checkpoint_every == 0) {
      save_checkpoint(outcome.checkpoint, model, meta.dump());
    }
    if (!eval_set.empty() && config.train.eval_every > 0 && iter % config.train.eval_every == 0 &&
        iter != config.train.iterations) {
      const EvalOutcome ev = evaluate_model(model, eval_set, config.eval, config.eval.options);
      eval_log << summary_json(ev.report, iter).dump() << '\n';
    }
  }
  save_checkpoint(outcome.checkpoint, model, meta.dump());

  if (!eval_set.empty()) {
    const EvalOutcome ev = evaluate_model(model, eval_set, config.eval, config.eval.options);
    eval_log << summary_json(ev.report, config.train.iterations).dump() << '\n';
    write_file(out_dir / "report.json", report_json(ev.report) + "\n");
    write_file(out_dir / "report.txt", report_table(ev.report));
    outcome.final_eval = ev.report;
  }
  return outcome;
}

}  // namespace hih::cli
