#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hih/dataset.hpp"
#include "hih/losses.hpp"
#include "hih/model.hpp"
#include "hih/retrieval.hpp"
#include "run_config.hpp"

namespace hih::cli {

struct LoadedSequence {
  SequenceRecord record;
  SequenceData data;
};

// Every manifest record whose sequence tag is in `tags` (all when empty).
std::vector<LoadedSequence> load_sequences(const Manifest& manifest, const std::vector<std::string>& tags);

// Pre-BN embeddings in eval mode, using the first `max_frames` frames (all
// when 0).
std::vector<RetrievalEntry> embed_sequences(HihModel& model, const std::vector<LoadedSequence>& seqs,
                                            std::size_t max_frames);

struct EvalOutcome {
  ProbeGallerySplit split;
  MetricReport report;
  std::vector<RetrievalEntry> entries;
};

EvalOutcome evaluate_model(HihModel& model, const std::vector<LoadedSequence>& seqs,
                           const EvalConfig& eval, const ProtocolOptions& options);

struct TrainOutcome {
  std::vector<LossReport> history;
  std::filesystem::path checkpoint;
  std::optional<MetricReport> final_eval;
  std::size_t parameter_count = 0;
};

/// Trains per `config` into `out_dir`: train.log (JSON lines), run.json,
/// checkpoint.hihc and, when held-out sequences are configured, eval.log and
/// report.json / report.txt for the final model.
TrainOutcome run_training(const RunConfig& config, const std::filesystem::path& out_dir);

// Writes `config.source_text` to dir/config.json.
void echo_config(const RunConfig& config, const std::filesystem::path& dir);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace hih::cli
