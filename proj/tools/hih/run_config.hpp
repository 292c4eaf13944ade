#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hih/model.hpp"
#include "hih/retrieval.hpp"
#include "hih/sampler.hpp"

namespace hih::cli {

struct SynthConfig {
  std::size_t subjects = 8;
  // Sequence tags "<covariate>-<nn>"; the covariate prefix drives the walker.
  std::vector<std::string> sequences{"nm-01", "nm-02", "nm-03", "nm-04"};
  std::vector<std::string> views{"090"};
  std::size_t frames = 30;
  // Applied to every generated identity after the random draw.
  std::map<std::string, double> identity;
  // Relative per-sequence jitter of stride frequency and amplitude.
  double sequence_jitter = 0.03;
};

struct AblationSwitches {
  bool hgd_width = true;
  bool dse = true;
  bool dta = true;
};

struct TrainConfig {
  std::size_t iterations = 300;
  BatchPlan plan{4, 2, {30, 30}};
  double lr = 0.1;
  double margin = 0.2;
  std::vector<std::string> sequences;  // empty: every sequence
  std::size_t eval_every = 0;
  std::size_t checkpoint_every = 0;
  bool log_wall_time = true;
  double hflip_probability = 0.0;
  double rotate_degrees = 0.0;
  // Global gradient-norm ceiling; 0 disables clipping.
  double grad_clip = 0.0;
};

struct EvalConfig {
  std::string protocol = "gait3d-style";
  std::vector<std::string> sequences;  // empty: every sequence
  std::size_t max_frames = 0;          // 0: whole sequence
  bool dump_distances = false;
  ProtocolOptions options;
};

struct GradcheckConfig {
  std::size_t seeds = 5;
  double op_tolerance = 1e-5;
  double model_tolerance = 1e-4;
  std::string corrupt;  // test hook: case whose gradient is deliberately scaled
};

struct DumpMapsConfig {
  std::string sequence;  // "<subject>/<sequence dir>", empty: first record
  std::vector<std::size_t> frames{0};
};

struct AblateConfig {
  std::size_t iterations = 0;  // 0: train.iterations
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs/default";
  std::filesystem::path dataset_root = "data/synthetic";
  std::filesystem::path eval_root;  // empty: dataset_root
  SynthConfig synth;
  ModelConfig model;
  AblationSwitches ablation;
  TrainConfig train;
  EvalConfig eval;
  GradcheckConfig gradcheck;
  DumpMapsConfig dump_maps;
  AblateConfig ablate;
  std::string source_text;  // the config file, verbatim

  // Model config with the ablation switches applied.
  ModelConfig effective_model(std::size_t num_classes) const;
  std::string variant_label() const;
};

// Parses and validates; unknown keys anywhere are a ConfigError. Relative
// paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// "hgd_width=off,dse=on" style overrides.
void apply_ablation_overrides(RunConfig& config, const std::string& spec);

}  // namespace hih::cli
