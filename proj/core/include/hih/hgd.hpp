#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hih/ops.hpp"
#include "hih/tensor.hpp"

namespace hih {

/// One Hierarchical Gait Decomposer stage. The width-wise hierarchy is the
/// list of strip counts: each scale splits the input into that many
/// horizontal bands, runs a shared 1x3x3 conv on every band, merges, and
/// refines over time with a 3x1x1 conv. Scale outputs are summed, refined
/// again, and added to a skip path.
struct HgdStageConfig {
  std::size_t stage_index = 1;
  std::vector<std::size_t> strip_counts{1};
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  bool spatial_downsample = false;
  bool bias = true;

  // Strip counts 1, 2, 4, ..., 2^(stage-1); a single full-height scale when
  // `width_hierarchy` is false.
  static HgdStageConfig standard(std::size_t stage_index, std::size_t in_channels,
                                 std::size_t out_channels, bool spatial_downsample,
                                 bool width_hierarchy = true, bool bias = true);

  // Throws ConfigError unless every strip count divides `input_height`.
  void validate(std::size_t input_height) const;
};

// Contiguous horizontal bands along H of a C x T x H x W map, top to bottom.
std::vector<Tensor> strip_split(const Tensor& input, std::size_t strips);
Tensor strip_merge(std::span<const Tensor> strips);

// Each band is convolved with its own zero padding, so no band sees rows of
// its neighbours. Weights are shared across bands of one scale.
Tensor hgd_scale(const Tensor& input, std::size_t strips, const ConvSpec& spatial,
                 const ConvSpec& temporal);

struct HgdScaleBranch {
  std::size_t strips = 1;
  ConvSpec spatial;   // 1x3x3, in -> out
  ConvSpec temporal;  // 3x1x1, out -> out
};

class HgdStage {
 public:
  explicit HgdStage(HgdStageConfig config);

  void init(std::mt19937_64& rng);
  // Every kernel becomes an identity tap (skip projection included).
  void set_dirac();

  Tensor forward(const Tensor& input) const;

  const HgdStageConfig& config() const { return config_; }
  const std::vector<HgdScaleBranch>& scales() const { return scales_; }
  std::vector<HgdScaleBranch>& scales() { return scales_; }
  const ConvSpec& refine_spatial() const { return refine_spatial_; }
  const ConvSpec& refine_temporal() const { return refine_temporal_; }
  const std::optional<ConvSpec>& skip() const { return skip_; }

  void append_parameters(ParameterList& out, const std::string& prefix) const;
  std::size_t parameter_count() const;

 private:
  HgdStageConfig config_;
  std::vector<HgdScaleBranch> scales_;
  ConvSpec refine_spatial_;
  ConvSpec refine_temporal_;
  std::optional<ConvSpec> skip_;
};

inline Tensor hgd_forward(const Tensor& input, const HgdStage& stage) { return stage.forward(input); }

}  // namespace hih
