#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hih/pose_raster.hpp"
#include "hih/tensor.hpp"

namespace hih {

inline constexpr std::size_t kFrameHeight = 64;
inline constexpr std::size_t kFrameWidth = 44;

/// Body proportions and gait of one synthetic subject. Lengths are in pixels
/// before `height_scale` is applied.
struct WalkerIdentity {
  double torso = 18.0;
  double upper_arm = 9.0;
  double lower_arm = 8.0;
  double upper_leg = 13.0;
  double lower_leg = 12.0;
  double thickness = 4.0;
  double frequency = 1.0 / 12.0;  // gait cycles per frame
  double amplitude = 0.4;         // thigh swing, radians
  double height_scale = 1.0;

  // Throws ConfigError when a field is non-positive (amplitude may be 0) or
  // the figure cannot fit the frame with a 1-pixel margin.
  void validate(std::size_t height = kFrameHeight, std::size_t width = kFrameWidth) const;
  // Uniform draw from ranges that always fit a 64 x 44 frame.
  static WalkerIdentity random(std::mt19937_64& rng);
};

// Covariates: "nm" normal, "bg" carried bag, "fs" fast, "sl" slow.
bool is_known_covariate(const std::string& tag);

/// Binary silhouettes (0/1, T x H x W row-major) and per-frame COCO-17
/// keypoints with confidence 1.
struct SequenceData {
  std::size_t frames = 0;
  std::size_t height = kFrameHeight;
  std::size_t width = kFrameWidth;
  std::vector<std::uint8_t> silhouettes;
  PoseSequence pose;

  std::uint8_t pixel(std::size_t t, std::size_t y, std::size_t x) const {
    return silhouettes[(t * height + y) * width + x];
  }
};

/// Stick figure with sinusoidal joint angles, seen at `view_degrees` of yaw
/// (x foreshortened by |cos yaw|, left/right joints offset by sin yaw), and
/// rendered as capsules. The gait phase at frame 0 is drawn from `rng`.
SequenceData generate_sequence(const WalkerIdentity& identity, double view_degrees,
                               const std::string& covariate, std::size_t frames,
                               std::mt19937_64& rng);

// 1 x n x H x W silhouettes and heatmaps for the given frame indices.
Tensor silhouette_tensor(const SequenceData& seq, const std::vector<std::size_t>& frames);
Tensor heatmap_tensor(const SequenceData& seq, const std::vector<std::size_t>& frames,
                      double sigma = kDefaultHeatmapSigma);
std::vector<std::size_t> all_frames(const SequenceData& seq);

}  // namespace hih
