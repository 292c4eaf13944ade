#pragma once

#include <cstddef>
#include <vector>

#include "hih/tensor.hpp"

namespace hih {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

using PoseFrame = std::vector<Keypoint>;
using PoseSequence = std::vector<PoseFrame>;

// COCO-17 joint order used for ingestion and left/right swapping.
inline constexpr std::size_t kCocoJoints = 17;
// Index of the mirrored joint for each COCO-17 joint.
const std::vector<std::size_t>& coco_mirror_map();

inline constexpr double kDefaultHeatmapSigma = 2.0;

struct RasterStats {
  std::size_t skipped_joints = 0;  // non-finite coordinates or confidence
};

/// Single-channel heatmap: pixelwise max over joints of
/// conf * exp(-((x - xj)^2 + (y - yj)^2) / (2 sigma^2)). Row-major H x W.
std::vector<double> rasterize(const PoseFrame& joints, std::size_t height, std::size_t width,
                              double sigma = kDefaultHeatmapSigma, RasterStats* stats = nullptr);

// 1 x T x H x W heatmap sequence.
Tensor rasterize_sequence(const PoseSequence& frames, std::size_t height, std::size_t width,
                          double sigma = kDefaultHeatmapSigma, RasterStats* stats = nullptr);

}  // namespace hih
