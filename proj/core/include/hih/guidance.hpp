#pragma once

#include <cstddef>
#include <random>
#include <string>

#include "hih/ops.hpp"
#include "hih/tensor.hpp"

namespace hih {

/// Pose-driven spatial enhancement: a 3x3 conv on the pose heatmap yields
/// (dx_raw, dy_raw, scale_raw) per pixel and frame; the displacement is
/// tanh(d_raw) * relu(scale_raw), with the single scale channel shared by x
/// and y.
struct DseConfig {
  ConvSpec conv;  // 1x3x3, pose channels -> 3

  static DseConfig make(std::size_t pose_channels = 1, bool bias = true);
  void validate() const;
  // Small random weights, unit scale bias, so offsets start near zero but
  // still receive gradient.
  void init(std::mt19937_64& rng);
};

/// Pose-driven temporal alignment: a 3x3x3 conv yields
/// (dx_raw, dy_raw, dz_raw, scale_xy_raw, scale_z_raw); the warped volume is
/// then max-pooled over time with kernel = stride = temporal_stride.
struct DtaConfig {
  ConvSpec conv;  // 3x3x3, pose channels -> 5
  std::size_t temporal_stride = 3;

  static DtaConfig make(std::size_t pose_channels = 1, std::size_t temporal_stride = 3,
                        bool bias = true);
  void validate() const;
  void init(std::mt19937_64& rng);
};

// 3 x T x H x W raw field -> 2 x T x H x W displacement (dx, dy).
Tensor constrain_spatial_offsets(const Tensor& raw);
// 5 x T x H x W raw field -> 3 x T x H x W displacement (dx, dy, dz).
Tensor constrain_spatiotemporal_offsets(const Tensor& raw);

Tensor dse_apply(const Tensor& features, const Tensor& pose, const DseConfig& cfg);
Tensor dta_apply(const Tensor& features, const Tensor& pose, const DtaConfig& cfg);

// Brings a 1 x T x H x W heatmap to a stage's resolution: spatial average
// pooling and temporal max pooling by integer ratios.
Tensor guidance_resample(const Tensor& pose, Extent3 target);

}  // namespace hih
