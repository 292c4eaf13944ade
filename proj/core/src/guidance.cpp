#include "hih/guidance.hpp"

#include <vector>

#include "hih/errors.hpp"
#include "hih/warp.hpp"

namespace hih {

namespace {

constexpr double kOffsetInitStd = 1e-2;

void require_pose_matches(const Tensor& features, const Tensor& pose, const char* op) {
  if (features.rank() != 4 || pose.rank() != 4) {
    throw DimensionError(std::string(op) + ": features and pose must be C x T x H x W");
  }
  for (std::size_t a = 1; a < 4; ++a) {
    if (features.dim(a) != pose.dim(a)) {
      static const char* names[] = {"C", "T", "H", "W"};
      throw DimensionError(std::string(op) + ": pose " + shape_str(pose.shape()) +
                           " and features " + shape_str(features.shape()) + " differ on axis " +
                           names[a]);
    }
  }
}

void init_offset_conv(ConvSpec& conv, std::mt19937_64& rng, std::size_t first_scale_channel) {
  std::normal_distribution<double> dist(0.0, kOffsetInitStd);
  for (auto& v : conv.weights.mutable_data()) v = dist(rng);
  if (conv.bias.defined()) {
    auto b = conv.bias.mutable_data();
    for (std::size_t c = 0; c < b.size(); ++c) b[c] = c >= first_scale_channel ? 1.0 : 0.0;
  }
}

}  // namespace

DseConfig DseConfig::make(std::size_t pose_channels, bool bias) {
  return {ConvSpec::make(pose_channels, 3, {1, 3, 3}, {0, 1, 1}, bias)};
}

void DseConfig::validate() const {
  conv.validate();
  if (conv.out_channels != 3) throw ConfigError("DSE offset conv must have 3 output channels");
  if (conv.kernel != Extent3{1, 3, 3}) throw ConfigError("DSE offset conv must be 1x3x3");
}

void DseConfig::init(std::mt19937_64& rng) { init_offset_conv(conv, rng, 2); }

DtaConfig DtaConfig::make(std::size_t pose_channels, std::size_t temporal_stride, bool bias) {
  return {ConvSpec::make(pose_channels, 5, {3, 3, 3}, {1, 1, 1}, bias), temporal_stride};
}

void DtaConfig::validate() const {
  conv.validate();
  if (conv.out_channels != 5) throw ConfigError("DTA offset conv must have 5 output channels");
  if (temporal_stride == 0) throw ConfigError("DTA temporal stride must be >= 1");
}

void DtaConfig::init(std::mt19937_64& rng) { init_offset_conv(conv, rng, 3); }

Tensor constrain_spatial_offsets(const Tensor& raw) {
  if (raw.rank() != 4 || raw.dim(0) != 3) {
    throw DimensionError("constrain_spatial_offsets: expected 3 x T x H x W, got " +
                         shape_str(raw.shape()));
  }
  Tensor scale = relu(narrow(raw, 0, 2, 1));
  const Tensor pair[] = {scale, scale};
  return tanh(narrow(raw, 0, 0, 2)) * concat(pair, 0);
}

Tensor constrain_spatiotemporal_offsets(const Tensor& raw) {
  if (raw.rank() != 4 || raw.dim(0) != 5) {
    throw DimensionError("constrain_spatiotemporal_offsets: expected 5 x T x H x W, got " +
                         shape_str(raw.shape()));
  }
  Tensor scale_xy = relu(narrow(raw, 0, 3, 1));
  Tensor scale_z = relu(narrow(raw, 0, 4, 1));
  const Tensor pair[] = {scale_xy, scale_xy};
  const Tensor parts[] = {tanh(narrow(raw, 0, 0, 2)) * concat(pair, 0),
                          tanh(narrow(raw, 0, 2, 1)) * scale_z};
  return concat(parts, 0);
}

Tensor dse_apply(const Tensor& features, const Tensor& pose, const DseConfig& cfg) {
  cfg.validate();
  require_pose_matches(features, pose, "dse_apply");
  return bilinear_warp(features, constrain_spatial_offsets(conv3d(pose, cfg.conv)));
}

Tensor dta_apply(const Tensor& features, const Tensor& pose, const DtaConfig& cfg) {
  cfg.validate();
  require_pose_matches(features, pose, "dta_apply");
  const std::size_t t = cfg.temporal_stride;
  if (features.dim(1) < t) {
    throw DimensionError("dta_apply: " + std::to_string(features.dim(1)) +
                         " frames fewer than temporal stride " + std::to_string(t));
  }
  Tensor warped = trilinear_warp(features, constrain_spatiotemporal_offsets(conv3d(pose, cfg.conv)));
  if (t == 1) return warped;
  return max_pool3d(warped, {t, 1, 1}, {t, 1, 1});
}

Tensor guidance_resample(const Tensor& pose, Extent3 target) {
  if (pose.rank() != 4) {
    throw DimensionError("guidance_resample: expected C x T x H x W, got " + shape_str(pose.shape()));
  }
  const std::size_t t = pose.dim(1), h = pose.dim(2), w = pose.dim(3);
  auto ratio = [](std::size_t from, std::size_t to, const char* axis) {
    if (to == 0 || to > from || from % to != 0) {
      throw ConfigError(std::string("guidance_resample: ") + axis + " " + std::to_string(from) +
                        " -> " + std::to_string(to) + " is not an integer downsample");
    }
    return from / to;
  };
  const std::size_t rt = ratio(t, target.t, "T");
  const std::size_t rh = ratio(h, target.h, "H");
  const std::size_t rw = ratio(w, target.w, "W");
  Tensor out = pose;
  if (rh > 1 || rw > 1) out = avg_pool3d(out, {1, rh, rw}, {1, rh, rw});
  if (rt > 1) out = max_pool3d(out, {rt, 1, 1}, {rt, 1, 1});
  return out;
}

}  // namespace hih
