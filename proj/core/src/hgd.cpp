#include "hih/hgd.hpp"

#include <cmath>

#include "hih/errors.hpp"

namespace hih {

namespace {

constexpr Extent3 kSpatialKernel{1, 3, 3};
constexpr Extent3 kSpatialPad{0, 1, 1};
constexpr Extent3 kTemporalKernel{3, 1, 1};
constexpr Extent3 kTemporalPad{1, 0, 0};

}  // namespace

HgdStageConfig HgdStageConfig::standard(std::size_t stage_index, std::size_t in_channels,
                                        std::size_t out_channels, bool spatial_downsample,
                                        bool width_hierarchy, bool bias) {
  if (stage_index == 0) throw ConfigError("HGD stage index starts at 1");
  HgdStageConfig cfg;
  cfg.stage_index = stage_index;
  cfg.in_channels = in_channels;
  cfg.out_channels = out_channels;
  cfg.spatial_downsample = spatial_downsample;
  cfg.bias = bias;
  cfg.strip_counts.clear();
  if (width_hierarchy) {
    for (std::size_t i = 0; i < stage_index; ++i) cfg.strip_counts.push_back(std::size_t{1} << i);
  } else {
    cfg.strip_counts.push_back(1);
  }
  return cfg;
}

void HgdStageConfig::validate(std::size_t input_height) const {
  if (strip_counts.empty()) throw ConfigError("HGD stage " + std::to_string(stage_index) + ": no scales");
  if (in_channels == 0 || out_channels == 0) {
    throw ConfigError("HGD stage " + std::to_string(stage_index) + ": zero channels");
  }
  for (auto n : strip_counts) {
    if (n == 0 || input_height % n != 0) {
      throw ConfigError("HGD stage " + std::to_string(stage_index) + ": strip count " +
                        std::to_string(n) + " does not divide height " + std::to_string(input_height));
    }
  }
}

std::vector<Tensor> strip_split(const Tensor& input, std::size_t strips) {
  if (input.rank() != 4) {
    throw DimensionError("strip_split: expected C x T x H x W, got " + shape_str(input.shape()));
  }
  const std::size_t h = input.dim(2);
  if (strips == 0 || h % strips != 0) {
    throw ConfigError("strip_split: " + std::to_string(strips) + " strips do not divide height " +
                      std::to_string(h));
  }
  if (strips == 1) return {input};
  const std::size_t band = h / strips;
  std::vector<Tensor> out;
  out.reserve(strips);
  for (std::size_t i = 0; i < strips; ++i) out.push_back(narrow(input, 2, i * band, band));
  return out;
}

Tensor strip_merge(std::span<const Tensor> strips) {
  if (strips.size() == 1) return strips[0];
  return concat(strips, 2);
}

Tensor hgd_scale(const Tensor& input, std::size_t strips, const ConvSpec& spatial,
                 const ConvSpec& temporal) {
  auto bands = strip_split(input, strips);
  for (auto& b : bands) b = relu(conv3d(b, spatial));
  return relu(conv3d(strip_merge(bands), temporal));
}

HgdStage::HgdStage(HgdStageConfig config) : config_(std::move(config)) {
  if (config_.strip_counts.empty()) throw ConfigError("HGD stage: no scales");
  const auto in = config_.in_channels;
  const auto out = config_.out_channels;
  for (auto n : config_.strip_counts) {
    scales_.push_back({n, ConvSpec::make(in, out, kSpatialKernel, kSpatialPad, config_.bias),
                       ConvSpec::make(out, out, kTemporalKernel, kTemporalPad, config_.bias)});
  }
  refine_spatial_ = ConvSpec::make(out, out, kSpatialKernel, kSpatialPad, config_.bias);
  refine_temporal_ = ConvSpec::make(out, out, kTemporalKernel, kTemporalPad, config_.bias);
  if (in != out) skip_ = ConvSpec::make(in, out, {1, 1, 1}, {0, 0, 0}, config_.bias);
}

void HgdStage::init(std::mt19937_64& rng) {
  // Scale outputs are summed; shrink each branch so the sum keeps unit gain.
  const double branch_gain = std::sqrt(2.0 / static_cast<double>(scales_.size()));
  for (auto& s : scales_) {
    s.spatial.init_kaiming(rng);
    s.temporal.init_kaiming(rng, branch_gain);
  }
  refine_spatial_.init_kaiming(rng);
  refine_temporal_.init_kaiming(rng, 1.0);
  if (skip_) skip_->init_kaiming(rng, 1.0);
}

void HgdStage::set_dirac() {
  for (auto& s : scales_) {
    s.spatial.set_dirac();
    s.temporal.set_dirac();
  }
  refine_spatial_.set_dirac();
  refine_temporal_.set_dirac();
  if (skip_) skip_->set_dirac();
}

Tensor HgdStage::forward(const Tensor& input) const {
  if (input.rank() != 4) {
    throw DimensionError("HGD stage " + std::to_string(config_.stage_index) +
                         ": expected C x T x H x W input, got " + shape_str(input.shape()));
  }
  if (input.dim(0) != config_.in_channels) {
    throw DimensionError("HGD stage " + std::to_string(config_.stage_index) + ": channel axis has " +
                         std::to_string(input.dim(0)) + ", expected " +
                         std::to_string(config_.in_channels));
  }
  config_.validate(input.dim(2));

  std::vector<Tensor> branches;
  branches.reserve(scales_.size());
  for (const auto& s : scales_) branches.push_back(hgd_scale(input, s.strips, s.spatial, s.temporal));
  Tensor aggregated = branches.size() == 1 ? branches[0] : add_n(branches);

  Tensor refined = conv3d(relu(conv3d(aggregated, refine_spatial_)), refine_temporal_);
  Tensor shortcut = skip_ ? conv3d(input, *skip_) : input;
  Tensor out = refined + shortcut;
  if (config_.spatial_downsample) out = max_pool3d(out, {1, 2, 2}, {1, 2, 2});
  return out;
}

void HgdStage::append_parameters(ParameterList& out, const std::string& prefix) const {
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    const std::string p = prefix + ".scale" + std::to_string(i);
    hih::append_parameters(out, p + ".spatial", scales_[i].spatial);
    hih::append_parameters(out, p + ".temporal", scales_[i].temporal);
  }
  hih::append_parameters(out, prefix + ".refine_spatial", refine_spatial_);
  hih::append_parameters(out, prefix + ".refine_temporal", refine_temporal_);
  if (skip_) hih::append_parameters(out, prefix + ".skip", *skip_);
}

std::size_t HgdStage::parameter_count() const {
  std::size_t n = refine_spatial_.parameter_count() + refine_temporal_.parameter_count();
  for (const auto& s : scales_) n += s.spatial.parameter_count() + s.temporal.parameter_count();
  if (skip_) n += skip_->parameter_count();
  return n;
}

}  // namespace hih
