#include "hih/model.hpp"

#include <cmath>
#include <limits>

#include "hih/errors.hpp"
#include "json.hpp"

namespace hih {

std::string mode_name(ModelMode mode) {
  return mode == ModelMode::silhouette_only ? "HiH-S" : "HiH-M";
}

ModelMode parse_mode(const std::string& name) {
  if (name == "HiH-S") return ModelMode::silhouette_only;
  if (name == "HiH-M") return ModelMode::multi_modal;
  throw ConfigError("unknown model mode '" + name + "' (expected HiH-S or HiH-M)");
}

ModelConfig ModelConfig::outdoor(std::size_t num_classes) {
  ModelConfig c;
  c.num_classes = num_classes;
  return c;
}

ModelConfig ModelConfig::indoor(std::size_t num_classes) {
  ModelConfig c;
  c.channels = {64, 64, 128, 256};
  c.spatial_downsample = {false, false, false, false};
  c.num_classes = num_classes;
  return c;
}

void ModelConfig::validate() const {
  const std::size_t n = channels.size();
  if (n < 1 || n > 4) throw ConfigError("model.channels must list 1 to 4 stages");
  if (spatial_downsample.size() != n || temporal_stride.size() != n) {
    throw ConfigError("model.spatial_downsample and model.temporal_stride must have one entry per stage");
  }
  for (std::size_t c : channels)
    if (c == 0) throw ConfigError("model.channels entries must be positive");
  for (std::size_t t : temporal_stride)
    if (t == 0) throw ConfigError("model.temporal_stride entries must be >= 1");
  for (const auto* set : {&dse_stages, &dta_stages})
    for (std::size_t s : *set)
      if (s < 1 || s > n) {
        throw ConfigError("guidance stage " + std::to_string(s) + " outside 1.." + std::to_string(n));
      }
  if (hp_bins == 0 || embedding_dim == 0 || num_classes == 0) {
    throw ConfigError("hp_bins, embedding_dim and num_classes must be positive");
  }
  std::size_t h = input_height, w = input_width;
  if (h == 0 || w == 0) throw ConfigError("input size must be positive");
  for (std::size_t s = 0; s < n; ++s) {
    HgdStageConfig::standard(s + 1, 1, 1, false, hgd_width).validate(h);
    if (spatial_downsample[s]) {
      if (h < 2 || w < 2) throw ConfigError("stage " + std::to_string(s + 1) + " too small to downsample");
      h /= 2;
      w /= 2;
    }
  }
  if (h % hp_bins != 0) {
    throw ConfigError("hp_bins " + std::to_string(hp_bins) + " does not divide final height " +
                      std::to_string(h));
  }
}

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["channels"] = channels;
  j["spatial_downsample"] = spatial_downsample;
  j["temporal_stride"] = temporal_stride;
  j["dse_stages"] = std::vector<std::size_t>(dse_stages.begin(), dse_stages.end());
  j["dta_stages"] = std::vector<std::size_t>(dta_stages.begin(), dta_stages.end());
  j["hgd_width"] = hgd_width;
  j["hp_bins"] = hp_bins;
  j["embedding_dim"] = embedding_dim;
  j["num_classes"] = num_classes;
  j["bias"] = bias;
  j["input_height"] = input_height;
  j["input_width"] = input_width;
  j["mode"] = mode_name(mode);
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  ModelConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "channels") c.channels = v.get<std::vector<std::size_t>>();
      else if (key == "spatial_downsample") c.spatial_downsample = v.get<std::vector<bool>>();
      else if (key == "temporal_stride") c.temporal_stride = v.get<std::vector<std::size_t>>();
      else if (key == "dse_stages") c.dse_stages = v.get<std::set<std::size_t>>();
      else if (key == "dta_stages") c.dta_stages = v.get<std::set<std::size_t>>();
      else if (key == "hgd_width") c.hgd_width = v.get<bool>();
      else if (key == "hp_bins") c.hp_bins = v.get<std::size_t>();
      else if (key == "embedding_dim") c.embedding_dim = v.get<std::size_t>();
      else if (key == "num_classes") c.num_classes = v.get<std::size_t>();
      else if (key == "bias") c.bias = v.get<bool>();
      else if (key == "input_height") c.input_height = v.get<std::size_t>();
      else if (key == "input_width") c.input_width = v.get<std::size_t>();
      else if (key == "mode") c.mode = parse_mode(v.get<std::string>());
      else throw ConfigError("model config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

Tensor temporal_pool(const Tensor& features) {
  if (features.rank() != 4) {
    throw DimensionError("temporal_pool: expected C x T x H x W, got " + shape_str(features.shape()));
  }
  const Shape& s = features.shape();
  return reshape(max_pool(features, {{1, s[1], 1, 1}, {}}), {s[0], s[2], s[3]});
}

Tensor horizontal_pool(const Tensor& features, std::size_t bins) {
  if (features.rank() != 3) {
    throw DimensionError("horizontal_pool: expected C x H x W, got " + shape_str(features.shape()));
  }
  const std::size_t c = features.dim(0), h = features.dim(1), w = features.dim(2);
  if (bins == 0 || h % bins != 0) {
    throw ConfigError("horizontal_pool: " + std::to_string(bins) + " bins do not divide height " +
                      std::to_string(h));
  }
  const std::size_t band = (h / bins) * w;
  const double inv = 1.0 / static_cast<double>(band);
  auto x = features.data();
  std::vector<double> out(bins * c);
  std::vector<std::size_t> argmax(bins * c);
  for (std::size_t u = 0; u < bins; ++u)
    for (std::size_t ch = 0; ch < c; ++ch) {
      // Bands are contiguous in memory within a channel.
      const std::size_t base = ch * h * w + u * band;
      double acc = 0.0, best = x[base];
      std::size_t best_i = base;
      for (std::size_t i = base; i < base + band; ++i) {
        acc += x[i];
        if (x[i] > best) {
          best = x[i];
          best_i = i;
        }
      }
      out[u * c + ch] = acc * inv + best;
      argmax[u * c + ch] = best_i;
    }
  return make_op("horizontal_pool", {bins, c}, std::move(out), {features},
                 [argmax = std::move(argmax), bins, c, band, h, w, inv](const BackwardContext& ctx) {
                   auto g = ctx.grad_out();
                   auto gx = ctx.grad_in(0);
                   for (std::size_t u = 0; u < bins; ++u)
                     for (std::size_t ch = 0; ch < c; ++ch) {
                       const double go = g[u * c + ch];
                       const std::size_t base = ch * h * w + u * band;
                       for (std::size_t i = base; i < base + band; ++i) gx[i] += go * inv;
                       gx[argmax[u * c + ch]] += go;
                     }
                 });
}

double retrieval_distance(std::span<const double> a, std::span<const double> b, std::size_t stripes) {
  if (a.size() != b.size() || stripes == 0 || a.size() % stripes != 0) {
    throw DimensionError("retrieval_distance: embeddings of size " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()) + " with " + std::to_string(stripes) +
                         " stripes");
  }
  const std::size_t d = a.size() / stripes;
  double total = 0.0;
  for (std::size_t u = 0; u < stripes; ++u) {
    double sq = 0.0;
    for (std::size_t i = u * d; i < (u + 1) * d; ++i) {
      const double diff = a[i] - b[i];
      sq += diff * diff;
    }
    total += std::sqrt(sq);
  }
  return total;
}

double retrieval_distance(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || a.shape() != b.shape()) {
    throw DimensionError("retrieval_distance: expected matching U x D embeddings, got " +
                         shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  return retrieval_distance(a.data(), b.data(), a.dim(0));
}

HihModel::HihModel(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t n = config_.stage_count();
  initial_ = ConvSpec::make(1, config_.channels[0], {3, 3, 3}, {1, 1, 1}, config_.bias);
  dse_.resize(n);
  dta_.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t in = s == 0 ? config_.channels[0] : config_.channels[s - 1];
    stages_.emplace_back(HgdStageConfig::standard(s + 1, in, config_.channels[s],
                                                  config_.spatial_downsample[s], config_.hgd_width,
                                                  config_.bias));
    if (has_dse(s)) dse_[s] = DseConfig::make(1, config_.bias);
    if (has_dta(s)) dta_[s] = DtaConfig::make(1, config_.temporal_stride[s], config_.bias);
  }
  const std::size_t u = config_.hp_bins, d = config_.embedding_dim, c = config_.channels.back();
  fc_weights_ = Tensor::zeros({u, d, c}, true);
  fc_bias_ = Tensor::zeros({u, d}, true);
  bnneck_ = BatchNorm1d::make(u * d);
  cls_weights_ = Tensor::zeros({u, config_.num_classes, d}, true);
}

bool HihModel::has_dse(std::size_t stage) const {
  return config_.mode == ModelMode::multi_modal && config_.dse_stages.count(stage + 1) > 0;
}

bool HihModel::has_dta(std::size_t stage) const {
  return config_.mode == ModelMode::multi_modal && config_.dta_stages.count(stage + 1) > 0;
}

void HihModel::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::mt19937_64 guidance_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  initial_.init_kaiming(rng);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    stages_[s].init(rng);
    if (has_dse(s)) dse_[s].init(guidance_rng);
    if (has_dta(s)) dta_[s].init(guidance_rng);
  }
  auto fill = [&rng](Tensor& t, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : t.mutable_data()) v = dist(rng);
  };
  fill(fc_weights_, std::sqrt(1.0 / static_cast<double>(config_.channels.back())));
  for (auto& v : fc_bias_.mutable_data()) v = 0.0;
  fill(cls_weights_, std::sqrt(1.0 / static_cast<double>(config_.embedding_dim)));
}

Tensor HihModel::backbone(const Tensor& silhouette, const Tensor& pose,
                          std::vector<Tensor>* stages) const {
  const bool guided = config_.mode == ModelMode::multi_modal;
  if (silhouette.rank() != 4 || silhouette.dim(0) != 1) {
    throw DimensionError("model: silhouettes must be 1 x T x H x W, got " + shape_str(silhouette.shape()));
  }
  if (guided && (!pose.defined() || pose.shape() != silhouette.shape())) {
    throw DimensionError("model: pose heatmaps must match silhouettes " + shape_str(silhouette.shape()));
  }
  Tensor x;
  try {
    x = relu(conv3d(silhouette, initial_));
  } catch (const NumericError& e) {
    throw NumericError(std::string("initial conv: ") + e.what());
  }
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    try {
      const Extent3 here{x.dim(1), x.dim(2), x.dim(3)};
      if (has_dse(s)) x = dse_apply(x, guidance_resample(pose, here), dse_[s]);
      const std::size_t t = config_.temporal_stride[s];
      if (has_dta(s)) {
        x = dta_apply(x, guidance_resample(pose, here), dta_[s]);
      } else if (t > 1) {
        x = max_pool3d(x, {t, 1, 1}, {t, 1, 1});
      }
      x = stages_[s].forward(x);
    } catch (const NumericError& e) {
      throw NumericError("stage " + std::to_string(s + 1) + ": " + e.what());
    }
    if (stages) stages->push_back(x);
  }
  return x;
}

ModelOutput HihModel::forward(std::span<const Tensor> silhouettes, std::span<const Tensor> poses,
                              bool training) {
  const bool guided = config_.mode == ModelMode::multi_modal;
  if (silhouettes.empty()) throw DimensionError("model: empty batch");
  if (guided && poses.size() != silhouettes.size()) {
    throw DimensionError("model: " + std::to_string(silhouettes.size()) + " silhouettes but " +
                         std::to_string(poses.size()) + " pose sequences");
  }
  const std::size_t b = silhouettes.size();
  const std::size_t u = config_.hp_bins, d = config_.embedding_dim;
  std::vector<Tensor> pooled;
  pooled.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    const Tensor none;
    Tensor map = backbone(silhouettes[i], guided ? poses[i] : none);
    pooled.push_back(horizontal_pool(temporal_pool(map), u));
  }
  ModelOutput out;
  try {
    out.embedding = grouped_linear(stack(pooled), fc_weights_, fc_bias_);
    Tensor flat = batch_norm_1d(reshape(out.embedding, {b, u * d}), bnneck_, training);
    out.bn_embedding = reshape(flat, {b, u, d});
    out.logits = grouped_linear(out.bn_embedding, cls_weights_, Tensor());
  } catch (const NumericError& e) {
    throw NumericError(std::string("head: ") + e.what());
  }
  return out;
}

ParameterList HihModel::parameters() const {
  ParameterList out;
  append_parameters(out, "initial", initial_);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const std::string prefix = "stage" + std::to_string(s + 1);
    stages_[s].append_parameters(out, prefix);
    if (has_dse(s)) append_parameters(out, prefix + ".dse", dse_[s].conv);
    if (has_dta(s)) append_parameters(out, prefix + ".dta", dta_[s].conv);
  }
  out.push_back({"head.fc.weight", fc_weights_});
  out.push_back({"head.fc.bias", fc_bias_});
  out.push_back({"head.bn.gamma", bnneck_.gamma});
  out.push_back({"head.bn.beta", bnneck_.beta});
  out.push_back({"head.classifier.weight", cls_weights_});
  return out;
}

ParameterList HihModel::buffers() const {
  const std::size_t n = bnneck_.features;
  return {{"head.bn.running_mean", Tensor::from_data({n}, bnneck_.running_mean)},
          {"head.bn.running_var", Tensor::from_data({n}, bnneck_.running_var)}};
}

void HihModel::load_buffers(const ParameterList& buffers) {
  for (const auto& [name, t] : buffers) {
    std::vector<double>* dst = nullptr;
    if (name == "head.bn.running_mean") dst = &bnneck_.running_mean;
    else if (name == "head.bn.running_var") dst = &bnneck_.running_var;
    else throw ConfigError("unknown model buffer '" + name + "'");
    if (t.numel() != dst->size()) {
      throw DimensionError("buffer '" + name + "' has " + std::to_string(t.numel()) +
                           " values, expected " + std::to_string(dst->size()));
    }
    dst->assign(t.data().begin(), t.data().end());
  }
}

std::size_t HihModel::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : parameters()) total += p.tensor.numel();
  return total;
}

}  // namespace hih
