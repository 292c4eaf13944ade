#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hih/guidance.hpp"
#include "hih/hgd.hpp"
#include "hih/ops.hpp"
#include "hih/tensor.hpp"

namespace hih {

enum class ModelMode { silhouette_only, multi_modal };  // HiH-S, HiH-M

std::string mode_name(ModelMode mode);
ModelMode parse_mode(const std::string& name);

struct ModelConfig {
  // Output channels of stages 1..n (n in [1, 4]); the initial conv maps the
  // silhouette to channels[0].
  std::vector<std::size_t> channels{64, 128, 256, 256};
  std::vector<bool> spatial_downsample{false, true, true, false};
  // Temporal pooling factor applied to each stage's input. In HiH-M a stage
  // hosting DTA realizes it through DTA; otherwise it is a plain max-pool.
  std::vector<std::size_t> temporal_stride{1, 1, 3, 1};
  // 1-based stage indices whose input is wrapped by DSE / DTA.
  std::set<std::size_t> dse_stages{1};
  std::set<std::size_t> dta_stages{3};
  bool hgd_width = true;
  std::size_t hp_bins = 16;
  std::size_t embedding_dim = 256;
  std::size_t num_classes = 2;
  bool bias = true;
  std::size_t input_height = 64;
  std::size_t input_width = 44;
  ModelMode mode = ModelMode::multi_modal;

  // (64,128,256,256), downsampling at stages 2-3.
  static ModelConfig outdoor(std::size_t num_classes);
  // (64,64,128,256), full resolution throughout.
  static ModelConfig indoor(std::size_t num_classes);

  std::size_t stage_count() const { return channels.size(); }
  // Throws ConfigError describing the first inconsistency.
  void validate() const;

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

struct ModelOutput {
  Tensor embedding;     // B x U x D, triplet / retrieval space
  Tensor bn_embedding;  // B x U x D, after BNNeck
  Tensor logits;        // B x U x N
};

// Max over frames: C x T x H x W -> C x H x W.
Tensor temporal_pool(const Tensor& features);
// Mean plus max over each of `bins` horizontal bands: C x H x W -> U x C.
Tensor horizontal_pool(const Tensor& features, std::size_t bins);

// Sum over stripes of the euclidean distance, on U x D embeddings.
double retrieval_distance(std::span<const double> a, std::span<const double> b,
                          std::size_t stripes);
double retrieval_distance(const Tensor& a, const Tensor& b);

class HihModel {
 public:
  explicit HihModel(ModelConfig config);

  // Kaiming init for backbone and head, small offsets for guidance. Guidance
  // draws from its own stream, so HiH-S and HiH-M share backbone weights.
  void init(std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ModelConfig& mutable_config() { return config_; }

  // Backbone for one sequence: silhouettes 1 x T x H x W, pose heatmaps of
  // the same shape (ignored in HiH-S). Returns the final C x T' x H' x W'
  // map; when `stages` is given it receives every stage output.
  Tensor backbone(const Tensor& silhouette, const Tensor& pose,
                  std::vector<Tensor>* stages = nullptr) const;

  // Full network over a batch. `training` selects batch statistics in the
  // BNNeck and updates its running averages.
  ModelOutput forward(std::span<const Tensor> silhouettes, std::span<const Tensor> poses,
                      bool training);

  ParameterList parameters() const;
  // Non-trainable state saved alongside parameters (BN running statistics).
  ParameterList buffers() const;
  void load_buffers(const ParameterList& buffers);
  std::size_t parameter_count() const;

  const ConvSpec& initial_conv() const { return initial_; }
  ConvSpec& initial_conv() { return initial_; }
  std::vector<HgdStage>& stages() { return stages_; }
  const std::vector<HgdStage>& stages() const { return stages_; }
  // Guidance modules; default-constructed for stages without them.
  std::vector<DseConfig>& dse() { return dse_; }
  std::vector<DtaConfig>& dta() { return dta_; }
  // Whether 0-based `stage` is wrapped by DSE / DTA. Always false in HiH-S.
  bool has_dse(std::size_t stage) const;
  bool has_dta(std::size_t stage) const;
  Tensor& fc_weights() { return fc_weights_; }
  Tensor& fc_bias() { return fc_bias_; }
  BatchNorm1d& bnneck() { return bnneck_; }
  Tensor& classifier_weights() { return cls_weights_; }

 private:
  ModelConfig config_;
  ConvSpec initial_;
  std::vector<HgdStage> stages_;
  std::vector<DseConfig> dse_;
  std::vector<DtaConfig> dta_;
  Tensor fc_weights_;  // U x D x C
  Tensor fc_bias_;     // U x D
  BatchNorm1d bnneck_; // over U * D features
  Tensor cls_weights_; // U x N x D, no bias
};

}  // namespace hih
