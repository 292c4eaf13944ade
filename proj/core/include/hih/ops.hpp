#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hih/tensor.hpp"

namespace hih {

// ---------------------------------------------------------------------------
// Elementwise and reductions
// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_n(std::span<const Tensor> terms);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor square(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

enum class Activation { relu, tanh, leaky_relu };

// relu'(0) is 0. leaky_relu uses slope 0.01 on the negative side.
Tensor activation(const Tensor& input, Activation kind);
inline Tensor relu(const Tensor& x) { return activation(x, Activation::relu); }
inline Tensor tanh(const Tensor& x) { return activation(x, Activation::tanh); }
inline Tensor leaky_relu(const Tensor& x) { return activation(x, Activation::leaky_relu); }

// ---------------------------------------------------------------------------
// Shape manipulation
// ---------------------------------------------------------------------------

Tensor reshape(const Tensor& input, Shape shape);
// Contiguous slice [start, start + length) along `axis`.
Tensor narrow(const Tensor& input, std::size_t axis, std::size_t start, std::size_t length);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
// Stacks equally shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor> parts);

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

struct Extent3 {
  std::size_t t = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  bool operator==(const Extent3&) const = default;
};

/// Geometry and parameters of a 3-D cross-correlation over C x T x H x W
/// inputs. Weights are laid out out_channels x in_channels x kt x kh x kw.
/// An undefined bias means the layer has none.
struct ConvSpec {
  Extent3 kernel;
  Extent3 stride;
  Extent3 padding{0, 0, 0};
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  Tensor weights;
  Tensor bias;

  // Zero-initialized parameters that require gradients.
  static ConvSpec make(std::size_t in_channels, std::size_t out_channels, Extent3 kernel,
                       Extent3 padding, bool with_bias = true, Extent3 stride = {});

  // floor((n + 2p - k) / s) + 1 per axis.
  Extent3 output_extent(Extent3 input) const;
  std::size_t parameter_count() const;
  void validate() const;

  // Fills weights from N(0, gain^2 / fan_in) and zeroes the bias.
  void init_kaiming(std::mt19937_64& rng, double gain = 1.4142135623730951);
  // Center tap 1 on the (o, o) diagonal, zero elsewhere. Requires odd kernels.
  void set_dirac();
};

Tensor conv3d(const Tensor& input, const ConvSpec& spec);

// ---------------------------------------------------------------------------
// Pooling
// ---------------------------------------------------------------------------

/// Per-axis window. Missing kernel entries are 1; missing stride entries
/// equal the kernel.
struct PoolWindow {
  std::vector<std::size_t> kernel;
  std::vector<std::size_t> stride;
};

// Windowed max with floor division for the output length. The gradient goes
// to the first maximal element of each window.
Tensor max_pool(const Tensor& input, const PoolWindow& window);
Tensor avg_pool(const Tensor& input, const PoolWindow& window);

// Convenience for C x T x H x W maps.
Tensor max_pool3d(const Tensor& input, Extent3 kernel, Extent3 stride);
Tensor avg_pool3d(const Tensor& input, Extent3 kernel, Extent3 stride);

// ---------------------------------------------------------------------------
// Dense layers
// ---------------------------------------------------------------------------

// y = x W^T + b over the last axis. weights: D_out x D_in; bias optional.
Tensor linear(const Tensor& input, const Tensor& weights, const Tensor& bias);

// Independent affine maps per group: input [... x G x D_in], weights
// G x D_out x D_in, bias G x D_out (optional) -> [... x G x D_out].
Tensor grouped_linear(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct BatchNorm1d {
  std::size_t features = 0;
  Tensor gamma;
  Tensor beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  static BatchNorm1d make(std::size_t features);
};

// Per-feature standardization of a B x D batch. The variance is floored at
// eps rather than offset by it, so already-standardized columns pass through
// unchanged and constant columns map to beta. Training mode requires B >= 2
// and updates the running statistics (unbiased variance).
Tensor batch_norm_1d(const Tensor& input, BatchNorm1d& state, bool training);

}  // namespace hih

namespace hih {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};
using ParameterList = std::vector<NamedTensor>;

// Appends "<prefix>.weight" and, when present, "<prefix>.bias".
void append_parameters(ParameterList& out, const std::string& prefix, const ConvSpec& conv);

}  // namespace hih
