#include <algorithm>
#include <cmath>
#include <string>

#include "hih/errors.hpp"
#include "hih/ops.hpp"

namespace hih {

Tensor linear(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (input.rank() < 1 || weights.rank() != 2) {
    throw DimensionError("linear: expected [... x D_in] input and D_out x D_in weights");
  }
  const std::size_t din = input.shape().back();
  const std::size_t dout = weights.dim(0);
  if (weights.dim(1) != din) {
    throw DimensionError("linear: inner dimension " + std::to_string(din) + " vs weights " +
                         shape_str(weights.shape()));
  }
  if (bias.defined() && bias.shape() != Shape{dout}) {
    throw DimensionError("linear: bias " + shape_str(bias.shape()));
  }
  const std::size_t rows = input.numel() / din;
  auto x = input.data();
  auto w = weights.data();
  std::vector<double> out(rows * dout);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < dout; ++o) {
      double acc = bias.defined() ? bias.data()[o] : 0.0;
      for (std::size_t i = 0; i < din; ++i) acc += x[r * din + i] * w[o * din + i];
      out[r * dout + o] = acc;
    }
  }
  Shape out_shape = input.shape();
  out_shape.back() = dout;
  std::vector<Tensor> inputs{input, weights};
  if (bias.defined()) inputs.push_back(bias);
  const bool has_bias = bias.defined();
  return make_op("linear", std::move(out_shape), std::move(out), std::move(inputs),
                 [input, weights, rows, din, dout, has_bias](const BackwardContext& ctx) {
                   auto g = ctx.grad_out();
                   auto x = input.data();
                   auto w = weights.data();
                   if (ctx.needs(0)) {
                     auto gx = ctx.grad_in(0);
                     for (std::size_t r = 0; r < rows; ++r)
                       for (std::size_t o = 0; o < dout; ++o) {
                         const double go = g[r * dout + o];
                         for (std::size_t i = 0; i < din; ++i) gx[r * din + i] += go * w[o * din + i];
                       }
                   }
                   if (ctx.needs(1)) {
                     auto gw = ctx.grad_in(1);
                     for (std::size_t r = 0; r < rows; ++r)
                       for (std::size_t o = 0; o < dout; ++o) {
                         const double go = g[r * dout + o];
                         for (std::size_t i = 0; i < din; ++i) gw[o * din + i] += go * x[r * din + i];
                       }
                   }
                   if (has_bias && ctx.needs(2)) {
                     auto gb = ctx.grad_in(2);
                     for (std::size_t r = 0; r < rows; ++r)
                       for (std::size_t o = 0; o < dout; ++o) gb[o] += g[r * dout + o];
                   }
                 });
}

Tensor grouped_linear(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (input.rank() < 2 || weights.rank() != 3) {
    throw DimensionError("grouped_linear: expected [... x G x D_in] input and G x D_out x D_in weights");
  }
  const std::size_t groups = weights.dim(0);
  const std::size_t dout = weights.dim(1);
  const std::size_t din = weights.dim(2);
  const Shape& s = input.shape();
  if (s[s.size() - 1] != din || s[s.size() - 2] != groups) {
    throw DimensionError("grouped_linear: input " + shape_str(s) + " incompatible with weights " +
                         shape_str(weights.shape()));
  }
  if (bias.defined() && bias.shape() != Shape{groups, dout}) {
    throw DimensionError("grouped_linear: bias " + shape_str(bias.shape()));
  }
  const std::size_t batch = input.numel() / (groups * din);
  auto x = input.data();
  auto w = weights.data();
  std::vector<double> out(batch * groups * dout);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t gi = 0; gi < groups; ++gi) {
      const double* xr = x.data() + (b * groups + gi) * din;
      for (std::size_t o = 0; o < dout; ++o) {
        const double* wr = w.data() + (gi * dout + o) * din;
        double acc = bias.defined() ? bias.data()[gi * dout + o] : 0.0;
        for (std::size_t i = 0; i < din; ++i) acc += xr[i] * wr[i];
        out[(b * groups + gi) * dout + o] = acc;
      }
    }
  Shape out_shape = s;
  out_shape.back() = dout;
  std::vector<Tensor> inputs{input, weights};
  if (bias.defined()) inputs.push_back(bias);
  const bool has_bias = bias.defined();
  return make_op(
      "grouped_linear", std::move(out_shape), std::move(out), std::move(inputs),
      [input, weights, batch, groups, din, dout, has_bias](const BackwardContext& ctx) {
        auto g = ctx.grad_out();
        auto x = input.data();
        auto w = weights.data();
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t gi = 0; gi < groups; ++gi) {
            const std::size_t row = b * groups + gi;
            for (std::size_t o = 0; o < dout; ++o) {
              const double go = g[row * dout + o];
              if (ctx.needs(0)) {
                auto gx = ctx.grad_in(0);
                for (std::size_t i = 0; i < din; ++i) gx[row * din + i] += go * w[(gi * dout + o) * din + i];
              }
              if (ctx.needs(1)) {
                auto gw = ctx.grad_in(1);
                for (std::size_t i = 0; i < din; ++i) gw[(gi * dout + o) * din + i] += go * x[row * din + i];
              }
              if (has_bias && ctx.needs(2)) ctx.grad_in(2)[gi * dout + o] += go;
            }
          }
      });
}

BatchNorm1d BatchNorm1d::make(std::size_t features) {
  BatchNorm1d bn;
  bn.features = features;
  bn.gamma = Tensor::full({features}, 1.0, true);
  bn.beta = Tensor::zeros({features}, true);
  bn.running_mean.assign(features, 0.0);
  bn.running_var.assign(features, 1.0);
  return bn;
}

Tensor batch_norm_1d(const Tensor& input, BatchNorm1d& state, bool training) {
  if (input.rank() != 2 || input.dim(1) != state.features) {
    throw DimensionError("batch_norm_1d: input " + shape_str(input.shape()) + " expected B x " +
                         std::to_string(state.features));
  }
  const std::size_t rows = input.dim(0);
  const std::size_t cols = state.features;
  if (training && rows < 2) throw DimensionError("batch_norm_1d: training needs B >= 2");
  auto x = input.data();
  auto gamma = state.gamma.data();
  auto beta = state.beta.data();

  std::vector<double> mu(cols), sigma(cols);
  std::vector<bool> floored(cols, false);
  for (std::size_t c = 0; c < cols; ++c) {
    double m, v;
    if (training) {
      m = 0.0;
      for (std::size_t r = 0; r < rows; ++r) m += x[r * cols + c];
      m /= static_cast<double>(rows);
      v = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        const double d = x[r * cols + c] - m;
        v += d * d;
      }
      v /= static_cast<double>(rows);
      const double unbiased = v * static_cast<double>(rows) / static_cast<double>(rows - 1);
      state.running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * m;
      state.running_var[c] = (1.0 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
    } else {
      m = state.running_mean[c];
      v = state.running_var[c];
    }
    floored[c] = v < state.eps;
    mu[c] = m;
    sigma[c] = std::sqrt(std::max(v, state.eps));
  }

  std::vector<double> out(rows * cols);
  std::vector<double> xhat(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double h = (x[r * cols + c] - mu[c]) / sigma[c];
      xhat[r * cols + c] = h;
      out[r * cols + c] = gamma[c] * h + beta[c];
    }

  Tensor g_t = state.gamma;
  return make_op(
      "batch_norm_1d", input.shape(), std::move(out), {input, state.gamma, state.beta},
      [rows, cols, training, sigma, floored, xhat = std::move(xhat), g_t](const BackwardContext& ctx) {
        auto g = ctx.grad_out();
        auto gamma = g_t.data();
        const double n = static_cast<double>(rows);
        for (std::size_t c = 0; c < cols; ++c) {
          double sum_g = 0.0, sum_gx = 0.0;
          for (std::size_t r = 0; r < rows; ++r) {
            sum_g += g[r * cols + c];
            sum_gx += g[r * cols + c] * xhat[r * cols + c];
          }
          if (ctx.needs(1)) ctx.grad_in(1)[c] += sum_gx;
          if (ctx.needs(2)) ctx.grad_in(2)[c] += sum_g;
          if (!ctx.needs(0)) continue;
          auto gx = ctx.grad_in(0);
          const double k = gamma[c] / sigma[c];
          for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t i = r * cols + c;
            if (!training) {
              gx[i] += k * g[i];
            } else if (floored[c]) {
              // Constant sigma: only the mean depends on x.
              gx[i] += k * (g[i] - sum_g / n);
            } else {
              gx[i] += k * (g[i] - sum_g / n - xhat[i] * sum_gx / n);
            }
          }
        }
      });
}

}  // namespace hih
