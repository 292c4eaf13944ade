#include <array>
#include <string>

#include "hih/errors.hpp"
#include "hih/ops.hpp"
#include "hih/parallel.hpp"

namespace hih {

namespace {

constexpr std::size_t kMaxPoolRank = 4;

struct PoolGeom {
  std::array<std::size_t, kMaxPoolRank> in{1, 1, 1, 1};
  std::array<std::size_t, kMaxPoolRank> out{1, 1, 1, 1};
  std::array<std::size_t, kMaxPoolRank> k{1, 1, 1, 1};
  std::array<std::size_t, kMaxPoolRank> s{1, 1, 1, 1};
  Shape out_shape;
};

PoolGeom pool_geometry(const Tensor& input, const PoolWindow& window, const char* op) {
  const std::size_t rank = input.rank();
  if (rank == 0 || rank > kMaxPoolRank) {
    throw DimensionError(std::string(op) + ": rank " + std::to_string(rank) + " unsupported");
  }
  if (window.kernel.size() > rank || window.stride.size() > rank) {
    throw DimensionError(std::string(op) + ": window has more axes than input " +
                         shape_str(input.shape()));
  }
  PoolGeom g;
  const std::size_t lead = kMaxPoolRank - rank;
  for (std::size_t a = 0; a < rank; ++a) {
    const std::size_t kernel = a < window.kernel.size() ? window.kernel[a] : 1;
    const std::size_t stride = a < window.stride.size() ? window.stride[a] : kernel;
    if (kernel == 0 || stride == 0) {
      throw ConfigError(std::string(op) + ": zero kernel or stride on axis " + std::to_string(a));
    }
    const std::size_t n = input.dim(a);
    if (kernel > n) {
      throw DimensionError(std::string(op) + ": kernel " + std::to_string(kernel) +
                           " exceeds axis " + std::to_string(a) + " length " + std::to_string(n));
    }
    g.in[lead + a] = n;
    g.k[lead + a] = kernel;
    g.s[lead + a] = stride;
    g.out[lead + a] = (n - kernel) / stride + 1;
    g.out_shape.push_back(g.out[lead + a]);
  }
  return g;
}

}  // namespace

Tensor max_pool(const Tensor& input, const PoolWindow& window) {
  const PoolGeom g = pool_geometry(input, window, "max_pool");
  auto x = input.data();
  const std::size_t n_out = g.out[0] * g.out[1] * g.out[2] * g.out[3];
  std::vector<double> out(n_out);
  std::vector<std::size_t> argmax(n_out);
  const long jobs = static_cast<long>(g.out[0] * g.out[1]);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long job = 0; job < jobs; ++job) {
    const std::size_t o0 = static_cast<std::size_t>(job) / g.out[1];
    const std::size_t o1 = static_cast<std::size_t>(job) % g.out[1];
    for (std::size_t o2 = 0; o2 < g.out[2]; ++o2) {
      for (std::size_t o3 = 0; o3 < g.out[3]; ++o3) {
        double best = 0.0;
        std::size_t best_idx = 0;
        bool first = true;
        // Lexicographic window scan with strict comparison: ties keep the
        // first index.
        for (std::size_t a = 0; a < g.k[0]; ++a) {
          for (std::size_t b = 0; b < g.k[1]; ++b) {
            for (std::size_t c = 0; c < g.k[2]; ++c) {
              const std::size_t i0 = o0 * g.s[0] + a;
              const std::size_t i1 = o1 * g.s[1] + b;
              const std::size_t i2 = o2 * g.s[2] + c;
              const std::size_t base = ((i0 * g.in[1] + i1) * g.in[2] + i2) * g.in[3] + o3 * g.s[3];
              for (std::size_t d = 0; d < g.k[3]; ++d) {
                const double v = x[base + d];
                if (first || v > best) {
                  best = v;
                  best_idx = base + d;
                  first = false;
                }
              }
            }
          }
        }
        const std::size_t oi = ((o0 * g.out[1] + o1) * g.out[2] + o2) * g.out[3] + o3;
        out[oi] = best;
        argmax[oi] = best_idx;
      }
    }
  }
  return make_op("max_pool", g.out_shape, std::move(out), {input},
                 [argmax = std::move(argmax)](const BackwardContext& ctx) {
                   auto gout = ctx.grad_out();
                   auto gin = ctx.grad_in(0);
                   for (std::size_t i = 0; i < gout.size(); ++i) gin[argmax[i]] += gout[i];
                 });
}

Tensor avg_pool(const Tensor& input, const PoolWindow& window) {
  const PoolGeom g = pool_geometry(input, window, "avg_pool");
  auto x = input.data();
  const std::size_t n_out = g.out[0] * g.out[1] * g.out[2] * g.out[3];
  const double inv = 1.0 / static_cast<double>(g.k[0] * g.k[1] * g.k[2] * g.k[3]);
  std::vector<double> out(n_out);
  auto for_window = [g](std::size_t oi, auto&& fn) {
    std::size_t rem = oi;
    const std::size_t o3 = rem % g.out[3];
    rem /= g.out[3];
    const std::size_t o2 = rem % g.out[2];
    rem /= g.out[2];
    const std::size_t o1 = rem % g.out[1];
    const std::size_t o0 = rem / g.out[1];
    for (std::size_t a = 0; a < g.k[0]; ++a)
      for (std::size_t b = 0; b < g.k[1]; ++b)
        for (std::size_t c = 0; c < g.k[2]; ++c) {
          const std::size_t base = (((o0 * g.s[0] + a) * g.in[1] + o1 * g.s[1] + b) * g.in[2] +
                                    o2 * g.s[2] + c) * g.in[3] + o3 * g.s[3];
          for (std::size_t d = 0; d < g.k[3]; ++d) fn(base + d);
        }
  };
  for (std::size_t oi = 0; oi < n_out; ++oi) {
    double acc = 0.0;
    for_window(oi, [&](std::size_t i) { acc += x[i]; });
    out[oi] = acc * inv;
  }
  return make_op("avg_pool", g.out_shape, std::move(out), {input},
                 [for_window, inv, n_out](const BackwardContext& ctx) {
                   auto gout = ctx.grad_out();
                   auto gin = ctx.grad_in(0);
                   for (std::size_t oi = 0; oi < n_out; ++oi) {
                     const double v = gout[oi] * inv;
                     for_window(oi, [&](std::size_t i) { gin[i] += v; });
                   }
                 });
}

Tensor max_pool3d(const Tensor& input, Extent3 kernel, Extent3 stride) {
  if (input.rank() != 4) {
    throw DimensionError("max_pool3d: expected C x T x H x W, got " + shape_str(input.shape()));
  }
  return max_pool(input, {{1, kernel.t, kernel.h, kernel.w}, {1, stride.t, stride.h, stride.w}});
}

Tensor avg_pool3d(const Tensor& input, Extent3 kernel, Extent3 stride) {
  if (input.rank() != 4) {
    throw DimensionError("avg_pool3d: expected C x T x H x W, got " + shape_str(input.shape()));
  }
  return avg_pool(input, {{1, kernel.t, kernel.h, kernel.w}, {1, stride.t, stride.h, stride.w}});
}

}  // namespace hih
