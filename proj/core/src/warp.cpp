#include "hih/warp.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "hih/errors.hpp"
#include "hih/parallel.hpp"

namespace hih {

namespace {

// Per output pixel: the corner cells it reads, their weights, and the
// fractional parts needed for the offset derivative.
template <int kCorners>
struct SamplePlan {
  std::vector<long> index;    // P x kCorners, -1 when outside
  std::vector<double> weight; // P x kCorners
  std::vector<double> frac;   // P x 3 (lx, ly, lz)
};

template <bool kTemporal>
Tensor warp_impl(const Tensor& input, const Tensor& offsets, const char* name) {
  constexpr int kCorners = kTemporal ? 8 : 4;
  constexpr std::size_t kAxes = kTemporal ? 3 : 2;
  if (input.rank() != 4) {
    throw DimensionError(std::string(name) + ": input must be C x T x H x W, got " +
                         shape_str(input.shape()));
  }
  const std::size_t C = input.dim(0), T = input.dim(1), H = input.dim(2), W = input.dim(3);
  bool per_frame = true;
  if (offsets.rank() == 4 && offsets.shape() == Shape{kAxes, T, H, W}) {
    per_frame = true;
  } else if (!kTemporal && offsets.rank() == 3 && offsets.shape() == Shape{kAxes, H, W}) {
    per_frame = false;
  } else {
    throw DimensionError(std::string(name) + ": offsets " + shape_str(offsets.shape()) +
                         " incompatible with input " + shape_str(input.shape()));
  }
  const std::size_t P = T * H * W;
  const std::size_t plane = H * W;
  const std::size_t off_plane = per_frame ? P : plane;
  auto off = offsets.data();

  SamplePlan<kCorners> plan;
  plan.index.assign(P * kCorners, -1);
  plan.weight.assign(P * kCorners, 0.0);
  plan.frac.assign(P * 3, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t y = 0; y < H; ++y) {
      for (std::size_t x = 0; x < W; ++x) {
        const std::size_t p = (t * H + y) * W + x;
        const std::size_t op = per_frame ? p : y * W + x;
        const double px = static_cast<double>(x) + off[op];
        const double py = static_cast<double>(y) + off[off_plane + op];
        const double pz = kTemporal ? static_cast<double>(t) + off[2 * off_plane + op]
                                    : static_cast<double>(t);
        const double fx = std::floor(px), fy = std::floor(py), fz = std::floor(pz);
        const double lx = px - fx, ly = py - fy, lz = pz - fz;
        plan.frac[p * 3 + 0] = lx;
        plan.frac[p * 3 + 1] = ly;
        plan.frac[p * 3 + 2] = lz;
        for (int k = 0; k < kCorners; ++k) {
          const int cx = k & 1, cy = (k >> 1) & 1, cz = (k >> 2) & 1;
          const double xi = fx + cx, yi = fy + cy, zi = fz + cz;
          const double w = (cx ? lx : 1.0 - lx) * (cy ? ly : 1.0 - ly) *
                           (kTemporal ? (cz ? lz : 1.0 - lz) : 1.0);
          plan.weight[p * kCorners + k] = w;
          if (xi < 0 || yi < 0 || zi < 0 || xi >= static_cast<double>(W) ||
              yi >= static_cast<double>(H) || zi >= static_cast<double>(T)) {
            continue;
          }
          plan.index[p * kCorners + k] =
              static_cast<long>((static_cast<std::size_t>(zi) * H + static_cast<std::size_t>(yi)) * W +
                                static_cast<std::size_t>(xi));
        }
      }
    }
  }

  auto x = input.data();
  std::vector<double> out(C * P, 0.0);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long c = 0; c < static_cast<long>(C); ++c) {
    const double* src = x.data() + static_cast<std::size_t>(c) * P;
    double* dst = out.data() + static_cast<std::size_t>(c) * P;
    for (std::size_t p = 0; p < P; ++p) {
      double acc = 0.0;
      for (int k = 0; k < kCorners; ++k) {
        const long i = plan.index[p * kCorners + k];
        if (i >= 0) acc += plan.weight[p * kCorners + k] * src[i];
      }
      dst[p] = acc;
    }
  }

  return make_op(
      name, input.shape(), std::move(out), {input, offsets},
      [input, plan = std::move(plan), C, T, H, W, P, plane, off_plane,
       per_frame](const BackwardContext& ctx) {
        auto g = ctx.grad_out();
        if (ctx.needs(0)) {
          auto gin = ctx.grad_in(0);
#pragma omp parallel for schedule(static) num_threads(thread_count())
          for (long c = 0; c < static_cast<long>(C); ++c) {
            double* dst = gin.data() + static_cast<std::size_t>(c) * P;
            const double* go = g.data() + static_cast<std::size_t>(c) * P;
            for (std::size_t p = 0; p < P; ++p) {
              for (int k = 0; k < kCorners; ++k) {
                const long i = plan.index[p * kCorners + k];
                if (i >= 0) dst[i] += plan.weight[p * kCorners + k] * go[p];
              }
            }
          }
        }
        if (ctx.needs(1)) {
          auto goff = ctx.grad_in(1);
          auto x = input.data();
          const std::size_t frames = per_frame ? 1 : T;
#pragma omp parallel for schedule(static) num_threads(thread_count())
          for (long q = 0; q < static_cast<long>(off_plane); ++q) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (std::size_t f = 0; f < frames; ++f) {
              const std::size_t p = per_frame ? static_cast<std::size_t>(q)
                                              : f * plane + static_cast<std::size_t>(q);
              const double lx = plan.frac[p * 3], ly = plan.frac[p * 3 + 1], lz = plan.frac[p * 3 + 2];
              for (int k = 0; k < kCorners; ++k) {
                const long i = plan.index[p * kCorners + k];
                if (i < 0) continue;
                const int cx = k & 1, cy = (k >> 1) & 1, cz = (k >> 2) & 1;
                const double wx = cx ? lx : 1.0 - lx, wy = cy ? ly : 1.0 - ly;
                const double wz = kTemporal ? (cz ? lz : 1.0 - lz) : 1.0;
                const double sx = cx ? 1.0 : -1.0, sy = cy ? 1.0 : -1.0, sz = cz ? 1.0 : -1.0;
                double gv = 0.0;
                for (std::size_t c = 0; c < C; ++c) gv += g[c * P + p] * x[c * P + static_cast<std::size_t>(i)];
                acc[0] += gv * sx * wy * wz;
                acc[1] += gv * sy * wx * wz;
                if (kTemporal) acc[2] += gv * sz * wx * wy;
              }
            }
            goff[static_cast<std::size_t>(q)] += acc[0];
            goff[off_plane + static_cast<std::size_t>(q)] += acc[1];
            if (kTemporal) goff[2 * off_plane + static_cast<std::size_t>(q)] += acc[2];
          }
        }
      });
}

}  // namespace

Tensor bilinear_warp(const Tensor& input, const Tensor& offsets) {
  return warp_impl<false>(input, offsets, "bilinear_warp");
}

Tensor trilinear_warp(const Tensor& input, const Tensor& offsets) {
  return warp_impl<true>(input, offsets, "trilinear_warp");
}

}  // namespace hih
