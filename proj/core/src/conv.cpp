#include <algorithm>
#include <cmath>
#include <string>

#include "hih/errors.hpp"
#include "hih/ops.hpp"
#include "hih/parallel.hpp"

namespace hih {

namespace {

std::size_t out_len(std::size_t n, std::size_t k, std::size_t s, std::size_t p, const char* axis) {
  if (n + 2 * p < k) {
    throw DimensionError(std::string("conv3d: padded ") + axis + " extent " +
                         std::to_string(n + 2 * p) + " smaller than kernel " + std::to_string(k));
  }
  return (n + 2 * p - k) / s + 1;
}

// Range of output columns whose input column o*s - p + k lies in [0, n).
struct ColRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

ColRange valid_cols(std::size_t out_w, std::size_t in_w, std::size_t s, std::size_t p,
                    std::size_t k) {
  // Need o*s + k >= p and o*s + k - p < in_w.
  ColRange r;
  const long lo_num = static_cast<long>(p) - static_cast<long>(k);
  r.begin = lo_num <= 0 ? 0 : static_cast<std::size_t>((lo_num + static_cast<long>(s) - 1) / static_cast<long>(s));
  const long hi_num = static_cast<long>(in_w) + static_cast<long>(p) - static_cast<long>(k);
  if (hi_num <= 0) {
    r.end = 0;
  } else {
    r.end = std::min(out_w, static_cast<std::size_t>((hi_num + static_cast<long>(s) - 1) / static_cast<long>(s)));
  }
  if (r.end < r.begin) r.end = r.begin;
  return r;
}

struct ConvGeom {
  std::size_t ci, co, t, h, w, to, ho, wo;
  Extent3 k, s, p;
};

// Eight independent partial sums so the loop vectorizes without
// reassociation flags; the summation order is fixed, hence deterministic.
double dot(const double* a, const double* b, std::size_t n) {
  double lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t j = 0; j < 8; ++j) lane[j] += a[i + j] * b[i + j];
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((lane[0] + lane[4]) + (lane[1] + lane[5])) + ((lane[2] + lane[6]) + (lane[3] + lane[7])) + tail;
}

// acc[f] += sum_j w[j] * src[j][f], fusing up to eight taps per sweep so
// the accumulator is loaded and stored once per group.
void accumulate_taps(double* __restrict acc, std::size_t n, const double* const* src,
                     const double* w, std::size_t taps) {
  std::size_t j = 0;
  for (; j + 8 <= taps; j += 8) {
    const double *s0 = src[j], *s1 = src[j + 1], *s2 = src[j + 2], *s3 = src[j + 3];
    const double *s4 = src[j + 4], *s5 = src[j + 5], *s6 = src[j + 6], *s7 = src[j + 7];
    const double w0 = w[j], w1 = w[j + 1], w2 = w[j + 2], w3 = w[j + 3];
    const double w4 = w[j + 4], w5 = w[j + 5], w6 = w[j + 6], w7 = w[j + 7];
    for (std::size_t f = 0; f < n; ++f)
      acc[f] += ((w0 * s0[f] + w1 * s1[f]) + (w2 * s2[f] + w3 * s3[f])) +
                ((w4 * s4[f] + w5 * s5[f]) + (w6 * s6[f] + w7 * s7[f]));
  }
  for (; j + 4 <= taps; j += 4) {
    const double *s0 = src[j], *s1 = src[j + 1], *s2 = src[j + 2], *s3 = src[j + 3];
    const double w0 = w[j], w1 = w[j + 1], w2 = w[j + 2], w3 = w[j + 3];
    for (std::size_t f = 0; f < n; ++f) acc[f] += (w0 * s0[f] + w1 * s1[f]) + (w2 * s2[f] + w3 * s3[f]);
  }
  for (; j < taps; ++j) {
    const double* s0 = src[j];
    const double w0 = w[j];
    for (std::size_t f = 0; f < n; ++f) acc[f] += w0 * s0[f];
  }
}

// Stride-1 spatial path. Every input plane is copied once into a
// zero-bordered buffer of row width wp = W + 2 pw, so one kernel tap becomes
// a flat multiply-add over ho x wp positions. Columns at or beyond wo in that
// layout are scratch and get dropped.
struct Padded {
  std::size_t hp = 0, wp = 0;
  std::size_t plane = 0;  // hp * wp plus slack for the last tap's overrun
  std::size_t span = 0;   // ho * wp
  // Output-gradient planes carry `lead` zeros in front and enough behind
  // that the input gradient can be gathered at every padded position.
  std::size_t lead = 0, gplane = 0;
};

Padded padded_layout(const ConvGeom& g) {
  Padded l;
  l.hp = g.h + 2 * g.p.h;
  l.wp = g.w + 2 * g.p.w;
  l.plane = l.hp * l.wp + g.k.w;
  l.span = g.ho * l.wp;
  l.lead = (g.k.h - 1) * l.wp + (g.k.w - 1);
  l.gplane = l.lead + l.span + (g.k.h - 1) * l.wp + g.k.w;
  return l;
}

std::vector<double> pad_planes(std::span<const double> x, std::size_t planes, const ConvGeom& g,
                               const Padded& l) {
  std::vector<double> out(planes * l.plane, 0.0);
  for (std::size_t q = 0; q < planes; ++q) {
    const double* src = x.data() + q * g.h * g.w;
    double* dst = out.data() + q * l.plane + g.p.h * l.wp + g.p.w;
    for (std::size_t y = 0; y < g.h; ++y) std::copy(src + y * g.w, src + (y + 1) * g.w, dst + y * l.wp);
  }
  return out;
}

// Input frame feeding output frame `to` through temporal tap `kt`, or -1.
long source_frame(const ConvGeom& g, std::size_t to, std::size_t kt) {
  const long ti = static_cast<long>(to * g.s.t + kt) - static_cast<long>(g.p.t);
  return ti < 0 || ti >= static_cast<long>(g.t) ? -1 : ti;
}

std::vector<double> conv_forward_dense(std::span<const double> x, std::span<const double> wt,
                                       const double* bias, const ConvGeom& g) {
  const Padded l = padded_layout(g);
  const std::vector<double> xp = pad_planes(x, g.ci * g.t, g, l);
  const std::size_t ksize = g.k.t * g.k.h * g.k.w;
  std::vector<double> out(g.co * g.to * g.ho * g.wo);
  const long jobs = static_cast<long>(g.co * g.to);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long job = 0; job < jobs; ++job) {
    const std::size_t co = static_cast<std::size_t>(job) / g.to;
    const std::size_t to = static_cast<std::size_t>(job) % g.to;
    std::vector<const double*> src;
    std::vector<double> w;
    src.reserve(g.ci * ksize);
    w.reserve(g.ci * ksize);
    for (std::size_t ci = 0; ci < g.ci; ++ci) {
      for (std::size_t kt = 0; kt < g.k.t; ++kt) {
        const long ti = source_frame(g, to, kt);
        if (ti < 0) continue;
        const double* plane = xp.data() + (ci * g.t + static_cast<std::size_t>(ti)) * l.plane;
        const double* wk = wt.data() + (co * g.ci + ci) * ksize + kt * g.k.h * g.k.w;
        for (std::size_t kh = 0; kh < g.k.h; ++kh)
          for (std::size_t kw = 0; kw < g.k.w; ++kw) {
            const double wv = wk[kh * g.k.w + kw];
            if (wv == 0.0) continue;
            src.push_back(plane + kh * l.wp + kw);
            w.push_back(wv);
          }
      }
    }
    std::vector<double> acc(l.span, bias ? bias[co] : 0.0);
    accumulate_taps(acc.data(), l.span, src.data(), w.data(), w.size());
    double* dst = out.data() + (co * g.to + to) * g.ho * g.wo;
    for (std::size_t y = 0; y < g.ho; ++y) std::copy_n(acc.data() + y * l.wp, g.wo, dst + y * g.wo);
  }
  return out;
}

// Output gradient laid out like the padded accumulator with zero scratch
// columns, each plane shifted by `lead` zeros.
std::vector<double> spread_grad(std::span<const double> gout, const ConvGeom& g, const Padded& l) {
  std::vector<double> out(g.co * g.to * l.gplane, 0.0);
  for (std::size_t q = 0; q < g.co * g.to; ++q)
    for (std::size_t y = 0; y < g.ho; ++y)
      std::copy_n(gout.data() + (q * g.ho + y) * g.wo, g.wo, out.data() + q * l.gplane + l.lead + y * l.wp);
  return out;
}

void conv_input_grad_dense(std::span<const double> gout, std::span<const double> wt,
                           std::span<double> gin, const ConvGeom& g) {
  const Padded l = padded_layout(g);
  const std::vector<double> gp = spread_grad(gout, g, l);
  const std::size_t ksize = g.k.t * g.k.h * g.k.w;
  const std::size_t n = l.hp * l.wp;
  const long jobs = static_cast<long>(g.ci * g.t);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long job = 0; job < jobs; ++job) {
    const std::size_t ci = static_cast<std::size_t>(job) / g.t;
    const std::size_t ti = static_cast<std::size_t>(job) % g.t;
    // Gather form: padded position f receives w * gout[f - tap offset].
    std::vector<const double*> src;
    std::vector<double> w;
    for (std::size_t co = 0; co < g.co; ++co) {
      for (std::size_t kt = 0; kt < g.k.t; ++kt) {
        const long num = static_cast<long>(ti + g.p.t) - static_cast<long>(kt);
        if (num < 0 || num % static_cast<long>(g.s.t) != 0) continue;
        const std::size_t to = static_cast<std::size_t>(num) / g.s.t;
        if (to >= g.to) continue;
        const double* plane = gp.data() + (co * g.to + to) * l.gplane + l.lead;
        const double* wk = wt.data() + (co * g.ci + ci) * ksize + kt * g.k.h * g.k.w;
        for (std::size_t kh = 0; kh < g.k.h; ++kh)
          for (std::size_t kw = 0; kw < g.k.w; ++kw) {
            const double wv = wk[kh * g.k.w + kw];
            if (wv == 0.0) continue;
            src.push_back(plane - (kh * l.wp + kw));
            w.push_back(wv);
          }
      }
    }
    std::vector<double> acc(n, 0.0);
    accumulate_taps(acc.data(), n, src.data(), w.data(), w.size());
    double* dst = gin.data() + (ci * g.t + ti) * g.h * g.w;
    for (std::size_t y = 0; y < g.h; ++y) {
      const double* row = acc.data() + (y + g.p.h) * l.wp + g.p.w;
      for (std::size_t x = 0; x < g.w; ++x) dst[y * g.w + x] += row[x];
    }
  }
}

void conv_weight_grad_dense(std::span<const double> gout, std::span<const double> x,
                            std::span<double> gw, const ConvGeom& g) {
  const Padded l = padded_layout(g);
  const std::vector<double> gp = spread_grad(gout, g, l);
  const std::vector<double> xp = pad_planes(x, g.ci * g.t, g, l);
  const std::size_t khw = g.k.h * g.k.w;
  const std::size_t ksize = g.k.t * khw;
  const long jobs = static_cast<long>(g.co * g.ci);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long job = 0; job < jobs; ++job) {
    const std::size_t co = static_cast<std::size_t>(job) / g.ci;
    const std::size_t ci = static_cast<std::size_t>(job) % g.ci;
    double* wdst = gw.data() + (co * g.ci + ci) * ksize;
    for (std::size_t kt = 0; kt < g.k.t; ++kt) {
      std::vector<double> acc(khw, 0.0);
      for (std::size_t to = 0; to < g.to; ++to) {
        const long ti = source_frame(g, to, kt);
        if (ti < 0) continue;
        const double* gs = gp.data() + (co * g.to + to) * l.gplane + l.lead;
        const double* plane = xp.data() + (ci * g.t + static_cast<std::size_t>(ti)) * l.plane;
        // One pass per tap keeps the lane accumulators in registers; the
        // gradient plane stays cache resident across the taps.
        for (std::size_t q = 0; q < khw; ++q)
          acc[q] += dot(gs, plane + (q / g.k.w) * l.wp + q % g.k.w, l.span);
      }
      for (std::size_t q = 0; q < khw; ++q) wdst[kt * khw + q] += acc[q];
    }
  }
}

}  // namespace

ConvSpec ConvSpec::make(std::size_t in_channels, std::size_t out_channels, Extent3 kernel,
                        Extent3 padding, bool with_bias, Extent3 stride) {
  ConvSpec spec;
  spec.kernel = kernel;
  spec.stride = stride;
  spec.padding = padding;
  spec.in_channels = in_channels;
  spec.out_channels = out_channels;
  spec.weights = Tensor::zeros({out_channels, in_channels, kernel.t, kernel.h, kernel.w}, true);
  if (with_bias) spec.bias = Tensor::zeros({out_channels}, true);
  return spec;
}

Extent3 ConvSpec::output_extent(Extent3 in) const {
  return {out_len(in.t, kernel.t, stride.t, padding.t, "T"),
          out_len(in.h, kernel.h, stride.h, padding.h, "H"),
          out_len(in.w, kernel.w, stride.w, padding.w, "W")};
}

std::size_t ConvSpec::parameter_count() const {
  return weights.numel() + (bias.defined() ? bias.numel() : 0);
}

void ConvSpec::validate() const {
  if (kernel.t == 0 || kernel.h == 0 || kernel.w == 0) throw ConfigError("conv3d: zero kernel extent");
  if (stride.t == 0 || stride.h == 0 || stride.w == 0) throw ConfigError("conv3d: zero stride");
  const Shape expect{out_channels, in_channels, kernel.t, kernel.h, kernel.w};
  if (!weights.defined() || weights.shape() != expect) {
    throw DimensionError("conv3d: weights " + shape_str(weights.shape()) + " expected " +
                         shape_str(expect));
  }
  if (bias.defined() && bias.shape() != Shape{out_channels}) {
    throw DimensionError("conv3d: bias " + shape_str(bias.shape()) + " expected [" +
                         std::to_string(out_channels) + "]");
  }
}

void ConvSpec::init_kaiming(std::mt19937_64& rng, double gain) {
  const double fan_in = static_cast<double>(in_channels * kernel.t * kernel.h * kernel.w);
  std::normal_distribution<double> dist(0.0, gain / std::sqrt(fan_in));
  for (auto& v : weights.mutable_data()) v = dist(rng);
  if (bias.defined()) {
    for (auto& v : bias.mutable_data()) v = 0.0;
  }
}

void ConvSpec::set_dirac() {
  if (kernel.t % 2 == 0 || kernel.h % 2 == 0 || kernel.w % 2 == 0) {
    throw ConfigError("set_dirac: kernel extents must be odd");
  }
  auto w = weights.mutable_data();
  std::fill(w.begin(), w.end(), 0.0);
  const std::size_t ksize = kernel.t * kernel.h * kernel.w;
  const std::size_t center = (kernel.t / 2 * kernel.h + kernel.h / 2) * kernel.w + kernel.w / 2;
  for (std::size_t o = 0; o < std::min(in_channels, out_channels); ++o) {
    w[(o * in_channels + o) * ksize + center] = 1.0;
  }
  if (bias.defined()) {
    for (auto& v : bias.mutable_data()) v = 0.0;
  }
}

Tensor conv3d(const Tensor& input, const ConvSpec& spec) {
  spec.validate();
  if (input.rank() != 4) {
    throw DimensionError("conv3d: input must be C x T x H x W, got " + shape_str(input.shape()));
  }
  if (input.dim(0) != spec.in_channels) {
    throw DimensionError("conv3d: channel axis has " + std::to_string(input.dim(0)) +
                         ", spec expects " + std::to_string(spec.in_channels));
  }
  const Extent3 oe = spec.output_extent({input.dim(1), input.dim(2), input.dim(3)});
  const ConvGeom g{spec.in_channels, spec.out_channels, input.dim(1), input.dim(2), input.dim(3),
                   oe.t, oe.h, oe.w, spec.kernel, spec.stride, spec.padding};

  const std::size_t in_plane = g.h * g.w;
  const std::size_t out_plane = g.ho * g.wo;
  const std::size_t ksize = g.k.t * g.k.h * g.k.w;
  auto x = input.data();
  auto wt = spec.weights.data();
  const double* bias = spec.bias.defined() ? spec.bias.data().data() : nullptr;

  const bool dense = g.s.h == 1 && g.s.w == 1;
  std::vector<double> out;
  if (dense) {
    out = conv_forward_dense(x, wt, bias, g);
  } else {
    out.assign(g.co * g.to * out_plane, 0.0);
  }
  const long jobs = dense ? 0 : static_cast<long>(g.co * g.to);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long job = 0; job < jobs; ++job) {
    const std::size_t co = static_cast<std::size_t>(job) / g.to;
    const std::size_t to = static_cast<std::size_t>(job) % g.to;
    double* dst = out.data() + (co * g.to + to) * out_plane;
    if (bias) std::fill(dst, dst + out_plane, bias[co]);
    for (std::size_t ci = 0; ci < g.ci; ++ci) {
      for (std::size_t kt = 0; kt < g.k.t; ++kt) {
        const long ti = static_cast<long>(to * g.s.t + kt) - static_cast<long>(g.p.t);
        if (ti < 0 || ti >= static_cast<long>(g.t)) continue;
        const double* src = x.data() + (ci * g.t + static_cast<std::size_t>(ti)) * in_plane;
        const double* wk = wt.data() + ((co * g.ci + ci) * ksize) + kt * g.k.h * g.k.w;
        for (std::size_t kh = 0; kh < g.k.h; ++kh) {
          for (std::size_t kw = 0; kw < g.k.w; ++kw) {
            const double wv = wk[kh * g.k.w + kw];
            if (wv == 0.0) continue;
            const ColRange cols = valid_cols(g.wo, g.w, g.s.w, g.p.w, kw);
            for (std::size_t ho = 0; ho < g.ho; ++ho) {
              const long hi = static_cast<long>(ho * g.s.h + kh) - static_cast<long>(g.p.h);
              if (hi < 0 || hi >= static_cast<long>(g.h)) continue;
              const double* row = src + static_cast<std::size_t>(hi) * g.w;
              double* orow = dst + ho * g.wo;
              if (g.s.w == 1) {
                const double* r = row + (static_cast<long>(kw) - static_cast<long>(g.p.w));
                for (std::size_t wo = cols.begin; wo < cols.end; ++wo) orow[wo] += wv * r[wo];
              } else {
                for (std::size_t wo = cols.begin; wo < cols.end; ++wo) {
                  orow[wo] += wv * row[wo * g.s.w + kw - g.p.w];
                }
              }
            }
          }
        }
      }
    }
  }

  std::vector<Tensor> inputs{input, spec.weights};
  if (spec.bias.defined()) inputs.push_back(spec.bias);
  const bool has_bias = spec.bias.defined();
  Tensor weights = spec.weights;
  return make_op(
      "conv3d", {g.co, g.to, g.ho, g.wo}, std::move(out), std::move(inputs),
      [g, input, weights, has_bias, in_plane, out_plane, ksize, dense](const BackwardContext& ctx) {
        auto gout = ctx.grad_out();
        auto x = input.data();
        auto wt = weights.data();

        if (dense) {
          if (ctx.needs(0)) conv_input_grad_dense(gout, wt, ctx.grad_in(0), g);
          if (ctx.needs(1)) conv_weight_grad_dense(gout, x, ctx.grad_in(1), g);
        } else if (ctx.needs(0)) {
          auto gin = ctx.grad_in(0);
          const long jobs = static_cast<long>(g.ci * g.t);
#pragma omp parallel for schedule(static) num_threads(thread_count())
          for (long job = 0; job < jobs; ++job) {
            const std::size_t ci = static_cast<std::size_t>(job) / g.t;
            const std::size_t ti = static_cast<std::size_t>(job) % g.t;
            double* dst = gin.data() + (ci * g.t + ti) * in_plane;
            for (std::size_t co = 0; co < g.co; ++co) {
              for (std::size_t kt = 0; kt < g.k.t; ++kt) {
                const long num = static_cast<long>(ti + g.p.t) - static_cast<long>(kt);
                if (num < 0 || num % static_cast<long>(g.s.t) != 0) continue;
                const std::size_t to = static_cast<std::size_t>(num) / g.s.t;
                if (to >= g.to) continue;
                const double* src = gout.data() + (co * g.to + to) * out_plane;
                const double* wk = wt.data() + (co * g.ci + ci) * ksize + kt * g.k.h * g.k.w;
                for (std::size_t kh = 0; kh < g.k.h; ++kh) {
                  for (std::size_t kw = 0; kw < g.k.w; ++kw) {
                    const double wv = wk[kh * g.k.w + kw];
                    if (wv == 0.0) continue;
                    const ColRange cols = valid_cols(g.wo, g.w, g.s.w, g.p.w, kw);
                    for (std::size_t ho = 0; ho < g.ho; ++ho) {
                      const long hi = static_cast<long>(ho * g.s.h + kh) - static_cast<long>(g.p.h);
                      if (hi < 0 || hi >= static_cast<long>(g.h)) continue;
                      double* row = dst + static_cast<std::size_t>(hi) * g.w;
                      const double* grow = src + ho * g.wo;
                      if (g.s.w == 1) {
                        double* r = row + (static_cast<long>(kw) - static_cast<long>(g.p.w));
                        for (std::size_t wo = cols.begin; wo < cols.end; ++wo) r[wo] += wv * grow[wo];
                      } else {
                        for (std::size_t wo = cols.begin; wo < cols.end; ++wo) {
                          row[wo * g.s.w + kw - g.p.w] += wv * grow[wo];
                        }
                      }
                    }
                  }
                }
              }
            }
          }
        }

        if (!dense && ctx.needs(1)) {
          auto gw = ctx.grad_in(1);
          const long jobs = static_cast<long>(g.co * g.ci);
#pragma omp parallel for schedule(static) num_threads(thread_count())
          for (long job = 0; job < jobs; ++job) {
            const std::size_t co = static_cast<std::size_t>(job) / g.ci;
            const std::size_t ci = static_cast<std::size_t>(job) % g.ci;
            double* wdst = gw.data() + (co * g.ci + ci) * ksize;
            for (std::size_t kt = 0; kt < g.k.t; ++kt) {
              for (std::size_t kh = 0; kh < g.k.h; ++kh) {
                for (std::size_t kw = 0; kw < g.k.w; ++kw) {
                  const ColRange cols = valid_cols(g.wo, g.w, g.s.w, g.p.w, kw);
                  double acc = 0.0;
                  for (std::size_t to = 0; to < g.to; ++to) {
                    const long ti = static_cast<long>(to * g.s.t + kt) - static_cast<long>(g.p.t);
                    if (ti < 0 || ti >= static_cast<long>(g.t)) continue;
                    const double* src = x.data() + (ci * g.t + static_cast<std::size_t>(ti)) * in_plane;
                    const double* gsrc = gout.data() + (co * g.to + to) * out_plane;
                    for (std::size_t ho = 0; ho < g.ho; ++ho) {
                      const long hi = static_cast<long>(ho * g.s.h + kh) - static_cast<long>(g.p.h);
                      if (hi < 0 || hi >= static_cast<long>(g.h)) continue;
                      const double* row = src + static_cast<std::size_t>(hi) * g.w;
                      const double* grow = gsrc + ho * g.wo;
                      if (g.s.w == 1) {
                        const double* r = row + (static_cast<long>(kw) - static_cast<long>(g.p.w));
                        for (std::size_t wo = cols.begin; wo < cols.end; ++wo) acc += grow[wo] * r[wo];
                      } else {
                        for (std::size_t wo = cols.begin; wo < cols.end; ++wo) {
                          acc += grow[wo] * row[wo * g.s.w + kw - g.p.w];
                        }
                      }
                    }
                  }
                  wdst[(kt * g.k.h + kh) * g.k.w + kw] += acc;
                }
              }
            }
          }
        }

        if (has_bias && ctx.needs(2)) {
          auto gb = ctx.grad_in(2);
          for (std::size_t co = 0; co < g.co; ++co) {
            const double* src = gout.data() + co * g.to * out_plane;
            double acc = 0.0;
            for (std::size_t i = 0; i < g.to * out_plane; ++i) acc += src[i];
            gb[co] += acc;
          }
        }
      });
}

}  // namespace hih

namespace hih {

void append_parameters(ParameterList& out, const std::string& prefix, const ConvSpec& conv) {
  out.push_back({prefix + ".weight", conv.weights});
  if (conv.bias.defined()) out.push_back({prefix + ".bias", conv.bias});
}

}  // namespace hih
