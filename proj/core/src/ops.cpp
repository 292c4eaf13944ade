#include <cmath>
#include <string>

#include "hih/errors.hpp"
#include "hih/ops.hpp"

namespace hih {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape " + shape_str(a.shape()) +
                         " does not match " + shape_str(b.shape()));
  }
}

void require_defined(const Tensor& a, const char* op) {
  if (!a.defined()) throw DimensionError(std::string(op) + ": undefined tensor");
}

constexpr double kLeakySlope = 0.01;

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto x = a.data();
  auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return make_op("add", a.shape(), std::move(out), {a, b}, [](const BackwardContext& ctx) {
    auto g = ctx.grad_out();
    for (std::size_t k = 0; k < 2; ++k) {
      if (!ctx.needs(k)) continue;
      auto gi = ctx.grad_in(k);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto x = a.data();
  auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return make_op("sub", a.shape(), std::move(out), {a, b}, [](const BackwardContext& ctx) {
    auto g = ctx.grad_out();
    if (ctx.needs(0)) {
      auto gi = ctx.grad_in(0);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
    if (ctx.needs(1)) {
      auto gi = ctx.grad_in(1);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] -= g[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto x = a.data();
  auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return make_op("mul", a.shape(), std::move(out), {a, b}, [a, b](const BackwardContext& ctx) {
    auto g = ctx.grad_out();
    auto x = a.data();
    auto y = b.data();
    if (ctx.needs(0)) {
      auto gi = ctx.grad_in(0);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] * y[i];
    }
    if (ctx.needs(1)) {
      auto gi = ctx.grad_in(1);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] * x[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  require_defined(a, "scale");
  auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x[i];
  return make_op("scale", a.shape(), std::move(out), {a}, [factor](const BackwardContext& ctx) {
    auto g = ctx.grad_out();
    auto gi = ctx.grad_in(0);
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] += factor * g[i];
  });
}

Tensor add_n(std::span<const Tensor> terms) {
  if (terms.empty()) throw DimensionError("add_n: no terms");
  for (const auto& t : terms) require_same_shape(terms[0], t, "add_n");
  std::vector<double> out(terms[0].numel(), 0.0);
  // Fixed summation order keeps results independent of scheduling.
  for (const auto& t : terms) {
    auto x = t.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += x[i];
  }
  std::vector<Tensor> inputs(terms.begin(), terms.end());
  const std::size_t n = terms.size();
  return make_op("add_n", terms[0].shape(), std::move(out), std::move(inputs),
                 [n](const BackwardContext& ctx) {
                   auto g = ctx.grad_out();
                   for (std::size_t k = 0; k < n; ++k) {
                     if (!ctx.needs(k)) continue;
                     auto gi = ctx.grad_in(k);
                     for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
                   }
                 });
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  double total = 0.0;
  for (double v : a.data()) total += v;
  return make_op("sum", {}, {total}, {a}, [](const BackwardContext& ctx) {
    const double g = ctx.grad_out()[0];
    for (auto& v : ctx.grad_in(0)) v += g;
  });
}

Tensor mean(const Tensor& a) {
  require_defined(a, "mean");
  if (a.numel() == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor square(const Tensor& a) { return mul(a, a); }

Tensor activation(const Tensor& input, Activation kind) {
  require_defined(input, "activation");
  auto x = input.data();
  std::vector<double> out(x.size());
  switch (kind) {
    case Activation::relu:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
      return make_op("relu", input.shape(), std::move(out), {input},
                     [](const BackwardContext& ctx) {
                       auto g = ctx.grad_out();
                       auto y = ctx.output();
                       auto gi = ctx.grad_in(0);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         if (y[i] > 0.0) gi[i] += g[i];
                       }
                     });
    case Activation::tanh:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
      return make_op("tanh", input.shape(), std::move(out), {input},
                     [](const BackwardContext& ctx) {
                       auto g = ctx.grad_out();
                       auto y = ctx.output();
                       auto gi = ctx.grad_in(0);
                       for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] * (1.0 - y[i] * y[i]);
                     });
    case Activation::leaky_relu:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : kLeakySlope * x[i];
      return make_op("leaky_relu", input.shape(), std::move(out), {input},
                     [input](const BackwardContext& ctx) {
                       auto g = ctx.grad_out();
                       auto x = input.data();
                       auto gi = ctx.grad_in(0);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         gi[i] += x[i] > 0.0 ? g[i] : kLeakySlope * g[i];
                       }
                     });
  }
  throw ConfigError("unknown activation kind");
}

Tensor reshape(const Tensor& input, Shape shape) {
  require_defined(input, "reshape");
  if (shape_numel(shape) != input.numel()) {
    throw DimensionError("reshape: cannot view " + shape_str(input.shape()) + " as " +
                         shape_str(shape));
  }
  auto x = input.data();
  return make_op("reshape", std::move(shape), std::vector<double>(x.begin(), x.end()), {input},
                 [](const BackwardContext& ctx) {
                   auto g = ctx.grad_out();
                   auto gi = ctx.grad_in(0);
                   for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
                 });
}

namespace {

// outer x axis x inner decomposition of a row-major shape around `axis`.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Tensor narrow(const Tensor& input, std::size_t axis, std::size_t start, std::size_t length) {
  require_defined(input, "narrow");
  if (axis >= input.rank()) {
    throw DimensionError("narrow: axis " + std::to_string(axis) + " out of range for " +
                         shape_str(input.shape()));
  }
  if (start + length > input.dim(axis)) {
    throw DimensionError("narrow: range [" + std::to_string(start) + ", " +
                         std::to_string(start + length) + ") exceeds axis " +
                         std::to_string(axis) + " of " + shape_str(input.shape()));
  }
  const auto s = split_at(input.shape(), axis);
  Shape out_shape = input.shape();
  out_shape[axis] = length;
  auto x = input.data();
  std::vector<double> out(s.outer * length * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    const double* src = x.data() + (o * s.extent + start) * s.inner;
    std::copy(src, src + length * s.inner, out.begin() + o * length * s.inner);
  }
  return make_op("narrow", std::move(out_shape), std::move(out), {input},
                 [s, start, length](const BackwardContext& ctx) {
                   auto g = ctx.grad_out();
                   auto gi = ctx.grad_in(0);
                   for (std::size_t o = 0; o < s.outer; ++o) {
                     double* dst = gi.data() + (o * s.extent + start) * s.inner;
                     const double* src = g.data() + o * length * s.inner;
                     for (std::size_t i = 0; i < length * s.inner; ++i) dst[i] += src[i];
                   }
                 });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no parts");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) {
    throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for " +
                         shape_str(first));
  }
  std::size_t total = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size()) throw DimensionError("concat: rank mismatch");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) {
        throw DimensionError("concat: axis " + std::to_string(i) + " differs: " + shape_str(s) +
                             " vs " + shape_str(first));
      }
    }
    total += s[axis];
  }
  Shape out_shape = first;
  out_shape[axis] = total;
  const auto outer_split = split_at(out_shape, axis);
  std::vector<double> out(shape_numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t len = p.dim(axis);
    auto x = p.data();
    for (std::size_t o = 0; o < outer_split.outer; ++o) {
      std::copy(x.begin() + o * len * outer_split.inner,
                x.begin() + (o + 1) * len * outer_split.inner,
                out.begin() + (o * total + offset) * outer_split.inner);
    }
    offset += len;
  }
  std::vector<std::size_t> lengths;
  for (const auto& p : parts) lengths.push_back(p.dim(axis));
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return make_op("concat", std::move(out_shape), std::move(out), std::move(inputs),
                 [outer_split, total, offsets, lengths](const BackwardContext& ctx) {
                   auto g = ctx.grad_out();
                   for (std::size_t k = 0; k < lengths.size(); ++k) {
                     if (!ctx.needs(k)) continue;
                     auto gi = ctx.grad_in(k);
                     const std::size_t len = lengths[k] * outer_split.inner;
                     for (std::size_t o = 0; o < outer_split.outer; ++o) {
                       const double* src = g.data() + (o * total + offsets[k]) * outer_split.inner;
                       double* dst = gi.data() + o * len;
                       for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
                     }
                   }
                 });
}

Tensor stack(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("stack: no parts");
  std::vector<Tensor> expanded;
  expanded.reserve(parts.size());
  for (const auto& p : parts) {
    Shape s = p.shape();
    s.insert(s.begin(), 1);
    expanded.push_back(reshape(p, std::move(s)));
  }
  return concat(expanded, 0);
}

}  // namespace hih
