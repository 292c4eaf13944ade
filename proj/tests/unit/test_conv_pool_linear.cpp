#include <cmath>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "hih/errors.hpp"
#include "hih/ops.hpp"
#include "oracles.hpp"

using namespace hih;

namespace {

oracle::Conv to_oracle(const ConvSpec& s) {
  oracle::Conv c;
  c.in = s.in_channels;
  c.out = s.out_channels;
  c.k = {s.kernel.t, s.kernel.h, s.kernel.w};
  c.s = {s.stride.t, s.stride.h, s.stride.w};
  c.p = {s.padding.t, s.padding.h, s.padding.w};
  c.w = oracle::values(s.weights);
  if (s.bias.defined()) c.b = oracle::values(s.bias);
  return c;
}

void randomize(ConvSpec& s, std::mt19937_64& rng) {
  for (double& w : s.weights.mutable_data()) w = std::uniform_real_distribution<double>(-1, 1)(rng);
  if (s.bias.defined())
    for (double& b : s.bias.mutable_data()) b = std::uniform_real_distribution<double>(-1, 1)(rng);
}

}  // namespace

TEST_CASE("conv3d dirac kernel is the identity") {
  std::mt19937_64 rng(1);
  ConvSpec spec = ConvSpec::make(1, 1, {3, 3, 3}, {1, 1, 1});
  spec.set_dirac();
  Tensor x = fixtures::random_tensor({1, 5, 6, 4}, rng);
  CHECK(oracle::values(conv3d(x, spec)) == oracle::values(x));
}

TEST_CASE("conv3d all-ones window sums") {
  ConvSpec spec = ConvSpec::make(1, 1, {1, 3, 3}, {0, 0, 0}, false);
  for (double& w : spec.weights.mutable_data()) w = 1.0;
  Tensor y = conv3d(Tensor::full({1, 1, 3, 3}, 1.0), spec);
  CHECK(y.shape() == Shape{1, 1, 1, 1});
  CHECK(y.item() == 9.0);
}

TEST_CASE("conv3d matches the nested-loop reference") {
  std::mt19937_64 rng(2);
  SUBCASE("the 2x1x5x4 example") {
    ConvSpec spec = ConvSpec::make(2, 3, {1, 3, 3}, {0, 1, 1});
    randomize(spec, rng);
    const oracle::Vec x = oracle::uniform(2 * 1 * 5 * 4, rng);
    Tensor y = conv3d(oracle::tensor({2, 1, 5, 4}, x), spec);
    CHECK(oracle::max_abs_diff(oracle::values(y), oracle::conv3d(x, {2, 1, 5, 4}, to_oracle(spec))) < 1e-12);
  }
  SUBCASE("random geometries, strides and paddings") {
    std::uniform_int_distribution<std::size_t> pick(1, 3);
    for (int trial = 0; trial < 120; ++trial) {
      const Extent3 k{pick(rng), pick(rng), pick(rng)};
      const Extent3 s{pick(rng), pick(rng), pick(rng)};
      const Extent3 p{pick(rng) - 1, pick(rng) - 1, pick(rng) - 1};
      const oracle::Dims4 d{pick(rng), k.t + pick(rng), k.h + pick(rng) + 2, k.w + pick(rng) + 1};
      ConvSpec spec = ConvSpec::make(d[0], pick(rng), k, p, trial % 2 == 0, s);
      randomize(spec, rng);
      const oracle::Vec x = oracle::uniform(d[0] * d[1] * d[2] * d[3], rng);
      oracle::Dims4 od{};
      const oracle::Vec ref = oracle::conv3d(x, d, to_oracle(spec), &od);
      Tensor y = conv3d(oracle::tensor({d[0], d[1], d[2], d[3]}, x), spec);
      REQUIRE(y.shape() == Shape{od[0], od[1], od[2], od[3]});
      CHECK(oracle::max_abs_diff(oracle::values(y), ref) < 1e-12);
    }
  }
}

TEST_CASE("conv3d backward matches the reference adjoint") {
  // d/dx and d/dw of sum(c * conv(x)) are checked against the loop oracle by
  // linearity: each gradient entry is the oracle output's response to a unit
  // perturbation, evaluated in closed form through the reference conv.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const Extent3 s{1, 1 + static_cast<std::size_t>(trial % 2), 1};
    ConvSpec spec = ConvSpec::make(2, 2, {3, 3, 3}, {1, 1, 1}, true, s);
    randomize(spec, rng);
    const oracle::Dims4 d{2, 3, 5, 4};
    const oracle::Vec x = oracle::uniform(2 * 3 * 5 * 4, rng);
    Tensor xt = oracle::tensor({2, 3, 5, 4}, x, true);
    Tensor y = conv3d(xt, spec);
    const oracle::Vec c = oracle::uniform(y.numel(), rng);
    sum(mul(y, Tensor::from_data(y.shape(), c))).backward();
    auto objective = [&](const oracle::Vec& xv, const oracle::Conv& cv) {
      const oracle::Vec out = oracle::conv3d(xv, d, cv);
      double acc = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) acc += c[i] * out[i];
      return acc;
    };
    const oracle::Conv base = to_oracle(spec);
    const double f0 = objective(x, base);
    for (std::size_t i = 0; i < x.size(); i += 7) {
      oracle::Vec xp = x;
      xp[i] += 1.0;  // objective is linear in x
      CHECK(std::abs((objective(xp, base) - f0) - xt.grad()[i]) < 1e-11);
    }
    for (std::size_t i = 0; i < base.w.size(); i += 5) {
      oracle::Conv cp = base;
      cp.w[i] += 1.0;
      CHECK(std::abs((objective(x, cp) - f0) - spec.weights.grad()[i]) < 1e-11);
    }
    oracle::Conv cb = base;
    cb.b[1] += 1.0;
    CHECK(std::abs((objective(x, cb) - f0) - spec.bias.grad()[1]) < 1e-11);
  }
}

TEST_CASE("conv3d same padding preserves the volume") {
  std::mt19937_64 rng(4);
  for (std::size_t k : {1, 3, 5}) {
    ConvSpec spec = ConvSpec::make(2, 3, {k, k, k}, {k / 2, k / 2, k / 2});
    spec.init_kaiming(rng);
    Tensor y = conv3d(fixtures::random_tensor({2, 6, 7, 5}, rng), spec);
    CHECK(y.shape() == Shape{3, 6, 7, 5});
  }
  ConvSpec spec = ConvSpec::make(1, 1, {3, 3, 3}, {0, 0, 0}, true, {2, 2, 2});
  CHECK(spec.output_extent({9, 8, 7}) == Extent3{4, 3, 3});
  CHECK(spec.parameter_count() == 27 + 1);
  CHECK(spec.weights.numel() == 1 * 1 * 3 * 3 * 3);
}

TEST_CASE("conv3d shape errors name the axis") {
  ConvSpec spec = ConvSpec::make(2, 1, {3, 3, 3}, {0, 0, 0});
  try {
    conv3d(Tensor::zeros({3, 4, 4, 4}), spec);
    FAIL("expected a dimension error");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("channel") != std::string::npos);
  }
  try {
    conv3d(Tensor::zeros({2, 4, 2, 4}), spec);
    FAIL("expected a dimension error");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("H") != std::string::npos);
  }
  CHECK_THROWS_AS(conv3d(Tensor::zeros({2, 4, 4}), spec), DimensionError);
}

TEST_CASE("max_pool examples") {
  Tensor t = Tensor::zeros({30});
  CHECK(max_pool(t, {{3}, {3}}).shape() == Shape{10});
  Tensor y = max_pool(Tensor::from_data({3}, {1, 3, 2}), {{3}, {3}});
  CHECK(y.shape() == Shape{1});
  CHECK(y.item() == 3.0);
  CHECK_THROWS_AS(max_pool(Tensor::zeros({2}), {{3}, {3}}), DimensionError);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const oracle::Vec x = oracle::uniform(12, rng);
    CHECK(oracle::values(max_pool(oracle::tensor({12}, x), {{3}, {3}})) == oracle::chunk_max(x, 3, 3));
  }
}

TEST_CASE("pooling matches the window reference") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> pick(1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const oracle::Dims4 k{1, pick(rng), pick(rng), pick(rng)};
    const oracle::Dims4 s{1, pick(rng), pick(rng), pick(rng)};
    const oracle::Dims4 d{pick(rng), k[1] + pick(rng), k[2] + pick(rng), k[3] + pick(rng)};
    const oracle::Vec x = oracle::uniform(d[0] * d[1] * d[2] * d[3], rng);
    Tensor xt = oracle::tensor({d[0], d[1], d[2], d[3]}, x);
    const PoolWindow w{{k[0], k[1], k[2], k[3]}, {s[0], s[1], s[2], s[3]}};
    CHECK(oracle::values(max_pool(xt, w)) == oracle::max_pool(x, d, k, s));
    CHECK(oracle::max_abs_diff(oracle::values(avg_pool(xt, w)), oracle::avg_pool(x, d, k, s)) < 1e-12);
  }
}

TEST_CASE("max_pool gradient is one-hot per window with first-index ties") {
  Tensor x = Tensor::from_data({6}, {2, 2, 1, 0, 5, 5}, true);
  Tensor y = max_pool(x, {{3}, {3}});
  sum(mul(y, Tensor::from_data({2}, {1.5, -4.0}))).backward();
  CHECK(oracle::values(Tensor::from_data({6}, std::vector<double>(x.grad().begin(), x.grad().end()))) ==
        oracle::Vec{1.5, 0, 0, 0, -4.0, 0});

  std::mt19937_64 rng(7);
  Tensor r = fixtures::random_tensor({2, 6, 4, 4}, rng, -1, 1, true);
  Tensor p = max_pool3d(r, {3, 2, 2}, {3, 2, 2});
  const oracle::Vec g = oracle::uniform(p.numel(), rng);
  sum(mul(p, Tensor::from_data(p.shape(), g))).backward();
  double routed = 0.0, incoming = 0.0;
  std::size_t nonzero = 0;
  for (double v : r.grad()) {
    routed += v;
    nonzero += v != 0.0;
  }
  for (double v : g) incoming += v;
  CHECK(routed == doctest::Approx(incoming).epsilon(1e-12));
  CHECK(nonzero == p.numel());
}

TEST_CASE("linear examples") {
  Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
  Tensor x = Tensor::from_data({3, 2}, {1, -2, 0.5, 4, 7, 8});
  CHECK(oracle::values(linear(x, eye, Tensor::zeros({2}))) == oracle::values(x));
  Tensor y = linear(Tensor::from_data({2}, {1, 2}), Tensor::from_data({2, 2}, {1, 1, 1, -1}), Tensor::zeros({2}));
  CHECK(oracle::values(y) == oracle::Vec{3, -1});
  CHECK_THROWS_AS(linear(x, Tensor::zeros({2, 3}), Tensor()), DimensionError);

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> pick(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = pick(rng), din = pick(rng), dout = pick(rng);
    const oracle::Vec xv = oracle::uniform(rows * din, rng);
    const oracle::Vec wv = oracle::uniform(dout * din, rng);
    const oracle::Vec bv = oracle::uniform(dout, rng);
    Tensor out = linear(oracle::tensor({rows, din}, xv), oracle::tensor({dout, din}, wv), oracle::tensor({dout}, bv));
    CHECK(oracle::max_abs_diff(oracle::values(out), oracle::linear(xv, rows, din, wv, dout, bv)) < 1e-12);
  }
}

TEST_CASE("grouped_linear applies one map per group") {
  std::mt19937_64 rng(9);
  const std::size_t b = 3, g = 4, din = 5, dout = 2;
  const oracle::Vec xv = oracle::uniform(b * g * din, rng);
  const oracle::Vec wv = oracle::uniform(g * dout * din, rng);
  const oracle::Vec bv = oracle::uniform(g * dout, rng);
  Tensor y = grouped_linear(oracle::tensor({b, g, din}, xv), oracle::tensor({g, dout, din}, wv),
                            oracle::tensor({g, dout}, bv));
  for (std::size_t gi = 0; gi < g; ++gi) {
    oracle::Vec xs, ws(wv.begin() + static_cast<long>(gi * dout * din), wv.begin() + static_cast<long>((gi + 1) * dout * din));
    oracle::Vec bs(bv.begin() + static_cast<long>(gi * dout), bv.begin() + static_cast<long>((gi + 1) * dout));
    for (std::size_t r = 0; r < b; ++r)
      xs.insert(xs.end(), xv.begin() + static_cast<long>((r * g + gi) * din), xv.begin() + static_cast<long>((r * g + gi + 1) * din));
    const oracle::Vec ref = oracle::linear(xs, b, din, ws, dout, bs);
    for (std::size_t r = 0; r < b; ++r)
      for (std::size_t o = 0; o < dout; ++o) CHECK(std::abs(y.at({r, gi, o}) - ref[r * dout + o]) < 1e-12);
  }
}

TEST_CASE("batch_norm_1d examples") {
  SUBCASE("standardized input passes through") {
    BatchNorm1d bn = BatchNorm1d::make(2);
    Tensor x = Tensor::from_data({4, 2}, {-1, 1, 1, -1, -1, -1, 1, 1});
    const oracle::Vec y = oracle::values(batch_norm_1d(x, bn, true));
    CHECK(oracle::max_abs_diff(y, oracle::values(x)) < 1e-6);
  }
  SUBCASE("constant column maps to zero") {
    BatchNorm1d bn = BatchNorm1d::make(1);
    const oracle::Vec y = oracle::values(batch_norm_1d(Tensor::full({5, 1}, 3.0), bn, true));
    for (double v : y) CHECK(v == 0.0);
  }
  SUBCASE("random batch moments") {
    std::mt19937_64 rng(10);
    BatchNorm1d bn = BatchNorm1d::make(6);
    Tensor x = fixtures::random_tensor({20, 6}, rng, -3, 5);
    Tensor y = batch_norm_1d(x, bn, true);
    for (std::size_t c = 0; c < 6; ++c) {
      double m = 0.0, v = 0.0;
      for (std::size_t r = 0; r < 20; ++r) m += y.at({r, c});
      m /= 20;
      for (std::size_t r = 0; r < 20; ++r) v += (y.at({r, c}) - m) * (y.at({r, c}) - m);
      v /= 20;
      CHECK(std::abs(m) < 1e-10);
      CHECK(std::abs(v - 1.0) < 1e-6);
    }
  }
  SUBCASE("running statistics drive eval mode") {
    BatchNorm1d bn = BatchNorm1d::make(1);
    Tensor x = Tensor::from_data({2, 1}, {1.0, 3.0});
    batch_norm_1d(x, bn, true);
    CHECK(bn.running_mean[0] == doctest::Approx(0.9 * 0.0 + 0.1 * 2.0));
    CHECK(bn.running_var[0] == doctest::Approx(0.9 * 1.0 + 0.1 * 2.0));  // unbiased variance 2
    const double y = batch_norm_1d(Tensor::from_data({1, 1}, {2.0}), bn, false).item();
    CHECK(y == doctest::Approx((2.0 - 0.2) / std::sqrt(1.1)));
  }
  SUBCASE("training needs two rows") {
    BatchNorm1d bn = BatchNorm1d::make(1);
    CHECK_THROWS_AS(batch_norm_1d(Tensor::zeros({1, 1}), bn, true), DimensionError);
  }
}
