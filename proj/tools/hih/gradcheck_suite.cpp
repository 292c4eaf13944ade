#include "gradcheck_suite.hpp"

#include <cmath>
#include <random>

#include "hih/errors.hpp"
#include "hih/guidance.hpp"
#include "hih/hgd.hpp"
#include "hih/losses.hpp"
#include "hih/model.hpp"
#include "hih/ops.hpp"
#include "hih/warp.hpp"

namespace hih::cli {

namespace {

// Piecewise-linear ops are checked with a small step so a perturbation
// rarely crosses a kink; smooth ops use the default step.
constexpr double kSmoothStep = 1e-4;
constexpr double kKinkStep = 1e-5;
constexpr std::uint64_t kMaxRedraws = 16;

Tensor corrupt_gradient(const Tensor& x) {
  std::vector<double> v(x.data().begin(), x.data().end());
  return make_op("corrupt_gradient", x.shape(), std::move(v), {x}, [](const BackwardContext& ctx) {
    auto g = ctx.grad_out();
    auto gx = ctx.grad_in(0);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += 1.5 * g[i];
  });
}

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0,
                     double min_abs = 0.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) {
    do x = dist(rng);
    while (std::abs(x) < min_abs);
  }
  return Tensor::from_data(std::move(shape), std::move(v), true);
}

// sum(w * y) with fixed random weights, so every output coordinate matters.
Tensor project(const Tensor& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  Tensor w = random_tensor(y.shape(), rng, 0.5, 1.5);
  std::uniform_int_distribution<int> coin(0, 1);
  for (auto& v : w.mutable_data()) v = coin(rng) ? v : -v;
  w.set_requires_grad(false);
  return sum(y * w);
}

void randomize(ConvSpec& conv, std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (auto& v : conv.weights.mutable_data()) v = dist(rng);
  if (conv.bias.defined())
    for (auto& v : conv.bias.mutable_data()) v = dist(rng);
}

std::vector<Tensor> conv_leaves(const ConvSpec& c) {
  std::vector<Tensor> out{c.weights};
  if (c.bias.defined()) out.push_back(c.bias);
  return out;
}

// Offsets whose fractional parts stay away from the integer-coordinate kinks.
Tensor fractional_offsets(Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> frac(0.2, 0.8);
  std::uniform_int_distribution<int> whole(-1, 1);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = whole(rng) + frac(rng);
  return Tensor::from_data(std::move(shape), std::move(v), true);
}

using Fn = std::function<Tensor()>;

GradCheckResult check(const Fn& f, std::vector<Tensor> leaves, double h, bool corrupt,
                      std::uint64_t seed, std::size_t max_coords = 0) {
  Fn g = corrupt ? Fn([f] { return corrupt_gradient(f()); }) : f;
  return grad_check_leaves(g, std::move(leaves), h, max_coords, seed);
}

std::vector<GradCase> build_cases() {
  std::vector<GradCase> cases;
  auto add = [&](std::string name, std::function<GradCheckResult(std::uint64_t, bool)> run, bool e2e = false) {
    cases.push_back({std::move(name), e2e, std::move(run)});
  };

  add("elementwise", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng);
    return check([=] {
      const Tensor terms[] = {a * b, square(a), 0.5 * (a - b)};
      return project(add_n(terms), seed) + mean(a) + 0.3 * sum(b);
    }, {a, b}, kSmoothStep, corrupt, seed);
  });
  add("shape_ops", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor a = random_tensor({2, 3, 4}, rng), b = random_tensor({2, 3, 4}, rng);
    return check([=] {
      const Tensor parts[] = {narrow(a, 1, 1, 2), narrow(b, 1, 0, 1)};
      const Tensor pair[] = {reshape(a, {6, 4}), reshape(b, {6, 4})};
      return project(concat(parts, 1), seed) + project(stack(pair), seed + 1);
    }, {a, b}, kSmoothStep, corrupt, seed);
  });
  for (auto kind : {Activation::relu, Activation::tanh, Activation::leaky_relu}) {
    const std::string name = kind == Activation::relu ? "relu" : kind == Activation::tanh ? "tanh" : "leaky_relu";
    add(name, [kind](std::uint64_t seed, bool corrupt) {
      std::mt19937_64 rng(seed);
      Tensor x = random_tensor({4, 5}, rng, -2.0, 2.0, 0.05);
      return check([=] { return project(activation(x, kind), seed); }, {x}, kSmoothStep, corrupt, seed);
    });
  }
  add("conv3d", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({2, 3, 5, 4}, rng);
    ConvSpec c = ConvSpec::make(2, 3, {3, 3, 2}, {1, 1, 0}, true, {1, 2, 1});
    randomize(c, rng);
    auto leaves = conv_leaves(c);
    leaves.push_back(x);
    return check([=] { return project(conv3d(x, c), seed); }, leaves, kSmoothStep, corrupt, seed);
  });
  add("conv3d_relu", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({1, 4, 5, 4}, rng);
    ConvSpec c = ConvSpec::make(1, 2, {1, 3, 3}, {0, 1, 1});
    randomize(c, rng);
    auto leaves = conv_leaves(c);
    leaves.push_back(x);
    return check([=] { return sum(relu(conv3d(x, c))); }, leaves, kKinkStep, corrupt, seed);
  });
  add("max_pool", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({2, 6, 4, 5}, rng);
    return check([=] { return project(max_pool(x, {{1, 3, 2, 2}, {1, 3, 2, 1}}), seed); }, {x}, kKinkStep,
                 corrupt, seed);
  });
  add("avg_pool", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({2, 6, 4, 5}, rng);
    return check([=] { return project(avg_pool(x, {{1, 2, 2, 3}, {}}), seed); }, {x}, kSmoothStep, corrupt, seed);
  });
  add("linear", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({3, 4}, rng), w = random_tensor({5, 4}, rng), b = random_tensor({5}, rng);
    return check([=] { return project(linear(x, w, b), seed); }, {x, w, b}, kSmoothStep, corrupt, seed);
  });
  add("grouped_linear", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({2, 3, 4}, rng), w = random_tensor({3, 2, 4}, rng), b = random_tensor({3, 2}, rng);
    return check([=] { return project(grouped_linear(x, w, b), seed); }, {x, w, b}, kSmoothStep, corrupt, seed);
  });
  add("batch_norm_1d", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({5, 3}, rng, -2.0, 2.0);
    auto bn = std::make_shared<BatchNorm1d>(BatchNorm1d::make(3));
    bn->gamma = random_tensor({3}, rng, 0.5, 1.5);
    bn->beta = random_tensor({3}, rng);
    return check([=] { return project(batch_norm_1d(x, *bn, true), seed); }, {x, bn->gamma, bn->beta},
                 kSmoothStep, corrupt, seed);
  });
  add("bilinear_warp", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({2, 2, 4, 5}, rng);
    Tensor o = fractional_offsets({2, 2, 4, 5}, rng);
    return check([=] { return project(bilinear_warp(x, o), seed); }, {x, o}, kKinkStep, corrupt, seed);
  });
  add("trilinear_warp", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({2, 3, 4, 4}, rng);
    Tensor o = fractional_offsets({3, 3, 4, 4}, rng);
    return check([=] { return project(trilinear_warp(x, o), seed); }, {x, o}, kKinkStep, corrupt, seed);
  });
  add("hgd_scale", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({2, 3, 4, 3}, rng);
    ConvSpec sp = ConvSpec::make(2, 3, {1, 3, 3}, {0, 1, 1});
    ConvSpec tp = ConvSpec::make(3, 3, {3, 1, 1}, {1, 0, 0});
    randomize(sp, rng);
    randomize(tp, rng);
    std::vector<Tensor> leaves{x, sp.weights, sp.bias, tp.weights, tp.bias};
    return check([=] { return project(hgd_scale(x, 2, sp, tp), seed); }, leaves, kKinkStep, corrupt, seed);
  });
  add("hgd_stage", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({2, 3, 4, 4}, rng);
    auto stage = std::make_shared<HgdStage>(HgdStageConfig::standard(2, 2, 3, true));
    stage->init(rng);
    ParameterList params;
    stage->append_parameters(params, "s");
    std::uniform_real_distribution<double> bias(-0.3, 0.3);
    std::vector<Tensor> leaves{x};
    for (auto& p : params) {
      if (p.name.ends_with(".bias"))
        for (auto& v : Tensor(p.tensor).mutable_data()) v = bias(rng);
      leaves.push_back(p.tensor);
    }
    return check([=] { return project(stage->forward(x), seed); }, leaves, kKinkStep, corrupt, seed);
  });
  add("dse_apply", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({2, 2, 5, 4}, rng);
    Tensor pose = random_tensor({1, 2, 5, 4}, rng, 0.0, 1.0);
    DseConfig cfg = DseConfig::make();
    randomize(cfg.conv, rng, 0.8);
    // Keep the scale channel positive, away from the ReLU kink.
    cfg.conv.bias.mutable_data()[2] = 2.0;
    std::vector<Tensor> leaves{x, pose, cfg.conv.weights, cfg.conv.bias};
    return check([=] { return project(dse_apply(x, pose, cfg), seed); }, leaves, kKinkStep, corrupt, seed);
  });
  add("dta_apply", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({2, 6, 4, 3}, rng);
    Tensor pose = random_tensor({1, 6, 4, 3}, rng, 0.0, 1.0);
    DtaConfig cfg = DtaConfig::make(1, 3);
    randomize(cfg.conv, rng, 0.4);
    cfg.conv.bias.mutable_data()[3] = 2.0;
    cfg.conv.bias.mutable_data()[4] = 2.0;
    std::vector<Tensor> leaves{x, pose, cfg.conv.weights, cfg.conv.bias};
    return check([=] { return project(dta_apply(x, pose, cfg), seed); }, leaves, kKinkStep, corrupt, seed);
  });
  add("temporal_pool", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({2, 4, 3, 3}, rng);
    return check([=] { return project(temporal_pool(x), seed); }, {x}, kKinkStep, corrupt, seed);
  });
  add("horizontal_pool", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor x = random_tensor({3, 4, 3}, rng);
    return check([=] { return project(horizontal_pool(x, 2), seed); }, {x}, kKinkStep, corrupt, seed);
  });
  add("triplet_loss", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor e = random_tensor({2, 2, 2, 3}, rng);
    return check([=] { return triplet_loss(e, 0.5).loss; }, {e}, kKinkStep, corrupt, seed);
  });
  add("cross_entropy", [](std::uint64_t seed, bool corrupt) {
    std::mt19937_64 rng(seed);
    Tensor z = random_tensor({3, 2, 4}, rng, -2.0, 2.0);
    const std::vector<std::size_t> labels{1, 3, 0};
    return check([=] { return cross_entropy(z, labels); }, {z}, kSmoothStep, corrupt, seed);
  });
  add("model_end_to_end", [](std::uint64_t seed, bool corrupt) {
    ModelConfig cfg;
    cfg.channels = {2, 3};
    cfg.spatial_downsample = {false, true};
    cfg.temporal_stride = {1, 2};
    cfg.dse_stages = {1};
    cfg.dta_stages = {2};
    cfg.hp_bins = 2;
    cfg.embedding_dim = 3;
    cfg.num_classes = 2;
    cfg.input_height = 8;
    cfg.input_width = 6;
    auto model = std::make_shared<HihModel>(cfg);
    model->init(seed);
    std::mt19937_64 rng(seed + 100);
    // Zero biases put dead units exactly on the relu kink.
    std::uniform_real_distribution<double> bias(0.05, 0.3);
    for (const auto& p : model->parameters()) {
      if (!p.name.starts_with("head") && p.name.ends_with(".bias"))
        for (auto& v : Tensor(p.tensor).mutable_data()) v = bias(rng);
    }
    for (std::size_t s = 0; s < 2; ++s) {
      if (model->has_dse(s)) {
        randomize(model->dse()[s].conv, rng, 0.8);
        model->dse()[s].conv.bias.mutable_data()[2] = 2.0;
      }
      if (model->has_dta(s)) {
        randomize(model->dta()[s].conv, rng, 0.4);
        model->dta()[s].conv.bias.mutable_data()[3] = 2.0;
        model->dta()[s].conv.bias.mutable_data()[4] = 2.0;
      }
    }
    std::vector<Tensor> sils, poses;
    for (int i = 0; i < 4; ++i) {
      sils.push_back(random_tensor({1, 4, 8, 6}, rng, 0.0, 1.0));
      poses.push_back(random_tensor({1, 4, 8, 6}, rng, 0.0, 1.0));
      sils.back().set_requires_grad(false);
      poses.back().set_requires_grad(false);
    }
    const std::vector<std::size_t> labels{0, 0, 1, 1};
    std::vector<Tensor> leaves;
    for (const auto& p : model->parameters()) leaves.push_back(p.tensor);
    return check([=] {
      const ModelOutput y = model->forward(sils, poses, true);
      // The joint loss ignores a shift shared by all embeddings, so some bias
      // gradients are exactly zero and their finite differences pure roundoff.
      // A small energy term removes that symmetry.
      return joint_loss(y.embedding, y.logits, labels, 2, 2, 0.5).total +
             0.05 * mean(square(y.embedding));
    }, leaves, kKinkStep, corrupt, seed, 12);
  }, true);
  return cases;
}

}  // namespace

const std::vector<GradCase>& gradient_cases() {
  static const std::vector<GradCase> cases = build_cases();
  return cases;
}

std::vector<GradCaseReport> run_gradient_suite(std::size_t seeds, double op_tolerance,
                                               double model_tolerance, const std::string& corrupt) {
  bool corrupt_found = corrupt.empty();
  std::vector<GradCaseReport> out;
  for (const auto& c : gradient_cases()) {
    GradCaseReport r;
    r.name = c.name;
    r.tolerance = c.end_to_end ? model_tolerance : op_tolerance;
    const bool bad = c.name == corrupt;
    corrupt_found = corrupt_found || bad;
    for (std::uint64_t s = 1; s <= seeds; ++s) {
      GradCheckResult g = c.run(s, bad);
      for (std::uint64_t attempt = 1; g.kinks > 0 && attempt <= kMaxRedraws; ++attempt) {
        ++r.resampled;
        g = c.run(s + attempt * 1000, bad);
      }
      r.max_rel_error = std::max(r.max_rel_error, g.max_rel_error);
      r.coordinates += g.coordinates_checked;
    }
    r.passed = r.max_rel_error < r.tolerance;
    out.push_back(r);
  }
  if (!corrupt_found) throw ConfigError("gradcheck.corrupt names unknown case '" + corrupt + "'");
  return out;
}

}  // namespace hih::cli
