#include <cmath>
#include <limits>

#include "doctest.h"
#include "fixtures.hpp"
#include "hih/errors.hpp"
#include "hih/grad_check.hpp"
#include "hih/model.hpp"
#include "oracles.hpp"

using namespace hih;

namespace {

struct Batch {
  std::vector<Tensor> sils, poses;
};

Batch random_batch(std::size_t b, std::size_t frames, std::size_t h, std::size_t w,
                   std::mt19937_64& rng) {
  Batch out;
  for (std::size_t i = 0; i < b; ++i) {
    out.sils.push_back(fixtures::random_tensor({1, frames, h, w}, rng, 0, 1));
    out.poses.push_back(fixtures::random_tensor({1, frames, h, w}, rng, 0, 1));
  }
  return out;
}

void zero(Tensor t) {
  for (double& v : t.mutable_data()) v = 0.0;
}

}  // namespace

TEST_CASE("temporal_pool examples and reference") {
  Tensor x = Tensor::from_data({1, 3, 1, 2}, {1, 5, 4, 2, 3, 3});
  Tensor y = temporal_pool(x);
  CHECK(y.shape() == Shape{1, 1, 2});
  CHECK(oracle::values(y) == oracle::Vec{4, 5});
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const oracle::Dims4 d{2, 1 + static_cast<std::size_t>(trial % 5), 3, 4};
    const oracle::Vec v = oracle::uniform(d[0] * d[1] * d[2] * d[3], rng);
    CHECK(oracle::values(temporal_pool(oracle::tensor({d[0], d[1], d[2], d[3]}, v))) == oracle::temporal_pool(v, d));
  }
  CHECK_THROWS_AS(temporal_pool(Tensor::zeros({2, 3, 4})), DimensionError);
}

TEST_CASE("horizontal_pool examples and reference") {
  // Bands {1, 3} and {2, 6}: mean + max = 2 + 3 and 4 + 6.
  Tensor x = Tensor::from_data({1, 2, 2}, {1, 3, 2, 6});
  CHECK(oracle::values(horizontal_pool(x, 2)) == oracle::Vec{5, 10});
  CHECK(oracle::values(horizontal_pool(x, 1)) == oracle::Vec{3 + 6});
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t bins = std::size_t{1} << (trial % 4);
    const std::size_t c = 3, h = 8, w = 5;
    const oracle::Vec v = oracle::uniform(c * h * w, rng);
    const oracle::Vec got = oracle::values(horizontal_pool(oracle::tensor({c, h, w}, v), bins));
    CHECK(oracle::max_abs_diff(got, oracle::horizontal_pool(v, c, h, w, bins)) < 1e-12);
  }
  CHECK_THROWS_AS(horizontal_pool(Tensor::zeros({1, 6, 2}), 4), ConfigError);
  CHECK_THROWS_AS(horizontal_pool(Tensor::zeros({1, 1, 6, 2}), 2), DimensionError);
}

TEST_CASE("retrieval_distance examples and properties") {
  Tensor a = Tensor::zeros({2, 2});
  Tensor b = Tensor::from_data({2, 2}, {3, 4, 6, 8});
  CHECK(retrieval_distance(a, b) == 15.0);
  CHECK(retrieval_distance(b, a) == 15.0);
  CHECK(retrieval_distance(b, b) == 0.0);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const oracle::Vec x = oracle::uniform(12, rng), y = oracle::uniform(12, rng), z = oracle::uniform(12, rng);
    const double dxy = retrieval_distance(x, y, 4), dyz = retrieval_distance(y, z, 4), dxz = retrieval_distance(x, z, 4);
    CHECK(dxy == retrieval_distance(y, x, 4));
    CHECK(dxz <= dxy + dyz + 1e-12);
    CHECK(std::abs(dxy - oracle::stripe_distance(x, y, 4)) < 1e-12);
  }
  CHECK_THROWS_AS(retrieval_distance(oracle::Vec(6), oracle::Vec(6), 4), DimensionError);
  CHECK_THROWS_AS(retrieval_distance(a, Tensor::zeros({2, 3})), DimensionError);
}

TEST_CASE("stage outputs of the small outdoor model") {
  NoGradGuard guard;
  HihModel m(fixtures::small_model(3));
  m.init(1);
  std::mt19937_64 rng(4);
  Batch b = random_batch(1, 6, 32, 16, rng);
  std::vector<Tensor> stages;
  Tensor out = m.backbone(b.sils[0], b.poses[0], &stages);
  REQUIRE(stages.size() == 4);
  CHECK(stages[0].shape() == Shape{2, 6, 32, 16});
  CHECK(stages[1].shape() == Shape{4, 6, 16, 8});
  CHECK(stages[2].shape() == Shape{4, 2, 8, 4});
  CHECK(stages[3].shape() == Shape{8, 2, 8, 4});
  CHECK(out.shape() == stages[3].shape());
  const ModelOutput y = m.forward(b.sils, b.poses, false);
  CHECK(y.embedding.shape() == Shape{1, 4, 6});
  CHECK(y.bn_embedding.shape() == Shape{1, 4, 6});
  CHECK(y.logits.shape() == Shape{1, 4, 3});
}

TEST_CASE("HiH-M with zeroed guidance equals HiH-S") {
  NoGradGuard guard;
  ModelConfig cm = fixtures::small_model(4);
  ModelConfig cs = cm;
  cs.mode = ModelMode::silhouette_only;
  HihModel mm(cm), ms(cs);
  mm.init(7);
  ms.init(7);
  for (std::size_t s = 0; s < 4; ++s) {
    if (mm.has_dse(s)) {
      zero(mm.dse()[s].conv.weights);
      zero(mm.dse()[s].conv.bias);
    }
    if (mm.has_dta(s)) {
      zero(mm.dta()[s].conv.weights);
      zero(mm.dta()[s].conv.bias);
    }
  }
  std::mt19937_64 rng(5);
  Batch b = random_batch(3, 6, 32, 16, rng);
  const ModelOutput ym = mm.forward(b.sils, b.poses, false);
  const ModelOutput ys = ms.forward(b.sils, {}, false);
  CHECK(oracle::max_abs_diff(oracle::values(ym.embedding), oracle::values(ys.embedding)) < 1e-10);
  CHECK(oracle::max_abs_diff(oracle::values(ym.logits), oracle::values(ys.logits)) < 1e-10);
}

TEST_CASE("HiH-S ignores pose input entirely") {
  NoGradGuard guard;
  ModelConfig c = fixtures::small_model(2);
  c.mode = ModelMode::silhouette_only;
  HihModel m(c);
  m.init(3);
  std::mt19937_64 rng(6);
  Batch b = random_batch(2, 6, 32, 16, rng);
  for (auto& p : b.poses) p.mutable_data()[0] = std::numeric_limits<double>::quiet_NaN();
  const ModelOutput with = m.forward(b.sils, b.poses, false);
  const ModelOutput without = m.forward(b.sils, {}, false);
  CHECK(oracle::values(with.embedding) == oracle::values(without.embedding));
  CHECK(m.parameters().size() < HihModel(fixtures::small_model(2)).parameters().size());
}

TEST_CASE("forward is equivariant to batch order") {
  NoGradGuard guard;
  HihModel m(fixtures::small_model(3));
  m.init(11);
  std::mt19937_64 rng(7);
  Batch b = random_batch(3, 6, 32, 16, rng);
  Batch r{{b.sils[2], b.sils[0], b.sils[1]}, {b.poses[2], b.poses[0], b.poses[1]}};
  const std::size_t perm[3] = {2, 0, 1};
  for (bool training : {false, true}) {
    CAPTURE(training);
    HihModel a = m, c = m;
    const ModelOutput y = a.forward(b.sils, b.poses, training);
    const ModelOutput z = c.forward(r.sils, r.poses, training);
    const std::size_t row = 4 * 6, lrow = 4 * 3;
    const oracle::Vec ye = oracle::values(y.embedding), ze = oracle::values(z.embedding);
    const oracle::Vec yl = oracle::values(y.logits), zl = oracle::values(z.logits);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < row; ++j) CHECK(ze[i * row + j] == ye[perm[i] * row + j]);
      for (std::size_t j = 0; j < lrow; ++j) CHECK(std::abs(zl[i * lrow + j] - yl[perm[i] * lrow + j]) < 1e-12);
    }
  }
}

TEST_CASE("parameter count matches the layer inventory") {
  for (ModelMode mode : {ModelMode::multi_modal, ModelMode::silhouette_only}) {
    ModelConfig c = fixtures::small_model(5);
    c.mode = mode;
    HihModel m(c);
    std::size_t expect = 2 * 27 + 2;  // initial 1 -> 2, 3x3x3
    for (const auto& st : m.stages()) expect += st.parameter_count();
    if (mode == ModelMode::multi_modal) expect += (3 * 9 + 3) + (5 * 27 + 5);  // DSE, DTA
    const std::size_t u = 4, d = 6, ch = 8, n = 5;
    expect += u * d * ch + u * d + 2 * u * d + u * n * d;  // fc, BNNeck, classifier
    CHECK(m.parameter_count() == expect);
  }
  // Stage 4 of the small model: its stage parameters add up to the formula.
  HihModel m(fixtures::small_model(5));
  const auto& s4 = m.stages()[3];
  const std::size_t scale = (8 * 4 * 9 + 8) + (8 * 8 * 3 + 8);
  const std::size_t refine = (8 * 8 * 9 + 8) + (8 * 8 * 3 + 8);
  CHECK(s4.parameter_count() == 4 * scale + refine + (8 * 4 + 8));
}

TEST_CASE("init is deterministic per seed") {
  NoGradGuard guard;
  HihModel a(fixtures::small_model(2)), b(fixtures::small_model(2)), c(fixtures::small_model(2));
  a.init(5);
  b.init(5);
  c.init(6);
  std::mt19937_64 rng(8);
  Batch x = random_batch(2, 6, 32, 16, rng);
  const oracle::Vec ya = oracle::values(a.forward(x.sils, x.poses, false).embedding);
  CHECK(ya == oracle::values(b.forward(x.sils, x.poses, false).embedding));
  CHECK(ya != oracle::values(c.forward(x.sils, x.poses, false).embedding));
}

TEST_CASE("HiH-S and HiH-M share backbone weights for a seed") {
  ModelConfig cs = fixtures::small_model(2);
  cs.mode = ModelMode::silhouette_only;
  HihModel s(cs), m(fixtures::small_model(2));
  s.init(9);
  m.init(9);
  CHECK(oracle::values(s.initial_conv().weights) == oracle::values(m.initial_conv().weights));
  CHECK(oracle::values(s.stages()[3].refine_spatial().weights) == oracle::values(m.stages()[3].refine_spatial().weights));
  CHECK(oracle::values(s.classifier_weights()) == oracle::values(m.classifier_weights()));
}

TEST_CASE("model config validation and JSON") {
  ModelConfig c = fixtures::small_model(3);
  CHECK(ModelConfig::from_json(c.to_json()).to_json() == c.to_json());
  ModelConfig bad = c;
  bad.hp_bins = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.dta_stages = {5};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.temporal_stride = {1, 1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.input_height = 24;  // stage 4 needs 8 strips
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(ModelConfig::from_json(R"({"chanels": [4]})"), ConfigError);
  CHECK_THROWS_AS(ModelConfig::from_json("[1]"), ConfigError);
  CHECK_THROWS_AS(parse_mode("HiH-X"), ConfigError);
  CHECK(ModelConfig::outdoor(10).channels == std::vector<std::size_t>{64, 128, 256, 256});
  CHECK(ModelConfig::indoor(10).channels == std::vector<std::size_t>{64, 64, 128, 256});
}

TEST_CASE("model input errors") {
  HihModel m(fixtures::small_model(2));
  std::vector<Tensor> sils{Tensor::zeros({1, 6, 32, 16})};
  CHECK_THROWS_AS(m.forward(sils, {}, false), DimensionError);
  std::vector<Tensor> poses{Tensor::zeros({1, 6, 32, 15})};
  CHECK_THROWS_AS(m.forward(sils, poses, false), DimensionError);
  CHECK_THROWS_AS(m.forward({}, {}, false), DimensionError);
  std::vector<Tensor> two{Tensor::zeros({2, 6, 32, 16})};
  CHECK_THROWS_AS(m.forward(two, two, false), DimensionError);
}

TEST_CASE("tiny model gradients pass finite differences") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    CAPTURE(seed);
    GradCheckResult r;
    for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
      const std::uint64_t s = seed + 1000 * attempt;
      ModelConfig cfg;
      cfg.channels = {2, 3};
      cfg.spatial_downsample = {false, true};
      cfg.temporal_stride = {1, 2};
      cfg.dse_stages = {1};
      cfg.dta_stages = {2};
      cfg.hp_bins = 2;
      cfg.embedding_dim = 3;
      cfg.input_height = 8;
      cfg.input_width = 6;
      HihModel m(cfg);
      m.init(s);
      std::mt19937_64 rng(s + 100);
      std::uniform_real_distribution<double> bias(0.05, 0.3), off(-0.4, 0.4);
      for (const auto& p : m.parameters()) {
        Tensor t = p.tensor;
        if (p.name.starts_with("stage1.dse") || p.name.starts_with("stage2.dta")) {
          for (double& v : t.mutable_data()) v = off(rng);
        } else if (p.name.ends_with(".bias") || p.name.ends_with(".beta")) {
          // A zero BN shift is a stationary point of the quadratic loss below.
          for (double& v : t.mutable_data()) v = bias(rng);
        }
      }
      m.dse()[0].conv.bias.mutable_data()[2] = 2.0;
      m.dta()[1].conv.bias.mutable_data()[3] = 2.0;
      m.dta()[1].conv.bias.mutable_data()[4] = 2.0;
      Batch b = random_batch(3, 4, 8, 6, rng);
      std::vector<Tensor> leaves;
      for (const auto& p : m.parameters()) leaves.push_back(p.tensor);
      r = grad_check_leaves(
          [&] {
            const ModelOutput y = m.forward(b.sils, b.poses, true);
            return add(sum(square(y.logits)), sum(square(y.embedding)));
          },
          leaves, 1e-5, 4, s);
      if (r.kinks == 0) break;
    }
    CHECK(r.kinks == 0);
    CHECK(r.max_rel_error < 1e-4);
  }
}
