#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace fixtures {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("hih-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

hih::Tensor random_tensor(const hih::Shape& shape, std::mt19937_64& rng, double lo, double hi,
                          bool requires_grad) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(hih::shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  return hih::Tensor::from_data(shape, std::move(v), requires_grad);
}

hih::Tensor off_kink_tensor(const hih::Shape& shape, std::mt19937_64& rng, double gap,
                            bool requires_grad) {
  std::uniform_real_distribution<double> mag(gap, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v(hih::shape_numel(shape));
  for (auto& x : v) x = sign(rng) ? mag(rng) : -mag(rng);
  return hih::Tensor::from_data(shape, std::move(v), requires_grad);
}

hih::ModelConfig small_model(std::size_t classes) {
  hih::ModelConfig c = hih::ModelConfig::outdoor(classes);
  c.channels = {2, 4, 4, 8};
  c.input_height = 32;
  c.input_width = 16;
  c.hp_bins = 4;
  c.embedding_dim = 6;
  return c;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace fixtures
