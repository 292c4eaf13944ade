#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "hih/model.hpp"
#include "hih/tensor.hpp"

namespace fixtures {

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

hih::Tensor random_tensor(const hih::Shape& shape, std::mt19937_64& rng, double lo = -1.0,
                          double hi = 1.0, bool requires_grad = false);

// Values in [lo, hi] but at least `gap` away from zero, so relu kinks are
// never within a finite-difference step.
hih::Tensor off_kink_tensor(const hih::Shape& shape, std::mt19937_64& rng, double gap = 0.05,
                            bool requires_grad = false);

// Four stages with 2-4-4-8 channels on 32 x 16 frames, 4 HP bins.
hih::ModelConfig small_model(std::size_t classes);

std::string read_text(const std::filesystem::path& path);

}  // namespace fixtures
