#include "hih/pose_raster.hpp"

#include <algorithm>
#include <cmath>

#include "hih/errors.hpp"

namespace hih {

const std::vector<std::size_t>& coco_mirror_map() {
  // nose, eyes, ears, shoulders, elbows, wrists, hips, knees, ankles
  static const std::vector<std::size_t> map{0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11, 14, 13, 16, 15};
  return map;
}

std::vector<double> rasterize(const PoseFrame& joints, std::size_t height, std::size_t width,
                              double sigma, RasterStats* stats) {
  if (!(sigma > 0.0)) throw ConfigError("rasterize: sigma must be positive");
  std::vector<double> map(height * width, 0.0);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (const auto& j : joints) {
    if (!std::isfinite(j.x) || !std::isfinite(j.y) || !std::isfinite(j.confidence)) {
      if (stats) ++stats->skipped_joints;
      continue;
    }
    const double conf = std::clamp(j.confidence, 0.0, 1.0);
    if (conf == 0.0) continue;
    for (std::size_t y = 0; y < height; ++y) {
      const double dy = static_cast<double>(y) - j.y;
      for (std::size_t x = 0; x < width; ++x) {
        const double dx = static_cast<double>(x) - j.x;
        const double v = conf * std::exp(-(dx * dx + dy * dy) * inv);
        double& cell = map[y * width + x];
        cell = std::max(cell, v);
      }
    }
  }
  return map;
}

Tensor rasterize_sequence(const PoseSequence& frames, std::size_t height, std::size_t width,
                          double sigma, RasterStats* stats) {
  std::vector<double> data;
  data.reserve(frames.size() * height * width);
  for (const auto& f : frames) {
    auto m = rasterize(f, height, width, sigma, stats);
    data.insert(data.end(), m.begin(), m.end());
  }
  return Tensor::from_data({1, frames.size(), height, width}, std::move(data));
}

}  // namespace hih
