#include "hih/augment.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hih/errors.hpp"

namespace hih {

SequenceData hflip(const SequenceData& seq) {
  SequenceData out = seq;
  const std::size_t h = seq.height, w = seq.width;
  for (std::size_t t = 0; t < seq.frames; ++t)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        out.silhouettes[(t * h + y) * w + x] = seq.pixel(t, y, w - 1 - x);
  const auto& mirror = coco_mirror_map();
  for (std::size_t t = 0; t < seq.pose.size(); ++t) {
    const auto& src = seq.pose[t];
    auto& dst = out.pose[t];
    for (std::size_t j = 0; j < src.size(); ++j) {
      const std::size_t from = src.size() == kCocoJoints ? mirror[j] : j;
      dst[j] = src[from];
      dst[j].x = static_cast<double>(w) - 1.0 - src[from].x;
    }
  }
  return out;
}

SequenceData rotate(const SequenceData& seq, double degrees) {
  if (!(std::abs(degrees) <= kMaxRotationDegrees)) {
    throw ConfigError("rotate: |angle| " + std::to_string(degrees) + " exceeds " +
                      std::to_string(kMaxRotationDegrees) + " degrees");
  }
  const double th = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(th), s = std::sin(th);
  const double cy = 0.5 * static_cast<double>(seq.height - 1);
  const double cx = 0.5 * static_cast<double>(seq.width - 1);
  SequenceData out = seq;
  const std::size_t h = seq.height, w = seq.width;
  // Screen coordinates have y pointing down, so counter-clockwise on screen
  // is (x, y) -> (c x + s y, -s x + c y) around the centre.
  for (std::size_t t = 0; t < seq.frames; ++t)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
        // Inverse map: rotate the destination back by -theta.
        const double sx = c * dx - s * dy + cx;
        const double sy = s * dx + c * dy + cy;
        const long ix = std::lround(sx), iy = std::lround(sy);
        std::uint8_t v = 0;
        if (ix >= 0 && iy >= 0 && ix < static_cast<long>(w) && iy < static_cast<long>(h)) {
          v = seq.pixel(t, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
        }
        out.silhouettes[(t * h + y) * w + x] = v;
      }
  for (auto& frame : out.pose)
    for (auto& j : frame) {
      const double dx = j.x - cx, dy = j.y - cy;
      j.x = c * dx + s * dy + cx;
      j.y = -s * dx + c * dy + cy;
    }
  return out;
}

}  // namespace hih
