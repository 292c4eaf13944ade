#include "hih/walker.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "hih/errors.hpp"

namespace hih {

namespace {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Capsule {
  Point a, b;
  double radius = 1.0;
};

constexpr double kMargin = 1.0;
constexpr double kFootClearance = 2.0;  // pixels between the lowest ankle and the bottom row

double head_radius(const WalkerIdentity& id) { return 0.22 * id.torso * id.height_scale; }

// Vertical extent from the top of the head to the ankle of a straight leg.
double standing_height(const WalkerIdentity& id) {
  return (id.torso + id.upper_leg + id.lower_leg) * id.height_scale + 2.0 * head_radius(id) +
         id.thickness * 0.5;
}

// Horizontal reach from the body axis over a full cycle, including limb
// radius and the lateral body-side offset.
double max_half_width(const WalkerIdentity& id) {
  const double s = id.height_scale;
  const double a = id.amplitude;
  const double leg = (id.upper_leg * std::sin(a) + id.lower_leg * std::sin(std::min(1.8 * a, 1.5))) * s;
  const double arm = (id.upper_arm * std::sin(0.8 * a) + id.lower_arm * std::sin(1.4 * a)) * s;
  return std::max({leg, arm, head_radius(id)}) + id.thickness;
}

double distance_to_segment(double px, double py, const Point& a, const Point& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - a.x) * vx + (py - a.y) * vy) / len2, 0.0, 1.0);
  const double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

Point limb_end(const Point& from, double length, double angle) {
  // Angle measured from straight down, positive toward +x.
  return {from.x + length * std::sin(angle), from.y + length * std::cos(angle)};
}

}  // namespace

void WalkerIdentity::validate(std::size_t height, std::size_t width) const {
  const std::array<std::pair<const char*, double>, 8> positive{{{"torso", torso},
                                                                {"upper_arm", upper_arm},
                                                                {"lower_arm", lower_arm},
                                                                {"upper_leg", upper_leg},
                                                                {"lower_leg", lower_leg},
                                                                {"thickness", thickness},
                                                                {"frequency", frequency},
                                                                {"height_scale", height_scale}}};
  for (const auto& [name, v] : positive)
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("walker identity: ") + name + " must be positive");
    }
  if (!(amplitude >= 0.0) || amplitude > 1.0) throw ConfigError("walker identity: amplitude must be in [0, 1]");
  if (frequency > 0.5) throw ConfigError("walker identity: frequency above 0.5 cycles/frame");
  const double h = standing_height(*this) + kFootClearance + kMargin;
  if (h > static_cast<double>(height)) {
    throw ConfigError("walker identity: figure height " + std::to_string(h) + " exceeds frame height " +
                      std::to_string(height));
  }
  if (2.0 * max_half_width(*this) + 2.0 * kMargin > static_cast<double>(width)) {
    throw ConfigError("walker identity: stride width exceeds frame width " + std::to_string(width));
  }
}

WalkerIdentity WalkerIdentity::random(std::mt19937_64& rng) {
  auto u = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  WalkerIdentity id;
  id.torso = u(14.0, 19.0);
  id.upper_arm = u(7.0, 10.0);
  id.lower_arm = u(6.0, 9.0);
  id.upper_leg = u(10.0, 14.0);
  id.lower_leg = u(9.0, 13.0);
  id.thickness = u(3.0, 6.0);
  id.frequency = 1.0 / u(9.0, 16.0);
  id.amplitude = u(0.2, 0.4);
  id.height_scale = u(0.85, 1.0);
  return id;
}

bool is_known_covariate(const std::string& tag) {
  return tag == "nm" || tag == "bg" || tag == "fs" || tag == "sl";
}

SequenceData generate_sequence(const WalkerIdentity& identity, double view_degrees,
                               const std::string& covariate, std::size_t frames,
                               std::mt19937_64& rng) {
  identity.validate();
  if (frames == 0) throw ConfigError("generate_sequence: frame count must be >= 1");
  if (!is_known_covariate(covariate)) {
    throw ConfigError("generate_sequence: unknown covariate '" + covariate + "'");
  }
  const double pi = std::numbers::pi;
  const double phase0 = std::uniform_real_distribution<double>(0.0, 2.0 * pi)(rng);
  double freq = identity.frequency;
  if (covariate == "fs") freq *= 1.25;
  if (covariate == "sl") freq *= 0.8;

  const double yaw = view_degrees * pi / 180.0;
  const double xscale = std::max(std::abs(std::cos(yaw)), 0.2);
  const double lateral = 0.5 * identity.thickness * std::sin(yaw);
  const double s = identity.height_scale;
  const double r = 0.5 * identity.thickness;
  const double head_r = head_radius(identity);

  SequenceData seq;
  seq.frames = frames;
  seq.silhouettes.assign(frames * seq.height * seq.width, 0);
  seq.pose.resize(frames);
  const double cx = 0.5 * static_cast<double>(seq.width - 1);
  const double ankle_y = static_cast<double>(seq.height) - 1.0 - kFootClearance;
  const double hip_y = ankle_y - (identity.upper_leg + identity.lower_leg) * s;

  for (std::size_t t = 0; t < frames; ++t) {
    const double phi = 2.0 * pi * freq * static_cast<double>(t) + phase0;
    const double a = identity.amplitude;
    // Side-view body coordinates, hip centre at x = 0.
    std::array<Point, kCocoJoints> j{};
    const Point hip{0.0, hip_y};
    const Point neck{0.0, hip_y - identity.torso * s};
    const Point head{0.0, neck.y - head_r};
    auto leg = [&](double sign, std::size_t hip_i, std::size_t knee_i, std::size_t ankle_i) {
      const double thigh = sign * a * std::sin(phi);
      const double flex = 0.8 * a * 0.5 * (1.0 - std::cos(phi + (sign > 0 ? 0.0 : pi)));
      j[hip_i] = hip;
      j[knee_i] = limb_end(hip, identity.upper_leg * s, thigh);
      j[ankle_i] = limb_end(j[knee_i], identity.lower_leg * s, thigh - flex);
    };
    auto arm = [&](double sign, std::size_t sh_i, std::size_t el_i, std::size_t wr_i) {
      const double swing = -sign * 0.8 * a * std::sin(phi);
      const double flex = 0.3 * a * (1.0 + std::sin(phi * sign));
      j[sh_i] = {neck.x, neck.y + r};
      j[el_i] = limb_end(j[sh_i], identity.upper_arm * s, swing);
      j[wr_i] = limb_end(j[el_i], identity.lower_arm * s, swing + flex);
    };
    leg(+1.0, 11, 13, 15);
    leg(-1.0, 12, 14, 16);
    arm(+1.0, 5, 7, 9);
    arm(-1.0, 6, 8, 10);
    j[0] = {head.x + 0.5 * head_r, head.y};
    j[1] = j[2] = {head.x + 0.3 * head_r, head.y - 0.3 * head_r};
    j[3] = j[4] = {head.x - 0.2 * head_r, head.y - 0.1 * head_r};

    // View projection: foreshorten x, separate the body sides laterally.
    // Head joints stay on the head disc; their sides separate by a fraction
    // of its radius.
    static const std::array<int, kCocoJoints> side{0, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1};
    std::array<Point, kCocoJoints> p{};
    for (std::size_t k = 0; k < kCocoJoints; ++k) {
      const double offset = k < 5 ? 0.3 * head_r * std::sin(yaw) : lateral;
      p[k] = {cx + j[k].x * xscale + side[k] * offset, j[k].y};
    }
    const Point hip_c{cx, hip_y}, neck_c{cx, neck.y}, head_c{cx, head.y};
    std::vector<Capsule> parts{{neck_c, hip_c, r * 1.4}, {head_c, head_c, head_r}};
    for (auto [from, to] : {std::pair{11, 13}, {13, 15}, {12, 14}, {14, 16}, {5, 7}, {7, 9}, {6, 8}, {8, 10}}) {
      parts.push_back({p[from], p[to], r});
    }
    parts.push_back({p[11], p[12], r});
    parts.push_back({p[5], p[6], r});
    if (covariate == "bg") {
      const Point bag{cx - 0.9 * identity.torso * s * 0.35 * xscale - r, hip_y - 0.35 * identity.torso * s};
      parts.push_back({bag, bag, 0.25 * identity.torso * s});
    }

    std::uint8_t* frame = &seq.silhouettes[t * seq.height * seq.width];
    for (std::size_t y = 0; y < seq.height; ++y)
      for (std::size_t x = 0; x < seq.width; ++x) {
        for (const auto& c : parts) {
          if (distance_to_segment(static_cast<double>(x), static_cast<double>(y), c.a, c.b) <= c.radius) {
            frame[y * seq.width + x] = 1;
            break;
          }
        }
      }
    seq.pose[t].resize(kCocoJoints);
    for (std::size_t k = 0; k < kCocoJoints; ++k) seq.pose[t][k] = {p[k].x, p[k].y, 1.0};
  }
  return seq;
}

std::vector<std::size_t> all_frames(const SequenceData& seq) {
  std::vector<std::size_t> f(seq.frames);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = i;
  return f;
}

Tensor silhouette_tensor(const SequenceData& seq, const std::vector<std::size_t>& frames) {
  const std::size_t plane = seq.height * seq.width;
  std::vector<double> v(frames.size() * plane);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i] >= seq.frames) throw DimensionError("silhouette_tensor: frame index out of range");
    const std::uint8_t* src = &seq.silhouettes[frames[i] * plane];
    for (std::size_t k = 0; k < plane; ++k) v[i * plane + k] = src[k] ? 1.0 : 0.0;
  }
  return Tensor::from_data({1, frames.size(), seq.height, seq.width}, std::move(v));
}

Tensor heatmap_tensor(const SequenceData& seq, const std::vector<std::size_t>& frames, double sigma) {
  PoseSequence picked;
  picked.reserve(frames.size());
  for (std::size_t f : frames) {
    if (f >= seq.pose.size()) throw DimensionError("heatmap_tensor: frame index out of range");
    picked.push_back(seq.pose[f]);
  }
  return rasterize_sequence(picked, seq.height, seq.width, sigma);
}

}  // namespace hih
