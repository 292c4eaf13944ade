#include "hih/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "hih/errors.hpp"

namespace hih {

namespace {

double eval_scalar(const std::function<Tensor()>& f, const char* where, std::size_t tensor,
                   std::size_t index) {
  Tensor y = f();
  if (y.numel() != 1) throw DimensionError("grad_check: function must return a scalar");
  const double v = y.item();
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "grad_check: non-finite value " << v << " at " << where << " (tensor " << tensor
       << ", index " << index << ")";
    throw NumericError(os.str());
  }
  return v;
}

// Smooth curvature moves one-sided slopes apart by about |f''| h; a kink
// moves them by the full slope jump.
constexpr double kKinkRelative = 1e-3;
constexpr double kKinkAbsolute = 1e-7;

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point,
                           double h) {
  Tensor x = point.clone(true);
  return grad_check_leaves([&] { return f(x); }, {x}, h);
}

GradCheckResult grad_check_leaves(const std::function<Tensor()>& f, std::vector<Tensor> leaves,
                                  double h, std::size_t max_coords_per_tensor, std::uint64_t seed) {
  for (auto& leaf : leaves) {
    leaf.zero_grad();
    leaf.set_requires_grad(true);
  }
  {
    Tensor y = f();
    if (y.numel() != 1) throw DimensionError("grad_check: function must return a scalar");
    if (!std::isfinite(y.item())) throw NumericError("grad_check: non-finite value at base point");
    y.backward();
  }

  GradCheckResult result;
  std::mt19937_64 rng(seed);
  NoGradGuard no_grad;
  const double f0 = eval_scalar(f, "x", 0, 0);
  for (std::size_t ti = 0; ti < leaves.size(); ++ti) {
    Tensor& leaf = leaves[ti];
    std::vector<double> analytic(leaf.numel(), 0.0);
    if (leaf.has_grad()) std::copy(leaf.grad().begin(), leaf.grad().end(), analytic.begin());

    std::vector<std::size_t> coords(leaf.numel());
    std::iota(coords.begin(), coords.end(), 0);
    if (max_coords_per_tensor > 0 && coords.size() > max_coords_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(max_coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }

    auto data = leaf.mutable_data();
    for (std::size_t i : coords) {
      const double orig = data[i];
      data[i] = orig + h;
      const double fp = eval_scalar(f, "x+h", ti, i);
      data[i] = orig - h;
      const double fm = eval_scalar(f, "x-h", ti, i);
      data[i] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double right = (fp - f0) / h;
      const double left = (f0 - fm) / h;
      if (std::abs(right - left) > kKinkRelative * std::max(std::abs(right), std::abs(left)) + kKinkAbsolute)
        ++result.kinks;
      const double err = relative_error(analytic[i], numeric);
      ++result.coordinates_checked;
      if (err > result.max_rel_error || result.coordinates_checked == 1) {
        result.max_rel_error = err;
        result.worst_tensor = ti;
        result.worst_index = i;
        result.worst_analytic = analytic[i];
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace hih
