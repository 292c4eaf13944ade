#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hih/tensor.hpp"

namespace hih {

struct GradCheckResult {
  double max_rel_error = 0.0;
  // Location of the worst coordinate: which tensor and which flat index.
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
  // Coordinates whose one-sided differences disagree: f is not smooth within
  // h of the point there, so the central difference is not a valid oracle.
  std::size_t kinks = 0;
};

// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double analytic, double numeric);

/// Compares the reverse-mode gradient of scalar f at `point` against central
/// differences (f(x+h) - f(x-h)) / 2h for every coordinate. Throws
/// NumericError when f produces a non-finite value.
GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point,
                           double h = 1e-4);

/// Same comparison for a closure over existing leaf tensors (model
/// parameters, inputs). Each tensor is perturbed in place and restored.
/// With max_coords_per_tensor > 0, a seeded random subset of coordinates is
/// checked per tensor instead of all of them.
GradCheckResult grad_check_leaves(const std::function<Tensor()>& f, std::vector<Tensor> leaves,
                                  double h = 1e-4, std::size_t max_coords_per_tensor = 0,
                                  std::uint64_t seed = 0);

}  // namespace hih
