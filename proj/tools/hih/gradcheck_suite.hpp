#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hih/grad_check.hpp"

namespace hih::cli {

struct GradCase {
  std::string name;
  bool end_to_end = false;  // judged against the model tolerance
  // Runs one randomized check. When `corrupt` is set, the op's output passes
  // through a node that scales its gradient, so the check must fail.
  std::function<GradCheckResult(std::uint64_t seed, bool corrupt)> run;
};

const std::vector<GradCase>& gradient_cases();

struct GradCaseReport {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t coordinates = 0;
  // Points redrawn because a checked coordinate sat within h of a kink.
  std::size_t resampled = 0;
  bool passed = false;
};

// Every case over `seeds` seeds (1..seeds); the worst seed is reported. A
// point with a detected kink is redrawn from a derived seed, a bounded number
// of times.
std::vector<GradCaseReport> run_gradient_suite(std::size_t seeds, double op_tolerance,
                                               double model_tolerance, const std::string& corrupt = "");

}  // namespace hih::cli
