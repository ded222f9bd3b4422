#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace itemseg {

struct LbfgsConfig {
  int memory = 6;
  int max_iter = 300;
  /// Stops when |g| / max(1, |x|) falls below this.
  double tol = 1e-5;
  int max_line_search = 40;
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::vector<double> history;  // objective at the start point and after each iteration
};

/// Objective: writes the gradient into `grad` (already sized) and returns f(x).
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Limited-memory BFGS with Armijo backtracking.
LbfgsResult minimize_lbfgs(const Objective& objective, std::vector<double> x0, const LbfgsConfig& config);

}  // namespace itemseg
