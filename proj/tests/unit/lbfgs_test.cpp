#include <gtest/gtest.h>

#include <cmath>

#include "itemseg/lbfgs.hpp"

namespace itemseg {
namespace {

double rosenbrock(std::span<const double> x, std::span<double> g) {
  double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
  g[0] = -2.0 * a - 400.0 * x[0] * b;
  g[1] = 200.0 * b;
  return a * a + 100.0 * b * b;
}

TEST(Lbfgs, SolvesRosenbrock) {
  LbfgsConfig cfg;
  cfg.max_iter = 500;
  cfg.tol = 1e-9;
  auto r = minimize_lbfgs(rosenbrock, {-1.2, 1.0}, cfg);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
  EXPECT_LT(r.f, 1e-10);
  for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k], r.history[k - 1]);
  EXPECT_EQ(r.history.size(), static_cast<std::size_t>(r.iterations) + 1);
}

TEST(Lbfgs, IllConditionedQuadratic) {
  const int n = 30;
  auto f = [&](std::span<const double> x, std::span<double> g) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double c = std::pow(10.0, 3.0 * i / (n - 1));
      s += 0.5 * c * (x[i] - 1.0) * (x[i] - 1.0);
      g[i] = c * (x[i] - 1.0);
    }
    return s;
  };
  auto r = minimize_lbfgs(f, std::vector<double>(n, 0.0), {});
  EXPECT_TRUE(r.converged) << r.stop_reason;
  for (double v : r.x) EXPECT_NEAR(v, 1.0, 1e-3);
}

TEST(Lbfgs, StopsAtIterationLimit) {
  LbfgsConfig cfg;
  cfg.max_iter = 3;
  cfg.tol = 0.0;
  auto r = minimize_lbfgs(rosenbrock, {-1.2, 1.0}, cfg);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.stop_reason.empty());
}

TEST(Lbfgs, StartingAtOptimumConvergesImmediately) {
  auto r = minimize_lbfgs(rosenbrock, {1.0, 1.0}, {});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
}

}  // namespace
}  // namespace itemseg
