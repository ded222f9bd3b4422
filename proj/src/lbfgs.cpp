#include "itemseg/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <numeric>

#include "itemseg/error.hpp"

namespace itemseg {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct Pair {
  std::vector<double> s, y;
  double rho;
};

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& objective, std::vector<double> x0, const LbfgsConfig& config) {
  const std::size_t n = x0.size();
  LbfgsResult res;
  res.x = std::move(x0);
  std::vector<double> g(n), g_new(n), x_new(n), d(n);
  res.f = objective(res.x, g);
  if (!std::isfinite(res.f)) throw ModelError("objective is not finite at the start point");
  res.history.push_back(res.f);

  std::deque<Pair> mem;
  std::vector<double> alpha(static_cast<std::size_t>(std::max(config.memory, 1)));

  for (;;) {
    double gnorm = norm(g);
    if (n == 0 || gnorm / std::max(1.0, norm(res.x)) < config.tol) {
      res.converged = true;
      res.stop_reason = "gradient norm below tolerance";
      return res;
    }
    if (res.iterations >= config.max_iter) {
      res.stop_reason = "iteration limit reached";
      return res;
    }

    // Two-loop recursion.
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    for (std::size_t k = mem.size(); k-- > 0;) {
      alpha[k] = mem[k].rho * dot(mem[k].s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * mem[k].y[i];
    }
    if (!mem.empty()) {
      const Pair& last = mem.back();
      double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (auto& v : d) v *= gamma;
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
      double beta = mem[k].rho * dot(mem[k].y, d);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * mem[k].s[i];
    }

    double slope = dot(g, d);
    if (slope >= 0.0) {
      // Not a descent direction; restart from steepest descent.
      mem.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -gnorm * gnorm;
    }

    double step = mem.empty() ? 1.0 / gnorm : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < config.max_line_search; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + step * d[i];
      f_new = objective(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.stop_reason = "line search failed";
      return res;
    }

    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_new[i] - res.x[i];
      p.y[i] = g_new[i] - g[i];
    }
    double sy = dot(p.s, p.y);
    if (sy > 1e-10) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (mem.size() > static_cast<std::size_t>(std::max(config.memory, 1))) mem.pop_front();
    }

    double f_old = res.f;
    res.x.swap(x_new);
    g.swap(g_new);
    res.f = f_new;
    ++res.iterations;
    res.history.push_back(res.f);
    if (std::abs(f_old - res.f) <= 1e-12 * std::max({1.0, std::abs(f_old), std::abs(res.f)})) {
      res.converged = true;
      res.stop_reason = "objective stopped decreasing";
      return res;
    }
  }
}

}  // namespace itemseg
