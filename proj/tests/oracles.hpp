#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "itemseg/crf.hpp"

namespace itemseg::oracle {

struct CrfInstance {
  CrfModel model;
  std::vector<LineFeatures> features;
  std::vector<std::size_t> gold;
};

/// Random CRF with every (feature, label) pair registered and weights drawn
/// from U(-2, 2). Feature values are in [0, 1] with some features absent.
inline CrfInstance random_crf_instance(std::mt19937_64& rng, std::size_t n, std::size_t n_labels,
                                       std::size_t n_features = 4, double l2 = 0.0) {
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < n_labels; ++k) labels.push_back("L" + std::to_string(k));
  CrfInstance inst{CrfModel(labels, l2), {}, {}};
  std::uniform_real_distribution<double> w(-2.0, 2.0), v(0.0, 1.0);
  std::bernoulli_distribution present(0.7);
  std::uniform_int_distribution<std::size_t> lab(0, n_labels - 1);
  for (std::size_t f = 0; f < n_features; ++f) {
    for (std::size_t y = 0; y < n_labels; ++y) {
      inst.model.add_state_weight("f" + std::to_string(f), y);
      inst.model.set_state_weight("f" + std::to_string(f), y, w(rng));
    }
  }
  for (std::size_t i = 0; i < n_labels; ++i)
    for (std::size_t j = 0; j < n_labels; ++j) inst.model.set_transition(i, j, w(rng));
  for (std::size_t t = 0; t < n; ++t) {
    LineFeatures lf;
    for (std::size_t f = 0; f < n_features; ++f)
      if (present(rng)) lf["f" + std::to_string(f)] = v(rng);
    inst.features.push_back(std::move(lf));
    inst.gold.push_back(lab(rng));
  }
  return inst;
}

/// Direct score: sum of weight * value per position plus transitions.
inline double direct_score(const CrfModel& m, const std::vector<LineFeatures>& feats,
                           const std::vector<std::size_t>& y) {
  double s = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    for (const auto& [name, val] : feats[t]) s += m.state_weight(name, y[t]) * val;
    if (t > 0) s += m.transition(y[t - 1], y[t]);
  }
  return s;
}

struct Enumeration {
  double log_partition = 0.0;
  double max_score = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> argmax;
  std::vector<std::vector<double>> marginals;  // n x L
};

/// Visits all L^n labelings.
inline Enumeration enumerate(const CrfModel& m, const std::vector<LineFeatures>& feats) {
  const std::size_t n = feats.size(), L = m.num_labels();
  std::vector<std::size_t> y(n, 0);
  std::vector<double> scores;
  std::vector<std::vector<std::size_t>> paths;
  Enumeration e;
  while (true) {
    double s = direct_score(m, feats, y);
    scores.push_back(s);
    paths.push_back(y);
    if (s > e.max_score) {
      e.max_score = s;
      e.argmax = y;
    }
    std::size_t k = 0;
    while (k < n && ++y[k] == L) y[k++] = 0;
    if (k == n) break;
  }
  double hi = *std::max_element(scores.begin(), scores.end());
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - hi);
  e.log_partition = hi + std::log(acc);
  e.marginals.assign(n, std::vector<double>(L, 0.0));
  for (std::size_t p = 0; p < paths.size(); ++p) {
    double prob = std::exp(scores[p] - e.log_partition);
    for (std::size_t t = 0; t < n; ++t) e.marginals[t][paths[p][t]] += prob;
  }
  return e;
}

/// Central-difference gradient of f at x.
template <typename F>
std::vector<double> numeric_gradient(F&& f, std::vector<double> x, double step) {
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    double keep = x[k];
    x[k] = keep + step;
    double up = f(x);
    x[k] = keep - step;
    double down = f(x);
    x[k] = keep;
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

/// |a - b| / max(|a|, |b|, floor); the floor keeps exact zeros comparable.
inline double rel_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({floor, std::abs(a), std::abs(b)});
}

}  // namespace itemseg::oracle
