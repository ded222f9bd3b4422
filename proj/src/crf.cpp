#include "itemseg/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "itemseg/error.hpp"
#include "itemseg/util.hpp"
#include "json.hpp"

namespace itemseg {

CrfModel::CrfModel(std::vector<std::string> labels, double l2_lambda)
    : labels_(std::move(labels)),
      l2_lambda_(l2_lambda),
      transitions_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels_.size()),
                                         static_cast<Eigen::Index>(labels_.size()))) {
  if (labels_.empty()) throw ModelError("CRF label set is empty");
}

std::optional<std::size_t> CrfModel::label_index(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

std::size_t CrfModel::add_state_weight(const std::string& feature, std::size_t label) {
  auto [it, inserted] = feature_ids_.try_emplace(feature, static_cast<std::uint32_t>(feature_names_.size()));
  if (inserted) {
    feature_names_.push_back(feature);
    feature_params_.emplace_back();
  }
  auto& params = feature_params_[it->second];
  for (const auto& [l, p] : params) {
    if (l == label) return p;
  }
  std::size_t index = state_weights_.size();
  params.emplace_back(static_cast<std::uint32_t>(label), static_cast<std::uint32_t>(index));
  state_weights_.push_back(0.0);
  return index;
}

double CrfModel::state_weight(const std::string& feature, std::size_t label) const {
  auto it = feature_ids_.find(feature);
  if (it == feature_ids_.end()) return 0.0;
  for (const auto& [l, p] : feature_params_[it->second]) {
    if (l == label) return state_weights_[p];
  }
  return 0.0;
}

void CrfModel::set_state_weight(const std::string& feature, std::size_t label, double w) {
  state_weights_[add_state_weight(feature, label)] = w;
}

std::vector<double> CrfModel::parameters() const {
  std::vector<double> out(state_weights_);
  const std::size_t L = num_labels();
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) out.push_back(transitions_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }
  return out;
}

void CrfModel::set_parameters(std::span<const double> params) {
  if (params.size() != num_params()) throw ModelError("parameter vector has the wrong length");
  std::copy_n(params.begin(), state_weights_.size(), state_weights_.begin());
  const std::size_t L = num_labels();
  std::size_t k = state_weights_.size();
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) transitions_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = params[k++];
  }
}

CrfModel::Compiled CrfModel::compile(std::span<const LineFeatures> features) const {
  Compiled seq;
  seq.positions.resize(features.size());
  for (std::size_t t = 0; t < features.size(); ++t) {
    for (const auto& [name, value] : features[t]) {
      if (value == 0.0) continue;
      auto it = feature_ids_.find(name);
      if (it != feature_ids_.end()) seq.positions[t].emplace_back(it->second, value);
    }
  }
  return seq;
}

Eigen::MatrixXd CrfModel::state_scores(const Compiled& seq) const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(seq.size()), static_cast<Eigen::Index>(num_labels()));
  for (std::size_t t = 0; t < seq.size(); ++t) {
    for (const auto& [f, v] : seq.positions[t]) {
      for (const auto& [label, p] : feature_params_[f]) s(static_cast<Eigen::Index>(t), label) += state_weights_[p] * v;
    }
  }
  return s;
}

bool operator==(const CrfModel& a, const CrfModel& b) {
  if (a.labels_ != b.labels_ || a.l2_lambda_ != b.l2_lambda_ || a.transitions_ != b.transitions_) return false;
  if (a.state_weights_.size() != b.state_weights_.size()) return false;
  for (std::size_t f = 0; f < a.feature_names_.size(); ++f) {
    for (const auto& [label, p] : a.feature_params_[f]) {
      if (b.state_weight(a.feature_names_[f], label) != a.state_weights_[p]) return false;
    }
  }
  return true;
}

double crf_score(const CrfModel& model, const CrfModel::Compiled& seq, std::span<const std::size_t> labels) {
  if (labels.size() != seq.size()) throw ModelError("label and feature sequences differ in length");
  Eigen::MatrixXd s = model.state_scores(seq);
  double score = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    score += s(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(labels[t]));
    if (t > 0) score += model.transition(labels[t - 1], labels[t]);
  }
  return score;
}

double crf_score(const CrfModel& model, std::span<const LineFeatures> features, std::span<const std::size_t> labels) {
  return crf_score(model, model.compile(features), labels);
}

ForwardBackwardResult forward_backward(const CrfModel& model, const CrfModel::Compiled& seq, bool keep_pairwise) {
  const auto n = static_cast<Eigen::Index>(seq.size());
  const auto L = static_cast<Eigen::Index>(model.num_labels());
  if (n == 0) throw ModelError("forward-backward on an empty sequence");

  const Eigen::MatrixXd S = model.state_scores(seq);
  const Eigen::MatrixXd& T = model.transitions();
  const Eigen::MatrixXd expT = T.array().exp().matrix();

  // log alpha and log beta; each recursion step shifts by the running max so
  // that only bounded exponentials enter the matrix-vector product with exp(T).
  Eigen::MatrixXd alpha(n, L), beta(n, L);
  alpha.row(0) = S.row(0);
  Eigen::VectorXd v(L), w(L);
  for (Eigen::Index t = 1; t < n; ++t) {
    double m = alpha.row(t - 1).maxCoeff();
    v = (alpha.row(t - 1).array() - m).exp().transpose();
    w.noalias() = expT.transpose() * v;
    alpha.row(t) = S.row(t).array() + m + w.array().log().transpose();
  }
  beta.row(n - 1).setZero();
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    Eigen::RowVectorXd next = S.row(t + 1) + beta.row(t + 1);
    double m = next.maxCoeff();
    v = (next.array() - m).exp().transpose();
    w.noalias() = expT * v;
    beta.row(t) = (m + w.array().log()).transpose();
  }
  double m = alpha.row(n - 1).maxCoeff();
  double log_z = m + std::log((alpha.row(n - 1).array() - m).exp().sum());

  ForwardBackwardResult out;
  out.log_partition = log_z;
  out.marginals = ((alpha + beta).array() - log_z).exp().matrix();
  out.pairwise_sum = Eigen::MatrixXd::Zero(L, L);
  if (keep_pairwise) out.pairwise.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index t = 1; t < n; ++t) {
    double ca = alpha.row(t - 1).maxCoeff();
    Eigen::RowVectorXd right = S.row(t) + beta.row(t);
    double cb = right.maxCoeff();
    Eigen::VectorXd a = (alpha.row(t - 1).array() - ca).exp().transpose();
    Eigen::RowVectorXd b = (right.array() - cb).exp();
    Eigen::MatrixXd pair = (a.asDiagonal() * expT * b.asDiagonal()) * std::exp(ca + cb - log_z);
    out.pairwise_sum += pair;
    if (keep_pairwise) out.pairwise.push_back(std::move(pair));
  }
  return out;
}

ForwardBackwardResult forward_backward(const CrfModel& model, std::span<const LineFeatures> features,
                                       bool keep_pairwise) {
  return forward_backward(model, model.compile(features), keep_pairwise);
}

std::vector<std::size_t> viterbi_decode(const CrfModel& model, const CrfModel::Compiled& seq) {
  const auto n = static_cast<Eigen::Index>(seq.size());
  const auto L = static_cast<Eigen::Index>(model.num_labels());
  if (n == 0) throw ModelError("Viterbi decoding of an empty sequence");
  const Eigen::MatrixXd S = model.state_scores(seq);
  const Eigen::MatrixXd& T = model.transitions();

  Eigen::MatrixXd delta(n, L);
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> back(n, L);
  delta.row(0) = S.row(0);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      Eigen::Index best_i = 0;
      double best = delta(t - 1, 0) + T(0, j);
      for (Eigen::Index i = 1; i < L; ++i) {
        double cand = delta(t - 1, i) + T(i, j);
        if (cand > best) {
          best = cand;
          best_i = i;
        }
      }
      delta(t, j) = best + S(t, j);
      back(t, j) = best_i;
    }
  }
  Eigen::Index last = 0;
  for (Eigen::Index j = 1; j < L; ++j) {
    if (delta(n - 1, j) > delta(n - 1, last)) last = j;
  }
  std::vector<std::size_t> path(static_cast<std::size_t>(n));
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    path[static_cast<std::size_t>(t)] = static_cast<std::size_t>(last);
    if (t > 0) last = back(t, last);
  }
  return path;
}

std::vector<std::size_t> viterbi_decode(const CrfModel& model, std::span<const LineFeatures> features) {
  return viterbi_decode(model, model.compile(features));
}

NllResult nll_and_gradient(const CrfModel& model, std::span<const CrfExample> batch) {
  const std::size_t n_state = model.num_state_params();
  const std::size_t L = model.num_labels();
  NllResult out;
  out.gradient.assign(model.num_params(), 0.0);
  std::span<double> g_state(out.gradient.data(), n_state);
  std::span<double> g_trans(out.gradient.data() + n_state, L * L);

  for (const auto& ex : batch) {
    if (ex.labels.size() != ex.features.size()) throw ModelError("example labels and features differ in length");
    if (ex.labels.empty()) continue;
    ForwardBackwardResult fb = forward_backward(model, ex.features);
    out.loss += fb.log_partition - crf_score(model, ex.features, ex.labels);

    for (std::size_t t = 0; t < ex.features.size(); ++t) {
      for (const auto& [f, v] : ex.features.positions[t]) {
        for (const auto& [label, p] : model.feature_params(f)) {
          g_state[p] += v * fb.marginals(static_cast<Eigen::Index>(t), label);
          if (label == ex.labels[t]) g_state[p] -= v;
        }
      }
      if (t > 0) g_trans[ex.labels[t - 1] * L + ex.labels[t]] -= 1.0;
    }
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < L; ++j) {
        g_trans[i * L + j] += fb.pairwise_sum(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }

  const double lambda = model.l2_lambda();
  if (lambda != 0.0) {
    std::vector<double> w = model.parameters();
    double sq = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      sq += w[k] * w[k];
      out.gradient[k] += lambda * w[k];
    }
    out.loss += 0.5 * lambda * sq;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model file

std::string serialize_crf_model(const CrfModel& model) {
  using nlohmann::json;
  std::vector<std::pair<std::string, double>> entries;
  for (std::uint32_t f = 0; f < model.num_features(); ++f) {
    for (const auto& [label, p] : model.feature_params(f)) {
      entries.emplace_back(model.feature_name(f) + '\x1f' + model.labels()[label],
                           model.state_weight(model.feature_name(f), label));
    }
  }
  std::sort(entries.begin(), entries.end());

  std::string out = "{\"version\": 1, \"labels\": ";
  out += json(model.labels()).dump();
  out += ", \"l2\": " + format_double(model.l2_lambda());
  out += ", \"state_weights\": {";
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (k) out += ", ";
    out += json(entries[k].first).dump(-1, ' ', false, json::error_handler_t::replace);
    out += ": " + format_double(entries[k].second);
  }
  out += "}, \"transitions\": [";
  for (std::size_t i = 0; i < model.num_labels(); ++i) {
    if (i) out += ", ";
    out += '[';
    for (std::size_t j = 0; j < model.num_labels(); ++j) {
      if (j) out += ", ";
      out += format_double(model.transition(i, j));
    }
    out += ']';
  }
  out += "]}\n";
  return out;
}

void save_crf_model(const CrfModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_crf_model(model));
}

CrfModel parse_crf_model(std::string_view text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("CRF model is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1) throw ModelError("unsupported CRF model version");
    CrfModel model(j.at("labels").get<std::vector<std::string>>(), j.at("l2").get<double>());
    const std::size_t L = model.num_labels();
    for (const auto& [key, value] : j.at("state_weights").items()) {
      auto sep = key.rfind('\x1f');
      if (sep == std::string::npos) throw ModelError("state weight key lacks a label separator: " + key);
      auto label = model.label_index(key.substr(sep + 1));
      if (!label) throw ModelError("state weight refers to unknown label: " + key.substr(sep + 1));
      model.set_state_weight(key.substr(0, sep), *label, value.get<double>());
    }
    const auto& trans = j.at("transitions");
    if (trans.size() != L) throw ModelError("transition matrix has the wrong number of rows");
    for (std::size_t i = 0; i < L; ++i) {
      if (trans[i].size() != L) throw ModelError("transition matrix has a row of the wrong length");
      for (std::size_t k = 0; k < L; ++k) model.set_transition(i, k, trans[i][k].get<double>());
    }
    return model;
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed CRF model: ") + e.what());
  }
}

CrfModel load_crf_model(const std::filesystem::path& path) { return parse_crf_model(read_file(path)); }

}  // namespace itemseg
