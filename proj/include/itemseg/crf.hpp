#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "itemseg/crf_features.hpp"
#include "itemseg/document.hpp"

namespace itemseg {

/// Linear-chain CRF parameters. State weights exist only for the
/// (feature, label) pairs registered with add_state_weight (at training time,
/// the pairs observed in gold data); all other pairs score 0. Transition
/// weights are dense over label pairs.
class CrfModel {
 public:
  CrfModel() = default;
  CrfModel(std::vector<std::string> labels, double l2_lambda);

  std::size_t num_labels() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::size_t> label_index(std::string_view label) const;
  double l2_lambda() const { return l2_lambda_; }
  void set_l2_lambda(double lambda) { l2_lambda_ = lambda; }

  /// Registers (feature, label) and returns its parameter index; idempotent.
  std::size_t add_state_weight(const std::string& feature, std::size_t label);
  double state_weight(const std::string& feature, std::size_t label) const;
  void set_state_weight(const std::string& feature, std::size_t label, double w);

  double transition(std::size_t from, std::size_t to) const { return transitions_(from, to); }
  void set_transition(std::size_t from, std::size_t to, double w) { transitions_(from, to) = w; }
  const Eigen::MatrixXd& transitions() const { return transitions_; }

  std::size_t num_state_params() const { return state_weights_.size(); }
  std::size_t num_features() const { return feature_names_.size(); }

  /// Flat parameter vector: state weights in registration order, then the
  /// transition matrix row-major.
  std::size_t num_params() const { return state_weights_.size() + num_labels() * num_labels(); }
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);

  /// Feature ids and values of one sequence; unknown features are dropped.
  struct Compiled {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> positions;
    std::size_t size() const { return positions.size(); }
  };
  Compiled compile(std::span<const LineFeatures> features) const;

  /// n x L matrix of per-position label scores.
  Eigen::MatrixXd state_scores(const Compiled& seq) const;

  /// (label, parameter index) pairs registered for a feature id.
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& feature_params(std::uint32_t feature) const {
    return feature_params_[feature];
  }
  const std::string& feature_name(std::uint32_t feature) const { return feature_names_[feature]; }

  friend bool operator==(const CrfModel& a, const CrfModel& b);

 private:
  std::vector<std::string> labels_;
  double l2_lambda_ = 1.0;
  std::unordered_map<std::string, std::uint32_t> feature_ids_;
  std::vector<std::string> feature_names_;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> feature_params_;
  std::vector<double> state_weights_;
  Eigen::MatrixXd transitions_;
};

/// Sum of state and transition potentials of a labeling (label indices).
double crf_score(const CrfModel& model, std::span<const LineFeatures> features, std::span<const std::size_t> labels);
double crf_score(const CrfModel& model, const CrfModel::Compiled& seq, std::span<const std::size_t> labels);

struct ForwardBackwardResult {
  double log_partition = 0.0;
  Eigen::MatrixXd marginals;      // n x L, rows sum to 1
  Eigen::MatrixXd pairwise_sum;   // L x L, sum over t of P(y[t-1]=i, y[t]=j)
  std::vector<Eigen::MatrixXd> pairwise;  // per t >= 1, only when requested
};

/// Exact inference in log space. Throws ModelError for an empty sequence.
ForwardBackwardResult forward_backward(const CrfModel& model, const CrfModel::Compiled& seq,
                                       bool keep_pairwise = false);
ForwardBackwardResult forward_backward(const CrfModel& model, std::span<const LineFeatures> features,
                                       bool keep_pairwise = false);

/// Argmax labeling; ties go to the lower label index. Throws on empty input.
std::vector<std::size_t> viterbi_decode(const CrfModel& model, const CrfModel::Compiled& seq);
std::vector<std::size_t> viterbi_decode(const CrfModel& model, std::span<const LineFeatures> features);

struct CrfExample {
  CrfModel::Compiled features;
  std::vector<std::size_t> labels;
};

/// Regularized negative log-likelihood of a batch and its gradient over
/// model.parameters() order.
struct NllResult {
  double loss = 0.0;
  std::vector<double> gradient;
};
NllResult nll_and_gradient(const CrfModel& model, std::span<const CrfExample> batch);

struct CrfTrainConfig {
  double l2_lambda = 1.0;
  double tol = 1e-5;
  int max_iter = 300;
  int memory = 6;
};

struct CrfTrainReport {
  std::vector<double> loss_history;  // one entry per accepted iterate, starting at the initial point
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
};

/// Builds the label set and feature vocabulary from the corpus and fits
/// weights with L-BFGS. Throws ModelError on an empty corpus or invalid gold.
CrfModel train_crf(std::span<const AnnotatedDocument> corpus, const CrfTrainConfig& config,
                   CrfTrainReport* report = nullptr);

/// Viterbi decode, repair to a valid sequence, convert to spans.
std::vector<ItemSpan> segment_crf(const CrfModel& model, std::span<const TextLine> lines);

/// Per-line labels from segment_crf before span conversion (already repaired).
std::vector<LineLabel> label_crf(const CrfModel& model, std::span<const TextLine> lines);

void save_crf_model(const CrfModel& model, const std::filesystem::path& path);
std::string serialize_crf_model(const CrfModel& model);
CrfModel load_crf_model(const std::filesystem::path& path);
CrfModel parse_crf_model(std::string_view json_text);

}  // namespace itemseg
