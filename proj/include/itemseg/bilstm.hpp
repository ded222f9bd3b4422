#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itemseg/document.hpp"
#include "itemseg/embeddings.hpp"

namespace itemseg {

/// Parameter tensors, in storage and file order. Gate blocks inside the
/// recurrent tensors are stacked input, forget, cell candidate, output.
enum class LstmTensor : std::uint8_t {
  w_fwd,   // 4H x D
  u_fwd,   // 4H x H
  b_fwd,   // 4H x 1
  w_bwd,   // 4H x D
  u_bwd,   // 4H x H
  b_bwd,   // 4H x 1
  w_out,   // L x 2H (forward half first)
  b_out,   // L x 1
};
inline constexpr std::size_t kLstmTensorCount = 8;
std::string_view to_string(LstmTensor t);

/// Bidirectional LSTM line tagger. All parameters live in one flat vector;
/// tensor() returns column-major views into it.
template <typename Scalar>
class BiLstmModel {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using TensorMap = Eigen::Map<Matrix>;
  using ConstTensorMap = Eigen::Map<const Matrix>;

  BiLstmModel() = default;
  /// Zero-initialized parameters.
  BiLstmModel(std::size_t input_dim, std::size_t hidden_dim, std::vector<std::string> labels);

  /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, forget-gate biases set to 1.
  void initialize(std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  std::size_t num_labels() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::pair<std::size_t, std::size_t> shape(LstmTensor t) const;
  std::size_t offset(LstmTensor t) const;
  TensorMap tensor(LstmTensor t);
  ConstTensorMap tensor(LstmTensor t) const;

  Vector& parameters() { return theta_; }
  const Vector& parameters() const { return theta_; }
  std::size_t num_params() const { return static_cast<std::size_t>(theta_.size()); }

  /// n x L label scores. Throws ModelError on a width mismatch or empty input.
  Matrix forward(const Matrix& x) const;

  friend bool operator==(const BiLstmModel& a, const BiLstmModel& b) {
    return a.input_dim_ == b.input_dim_ && a.hidden_dim_ == b.hidden_dim_ && a.labels_ == b.labels_ &&
           a.theta_ == b.theta_;
  }

 private:
  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  std::vector<std::string> labels_;
  Vector theta_;
};

extern template class BiLstmModel<double>;
extern template class BiLstmModel<float>;

template <typename Scalar>
struct LstmExample {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> x;  // n x D
  std::vector<std::size_t> labels;                         // label indices
};

template <typename Scalar>
struct LstmLossResult {
  Scalar loss = 0;  // mean cross-entropy over all lines in the batch
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gradient;  // same layout as parameters()
};

/// Mean per-line cross-entropy and its gradient by backpropagation through
/// time. Lines of every document are pooled before averaging.
template <typename Scalar>
LstmLossResult<Scalar> loss_and_gradients(const BiLstmModel<Scalar>& model,
                                          std::span<const LstmExample<Scalar>> batch);

/// Row-wise softmax.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> softmax_rows(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& scores);

struct LstmTrainConfig {
  std::size_t hidden_dim = 256;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 200;
  int patience = 10;
  std::uint64_t seed = 42;
  /// Documents with fnv1a64(doc_id) % validation_modulus == 0 go to validation.
  std::uint64_t validation_modulus = 10;
};

struct LstmTrainState {
  int epoch = 0;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  int epochs_since_improvement = 0;
  std::uint64_t adam_steps = 0;
  std::vector<double> val_loss_history;  // per epoch
  std::vector<double> train_loss_history;
  std::size_t train_docs = 0;
  std::size_t val_docs = 0;
};

/// Trains on documents with labels; embeddings are looked up by doc_id and
/// must all be present with matching line counts (checked before training).
/// Returns the parameters of the epoch with the lowest validation loss.
template <typename Scalar>
BiLstmModel<Scalar> train_bilstm(std::span<const AnnotatedDocument> corpus, const EmbeddingFile& embeddings,
                                 const LstmTrainConfig& config, LstmTrainState* state = nullptr);

/// Argmax per line (ties to the lower index), repair, span conversion.
template <typename Scalar>
std::vector<LineLabel> label_lstm(const BiLstmModel<Scalar>& model, const EmbeddingMatrix& emb,
                                  std::size_t n_lines);
template <typename Scalar>
std::vector<ItemSpan> segment_lstm(const BiLstmModel<Scalar>& model, const EmbeddingMatrix& emb,
                                   std::size_t n_lines);

/// BLSM file: "BLSM" | u32 version | u32 input_dim | u32 hidden_dim | u32 n_labels |
/// labels as (u32 length, bytes) | f64 tensors in LstmTensor order, column-major.
inline constexpr std::uint32_t kLstmFileVersion = 1;
template <typename Scalar>
std::string serialize_bilstm(const BiLstmModel<Scalar>& model);
template <typename Scalar>
BiLstmModel<Scalar> parse_bilstm(std::string_view bytes);
template <typename Scalar>
void save_bilstm(const BiLstmModel<Scalar>& model, const std::filesystem::path& path);
template <typename Scalar>
BiLstmModel<Scalar> load_bilstm(const std::filesystem::path& path);

}  // namespace itemseg
