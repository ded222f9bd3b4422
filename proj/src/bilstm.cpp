#include "itemseg/bilstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "itemseg/error.hpp"
#include "itemseg/util.hpp"

namespace itemseg {

std::string_view to_string(LstmTensor t) {
  static constexpr std::array<std::string_view, kLstmTensorCount> kNames = {
      "w_fwd", "u_fwd", "b_fwd", "w_bwd", "u_bwd", "b_bwd", "w_out", "b_out"};
  return kNames[static_cast<std::size_t>(t)];
}

template <typename Scalar>
BiLstmModel<Scalar>::BiLstmModel(std::size_t input_dim, std::size_t hidden_dim, std::vector<std::string> labels)
    : input_dim_(input_dim), hidden_dim_(hidden_dim), labels_(std::move(labels)) {
  if (input_dim_ == 0 || hidden_dim_ == 0 || labels_.empty()) throw ModelError("Bi-LSTM dimensions must be positive");
  theta_ = Vector::Zero(static_cast<Eigen::Index>(offset(LstmTensor::b_out) + labels_.size()));
}

template <typename Scalar>
std::pair<std::size_t, std::size_t> BiLstmModel<Scalar>::shape(LstmTensor t) const {
  const std::size_t H = hidden_dim_, D = input_dim_, L = labels_.size();
  switch (t) {
    case LstmTensor::w_fwd:
    case LstmTensor::w_bwd:
      return {4 * H, D};
    case LstmTensor::u_fwd:
    case LstmTensor::u_bwd:
      return {4 * H, H};
    case LstmTensor::b_fwd:
    case LstmTensor::b_bwd:
      return {4 * H, 1};
    case LstmTensor::w_out:
      return {L, 2 * H};
    case LstmTensor::b_out:
      return {L, 1};
  }
  return {0, 0};
}

template <typename Scalar>
std::size_t BiLstmModel<Scalar>::offset(LstmTensor t) const {
  std::size_t off = 0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(t); ++k) {
    auto [r, c] = shape(static_cast<LstmTensor>(k));
    off += r * c;
  }
  return off;
}

template <typename Scalar>
typename BiLstmModel<Scalar>::TensorMap BiLstmModel<Scalar>::tensor(LstmTensor t) {
  auto [r, c] = shape(t);
  return TensorMap(theta_.data() + offset(t), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

template <typename Scalar>
typename BiLstmModel<Scalar>::ConstTensorMap BiLstmModel<Scalar>::tensor(LstmTensor t) const {
  auto [r, c] = shape(t);
  return ConstTensorMap(theta_.data() + offset(t), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

template <typename Scalar>
void BiLstmModel<Scalar>::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden_dim_));
  std::uniform_real_distribution<double> dist(-k, k);
  for (Eigen::Index i = 0; i < theta_.size(); ++i) theta_[i] = static_cast<Scalar>(dist(rng));
  const auto H = static_cast<Eigen::Index>(hidden_dim_);
  tensor(LstmTensor::b_fwd).middleRows(H, H).setOnes();
  tensor(LstmTensor::b_bwd).middleRows(H, H).setOnes();
}

namespace {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  return Scalar(1) / (Scalar(1) + std::exp(-z));
}

/// Activations of one direction, one column per time step (indexed by line).
template <typename Scalar>
struct DirectionCache {
  Mat<Scalar> gates;  // 4H x n: i, f, g, o after their nonlinearities
  Mat<Scalar> cell;   // H x n
  Mat<Scalar> hidden; // H x n
};

template <typename Scalar>
DirectionCache<Scalar> run_direction(const Eigen::Map<const Mat<Scalar>>& w, const Eigen::Map<const Mat<Scalar>>& u,
                                     const Eigen::Map<const Mat<Scalar>>& b, const Mat<Scalar>& x, bool reverse) {
  const Eigen::Index n = x.rows();
  const Eigen::Index H = u.cols();
  DirectionCache<Scalar> c;
  c.gates.noalias() = w * x.transpose();
  c.gates.colwise() += b.col(0);
  c.cell.resize(H, n);
  c.hidden.resize(H, n);
  Vec<Scalar> h_prev = Vec<Scalar>::Zero(H), c_prev = Vec<Scalar>::Zero(H), z(4 * H);
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Index t = reverse ? n - 1 - s : s;
    z = c.gates.col(t);
    z.noalias() += u * h_prev;
    for (Eigen::Index k = 0; k < H; ++k) {
      Scalar i = sigmoid(z[k]);
      Scalar f = sigmoid(z[H + k]);
      Scalar g = std::tanh(z[2 * H + k]);
      Scalar o = sigmoid(z[3 * H + k]);
      c.gates(k, t) = i;
      c.gates(H + k, t) = f;
      c.gates(2 * H + k, t) = g;
      c.gates(3 * H + k, t) = o;
      Scalar cell = f * c_prev[k] + i * g;
      c.cell(k, t) = cell;
      c.hidden(k, t) = o * std::tanh(cell);
    }
    c_prev = c.cell.col(t);
    h_prev = c.hidden.col(t);
  }
  return c;
}

/// Accumulates dW, dU, db of one direction given dL/dh at every step.
template <typename Scalar>
void backprop_direction(const DirectionCache<Scalar>& c, const Eigen::Map<const Mat<Scalar>>& u, const Mat<Scalar>& x,
                        const Mat<Scalar>& d_hidden, bool reverse, Eigen::Map<Mat<Scalar>> dw,
                        Eigen::Map<Mat<Scalar>> du, Eigen::Map<Mat<Scalar>> db) {
  const Eigen::Index n = x.rows();
  const Eigen::Index H = u.cols();
  Mat<Scalar> dz(4 * H, n);
  Mat<Scalar> h_prev_all = Mat<Scalar>::Zero(H, n);
  Vec<Scalar> dh_next = Vec<Scalar>::Zero(H), dc_next = Vec<Scalar>::Zero(H);
  for (Eigen::Index s = n - 1; s >= 0; --s) {
    const Eigen::Index t = reverse ? n - 1 - s : s;
    const Eigen::Index tp = reverse ? t + 1 : t - 1;
    const bool has_prev = s > 0;
    if (has_prev) h_prev_all.col(t) = c.hidden.col(tp);
    for (Eigen::Index k = 0; k < H; ++k) {
      Scalar i = c.gates(k, t), f = c.gates(H + k, t), g = c.gates(2 * H + k, t), o = c.gates(3 * H + k, t);
      Scalar cp = has_prev ? c.cell(k, tp) : Scalar(0);
      Scalar tc = std::tanh(c.cell(k, t));
      Scalar dh = d_hidden(k, t) + dh_next[k];
      Scalar d_o = dh * tc;
      Scalar dc = dh * o * (Scalar(1) - tc * tc) + dc_next[k];
      dz(k, t) = dc * g * i * (Scalar(1) - i);
      dz(H + k, t) = dc * cp * f * (Scalar(1) - f);
      dz(2 * H + k, t) = dc * i * (Scalar(1) - g * g);
      dz(3 * H + k, t) = d_o * o * (Scalar(1) - o);
      dc_next[k] = dc * f;
    }
    dh_next.noalias() = u.transpose() * dz.col(t);
  }
  dw.noalias() += dz * x;
  du.noalias() += dz * h_prev_all.transpose();
  db.col(0) += dz.rowwise().sum();
}

template <typename Scalar>
struct ForwardPass {
  DirectionCache<Scalar> fwd, bwd;
  Mat<Scalar> scores;  // n x L
};

template <typename Scalar>
ForwardPass<Scalar> forward_pass(const BiLstmModel<Scalar>& m, const Mat<Scalar>& x) {
  if (x.rows() == 0) throw ModelError("Bi-LSTM input has no lines");
  if (static_cast<std::size_t>(x.cols()) != m.input_dim()) {
    throw ModelError("embedding width " + std::to_string(x.cols()) + " does not match the model input width " +
                     std::to_string(m.input_dim()));
  }
  const auto H = static_cast<Eigen::Index>(m.hidden_dim());
  ForwardPass<Scalar> p;
  p.fwd = run_direction<Scalar>(m.tensor(LstmTensor::w_fwd), m.tensor(LstmTensor::u_fwd),
                                m.tensor(LstmTensor::b_fwd), x, false);
  p.bwd = run_direction<Scalar>(m.tensor(LstmTensor::w_bwd), m.tensor(LstmTensor::u_bwd),
                                m.tensor(LstmTensor::b_bwd), x, true);
  auto w_out = m.tensor(LstmTensor::w_out);
  Mat<Scalar> s = w_out.leftCols(H) * p.fwd.hidden;
  s.noalias() += w_out.rightCols(H) * p.bwd.hidden;
  s.colwise() += m.tensor(LstmTensor::b_out).col(0);
  p.scores = s.transpose();
  return p;
}

/// Sum over lines of -log softmax(scores)[label].
template <typename Scalar>
Scalar cross_entropy_sum(const Mat<Scalar>& scores, const std::vector<std::size_t>& labels) {
  Scalar total = 0;
  for (Eigen::Index t = 0; t < scores.rows(); ++t) {
    Scalar m = scores.row(t).maxCoeff();
    Scalar lse = m + std::log((scores.row(t).array() - m).exp().sum());
    total += lse - scores(t, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(t)]));
  }
  return total;
}

}  // namespace

template <typename Scalar>
typename BiLstmModel<Scalar>::Matrix BiLstmModel<Scalar>::forward(const Matrix& x) const {
  return forward_pass(*this, x).scores;
}

template class BiLstmModel<double>;
template class BiLstmModel<float>;

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> softmax_rows(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& scores) {
  Mat<Scalar> p(scores.rows(), scores.cols());
  for (Eigen::Index t = 0; t < scores.rows(); ++t) {
    Scalar m = scores.row(t).maxCoeff();
    p.row(t) = (scores.row(t).array() - m).exp();
    p.row(t) /= p.row(t).sum();
  }
  return p;
}

template <typename Scalar>
LstmLossResult<Scalar> loss_and_gradients(const BiLstmModel<Scalar>& model,
                                          std::span<const LstmExample<Scalar>> batch) {
  if (batch.empty()) throw ModelError("loss_and_gradients needs a non-empty batch");
  const auto H = static_cast<Eigen::Index>(model.hidden_dim());
  LstmLossResult<Scalar> out;
  out.gradient = Vec<Scalar>::Zero(static_cast<Eigen::Index>(model.num_params()));
  auto view = [&](LstmTensor t) {
    auto [r, c] = model.shape(t);
    return Eigen::Map<Mat<Scalar>>(out.gradient.data() + model.offset(t), static_cast<Eigen::Index>(r),
                                   static_cast<Eigen::Index>(c));
  };
  std::size_t total_lines = 0;
  for (const auto& ex : batch) {
    if (ex.labels.size() != static_cast<std::size_t>(ex.x.rows())) {
      throw ModelError("example has " + std::to_string(ex.labels.size()) + " labels for " +
                       std::to_string(ex.x.rows()) + " lines");
    }
    ForwardPass<Scalar> p = forward_pass(model, ex.x);
    out.loss += cross_entropy_sum(p.scores, ex.labels);
    total_lines += ex.labels.size();

    Mat<Scalar> d_scores = softmax_rows<Scalar>(p.scores);  // n x L
    for (std::size_t t = 0; t < ex.labels.size(); ++t) d_scores(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(ex.labels[t])) -= Scalar(1);

    auto w_out = model.tensor(LstmTensor::w_out);
    auto dw_out = view(LstmTensor::w_out);
    dw_out.leftCols(H).noalias() += d_scores.transpose() * p.fwd.hidden.transpose();
    dw_out.rightCols(H).noalias() += d_scores.transpose() * p.bwd.hidden.transpose();
    view(LstmTensor::b_out).col(0) += d_scores.colwise().sum().transpose();

    Mat<Scalar> dh_fwd = w_out.leftCols(H).transpose() * d_scores.transpose();
    Mat<Scalar> dh_bwd = w_out.rightCols(H).transpose() * d_scores.transpose();
    backprop_direction<Scalar>(p.fwd, model.tensor(LstmTensor::u_fwd), ex.x, dh_fwd, false, view(LstmTensor::w_fwd),
                               view(LstmTensor::u_fwd), view(LstmTensor::b_fwd));
    backprop_direction<Scalar>(p.bwd, model.tensor(LstmTensor::u_bwd), ex.x, dh_bwd, true, view(LstmTensor::w_bwd),
                               view(LstmTensor::u_bwd), view(LstmTensor::b_bwd));
  }
  const Scalar inv = Scalar(1) / static_cast<Scalar>(total_lines);
  out.loss *= inv;
  out.gradient *= inv;
  return out;
}

template <typename Scalar>
BiLstmModel<Scalar> train_bilstm(std::span<const AnnotatedDocument> corpus, const EmbeddingFile& embeddings,
                                 const LstmTrainConfig& config, LstmTrainState* state_out) {
  if (corpus.empty()) throw ModelError("cannot train a Bi-LSTM on an empty corpus");
  std::vector<std::string> labels = label_set_for(corpus);
  auto by_id = embeddings.index();

  std::vector<LstmExample<Scalar>> train, val;
  for (const auto& doc : corpus) {
    if (auto v = validate_label_sequence(doc.labels)) {
      throw ModelError("invalid gold labels in " + doc.doc_id + " at line " + std::to_string(v->position) + ": " +
                       v->reason);
    }
    auto it = by_id.find(doc.doc_id);
    if (it == by_id.end()) throw ModelError("no embeddings for document " + doc.doc_id);
    const EmbeddingMatrix& emb = *it->second;
    if (emb.n_lines() != doc.labels.size()) {
      throw ModelError("embeddings of " + doc.doc_id + " cover " + std::to_string(emb.n_lines()) + " lines, labels " +
                       std::to_string(doc.labels.size()));
    }
    if (doc.labels.empty()) continue;
    if (emb.dim() != embeddings.dim) throw ModelError("embedding width of " + doc.doc_id + " differs from the file");
    LstmExample<Scalar> ex;
    ex.x = emb.rows.template cast<Scalar>();
    for (const auto& l : doc.labels) {
      std::string name = to_string(l);
      ex.labels.push_back(static_cast<std::size_t>(std::find(labels.begin(), labels.end(), name) - labels.begin()));
    }
    bool is_val = config.validation_modulus > 0 && fnv1a64(doc.doc_id) % config.validation_modulus == 0;
    (is_val ? val : train).push_back(std::move(ex));
  }
  if (train.empty() && val.empty()) throw ModelError("corpus has no labeled lines");
  if (train.empty()) train.swap(val);
  const bool val_is_train = val.empty();
  const std::vector<LstmExample<Scalar>>& val_set = val_is_train ? train : val;

  BiLstmModel<Scalar> model(embeddings.dim, config.hidden_dim, labels);
  model.initialize(config.seed);

  auto evaluate = [&](const std::vector<LstmExample<Scalar>>& set) {
    double total = 0.0;
    std::size_t lines = 0;
    for (const auto& ex : set) {
      total += static_cast<double>(cross_entropy_sum(model.forward(ex.x), ex.labels));
      lines += ex.labels.size();
    }
    return total / static_cast<double>(lines);
  };

  LstmTrainState st;
  st.train_docs = train.size();
  st.val_docs = val_is_train ? 0 : val.size();
  st.best_val_loss = evaluate(val_set);
  Vec<Scalar> best = model.parameters();
  Vec<Scalar> m1 = Vec<Scalar>::Zero(model.parameters().size());
  Vec<Scalar> m2 = m1;
  const Scalar lr = static_cast<Scalar>(config.learning_rate);
  const Scalar b1 = static_cast<Scalar>(config.beta1), b2 = static_cast<Scalar>(config.beta2);
  const Scalar eps = static_cast<Scalar>(config.epsilon);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  for (st.epoch = 1; st.epoch <= config.max_epochs; ++st.epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double train_total = 0.0;
    std::size_t train_lines = 0;
    for (std::size_t idx : order) {
      auto r = loss_and_gradients<Scalar>(model, std::span<const LstmExample<Scalar>>(&train[idx], 1));
      train_total += static_cast<double>(r.loss) * static_cast<double>(train[idx].labels.size());
      train_lines += train[idx].labels.size();
      ++st.adam_steps;
      m1 = b1 * m1 + (Scalar(1) - b1) * r.gradient;
      m2 = b2 * m2 + (Scalar(1) - b2) * r.gradient.cwiseAbs2();
      const Scalar c1 = Scalar(1) - static_cast<Scalar>(std::pow(config.beta1, static_cast<double>(st.adam_steps)));
      const Scalar c2 = Scalar(1) - static_cast<Scalar>(std::pow(config.beta2, static_cast<double>(st.adam_steps)));
      model.parameters().array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
    }
    if (!model.parameters().allFinite()) throw ModelError("Bi-LSTM training diverged");
    st.train_loss_history.push_back(train_total / static_cast<double>(train_lines));
    double v = evaluate(val_set);
    st.val_loss_history.push_back(v);
    if (v < st.best_val_loss) {
      st.best_val_loss = v;
      st.best_epoch = st.epoch;
      st.epochs_since_improvement = 0;
      best = model.parameters();
    } else if (++st.epochs_since_improvement >= config.patience) {
      break;
    }
  }
  st.epoch = std::min(st.epoch, config.max_epochs);
  model.parameters() = best;
  if (state_out) *state_out = std::move(st);
  return model;
}

template <typename Scalar>
std::vector<LineLabel> label_lstm(const BiLstmModel<Scalar>& model, const EmbeddingMatrix& emb, std::size_t n_lines) {
  if (emb.n_lines() != n_lines) {
    throw ModelError("embeddings of " + emb.doc_id + " cover " + std::to_string(emb.n_lines()) + " lines, document has " +
                     std::to_string(n_lines));
  }
  if (n_lines == 0) return {};
  Mat<Scalar> scores = model.forward(emb.rows.template cast<Scalar>());
  std::vector<LineLabel> out;
  out.reserve(n_lines);
  for (Eigen::Index t = 0; t < scores.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < scores.cols(); ++j) {
      if (scores(t, j) > scores(t, best)) best = j;
    }
    auto l = parse_label(model.labels()[static_cast<std::size_t>(best)]);
    if (!l) throw ModelError("model carries an unparseable label: " + model.labels()[static_cast<std::size_t>(best)]);
    out.push_back(*l);
  }
  return repair_labels(out);
}

template <typename Scalar>
std::vector<ItemSpan> segment_lstm(const BiLstmModel<Scalar>& model, const EmbeddingMatrix& emb,
                                   std::size_t n_lines) {
  return labels_to_spans(label_lstm(model, emb, n_lines));
}

template <typename Scalar>
std::string serialize_bilstm(const BiLstmModel<Scalar>& model) {
  std::string out = "BLSM";
  put_u32_le(out, kLstmFileVersion);
  put_u32_le(out, static_cast<std::uint32_t>(model.input_dim()));
  put_u32_le(out, static_cast<std::uint32_t>(model.hidden_dim()));
  put_u32_le(out, static_cast<std::uint32_t>(model.num_labels()));
  for (const auto& l : model.labels()) {
    put_u32_le(out, static_cast<std::uint32_t>(l.size()));
    out += l;
  }
  const auto& theta = model.parameters();
  for (Eigen::Index i = 0; i < theta.size(); ++i) put_f64_le(out, static_cast<double>(theta[i]));
  return out;
}

template <typename Scalar>
BiLstmModel<Scalar> parse_bilstm(std::string_view bytes) {
  ByteReader in(bytes);
  if (in.take(4, "magic") != "BLSM") throw ModelError("not a Bi-LSTM model file (bad magic)");
  std::uint32_t version = in.u32("version");
  if (version != kLstmFileVersion) throw ModelError("unsupported Bi-LSTM model version " + std::to_string(version));
  std::uint32_t d = in.u32("input width");
  std::uint32_t h = in.u32("hidden width");
  std::uint32_t n_labels = in.u32("label count");
  if (n_labels > in.remaining()) throw ModelError("Bi-LSTM model label count is implausible");
  std::vector<std::string> labels;
  for (std::uint32_t k = 0; k < n_labels; ++k) {
    std::string l(in.take(in.u32("label length"), "label"));
    if (!parse_label(l)) throw ModelError("Bi-LSTM model carries an unknown label: " + l);
    labels.push_back(std::move(l));
  }
  BiLstmModel<Scalar> model(d, h, std::move(labels));
  auto& theta = model.parameters();
  if (in.remaining() != model.num_params() * 8) throw ModelError("Bi-LSTM model tensor data has the wrong size");
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    double v = in.f64("tensor");
    if (!std::isfinite(v)) throw ModelError("Bi-LSTM model holds a non-finite parameter");
    theta[i] = static_cast<Scalar>(v);
  }
  return model;
}

template <typename Scalar>
void save_bilstm(const BiLstmModel<Scalar>& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_bilstm(model));
}

template <typename Scalar>
BiLstmModel<Scalar> load_bilstm(const std::filesystem::path& path) {
  return parse_bilstm<Scalar>(read_file(path));
}

#define ITEMSEG_INSTANTIATE(S)                                                                                    \
  template Mat<S> softmax_rows<S>(const Mat<S>&);                                                                 \
  template LstmLossResult<S> loss_and_gradients<S>(const BiLstmModel<S>&, std::span<const LstmExample<S>>);       \
  template BiLstmModel<S> train_bilstm<S>(std::span<const AnnotatedDocument>, const EmbeddingFile&,               \
                                          const LstmTrainConfig&, LstmTrainState*);                               \
  template std::vector<LineLabel> label_lstm<S>(const BiLstmModel<S>&, const EmbeddingMatrix&, std::size_t);      \
  template std::vector<ItemSpan> segment_lstm<S>(const BiLstmModel<S>&, const EmbeddingMatrix&, std::size_t);     \
  template std::string serialize_bilstm<S>(const BiLstmModel<S>&);                                                \
  template BiLstmModel<S> parse_bilstm<S>(std::string_view);                                                      \
  template void save_bilstm<S>(const BiLstmModel<S>&, const std::filesystem::path&);                              \
  template BiLstmModel<S> load_bilstm<S>(const std::filesystem::path&);

ITEMSEG_INSTANTIATE(double)
ITEMSEG_INSTANTIATE(float)
#undef ITEMSEG_INSTANTIATE

}  // namespace itemseg
