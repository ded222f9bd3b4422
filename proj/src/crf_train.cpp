#include <cmath>

#include "itemseg/crf.hpp"
#include "itemseg/error.hpp"
#include "itemseg/lbfgs.hpp"

namespace itemseg {

CrfModel train_crf(std::span<const AnnotatedDocument> corpus, const CrfTrainConfig& config, CrfTrainReport* report) {
  if (corpus.empty()) throw ModelError("cannot train a CRF on an empty corpus");

  for (const auto& doc : corpus) {
    if (doc.labels.size() != doc.lines.size()) throw ModelError("document " + doc.doc_id + " has no line text");
    if (auto v = validate_label_sequence(doc.labels)) {
      throw ModelError("invalid gold labels in " + doc.doc_id + " at line " + std::to_string(v->position) + ": " +
                       v->reason);
    }
  }
  CrfModel model(label_set_for(corpus), config.l2_lambda);

  std::vector<std::vector<LineFeatures>> features;
  std::vector<std::vector<std::size_t>> gold;
  features.reserve(corpus.size());
  for (const auto& doc : corpus) {
    auto& f = features.emplace_back(extract_all_features(doc.lines));
    auto& y = gold.emplace_back();
    for (std::size_t t = 0; t < doc.labels.size(); ++t) {
      y.push_back(*model.label_index(to_string(doc.labels[t])));
      for (const auto& [name, value] : f[t]) {
        if (value != 0.0) model.add_state_weight(name, y.back());
      }
    }
  }
  std::vector<CrfExample> batch;
  batch.reserve(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    batch.push_back({model.compile(features[d]), std::move(gold[d])});
  }
  features.clear();

  Objective objective = [&](std::span<const double> x, std::span<double> grad) {
    model.set_parameters(x);
    NllResult r = nll_and_gradient(model, batch);
    std::copy(r.gradient.begin(), r.gradient.end(), grad.begin());
    return r.loss;
  };
  LbfgsConfig lc;
  lc.memory = config.memory;
  lc.max_iter = config.max_iter;
  lc.tol = config.tol;
  LbfgsResult res = minimize_lbfgs(objective, model.parameters(), lc);
  if (!std::isfinite(res.f)) throw ModelError("CRF training diverged");
  model.set_parameters(res.x);

  if (report) {
    report->loss_history = std::move(res.history);
    report->iterations = res.iterations;
    report->converged = res.converged;
    report->stop_reason = res.stop_reason;
  }
  return model;
}

std::vector<LineLabel> label_crf(const CrfModel& model, std::span<const TextLine> lines) {
  if (lines.empty()) return {};
  std::vector<LineLabel> labels;
  labels.reserve(lines.size());
  for (std::size_t idx : viterbi_decode(model, extract_all_features(lines))) {
    auto l = parse_label(model.labels()[idx]);
    if (!l) throw ModelError("model carries an unparseable label: " + model.labels()[idx]);
    labels.push_back(*l);
  }
  return repair_labels(labels);
}

std::vector<ItemSpan> segment_crf(const CrfModel& model, std::span<const TextLine> lines) {
  return labels_to_spans(label_crf(model, lines));
}

}  // namespace itemseg
