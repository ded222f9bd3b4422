#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itemseg/document.hpp"

namespace itemseg {

struct ItemScore {
  Item item = Item::k1;
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;

  /// Precision, recall, and F1 from counts; each is 0 when undefined.
  static ItemScore from_counts(Item item, std::size_t tp, std::size_t fp, std::size_t fn);
};

/// Line-level scores for one item with B and I merged. Throws LabelError on
/// a length mismatch.
ItemScore line_prf(std::span<const LineLabel> gold, std::span<const LineLabel> pred, Item item);

/// Unweighted mean. Throws std::invalid_argument on empty input.
double macro_f1(std::span<const ItemScore> scores);
double macro_f1(std::span<const double> f1_values);

/// Cohen's kappa over full line labels; 1 when both agreement terms are 1.
/// Throws LabelError on a length mismatch or empty input.
double cohen_kappa(std::span<const LineLabel> a, std::span<const LineLabel> b);

struct KappaCheck {
  double kappa = 0.0;
  double threshold = 0.8;
  bool needs_review = false;  // kappa below threshold
};
KappaCheck kappa_gate(std::span<const LineLabel> a, std::span<const LineLabel> b, double threshold = 0.8);

struct ItemGroup {
  std::string name;
  std::vector<Item> items;
};

/// core = {1, 1A, 3, 7}; other = {2, 4, 5, 6, 7A, 8, 9, 9A, 10, 11, 12, 13, 14}.
std::vector<ItemGroup> default_item_groups();

struct EvalConfig {
  std::vector<ItemGroup> groups = default_item_groups();
  /// Group members whose gold prevalence is below this are left out.
  double min_prevalence = 0.7;
  /// Average per-document scores instead of pooling counts across the corpus.
  bool per_document_mean = false;
};

struct GroupReport {
  std::string name;
  std::vector<Item> members;  // after the prevalence filter
  std::vector<ItemScore> scores;
  std::optional<double> macro_f1;  // empty when no member survives
};

struct EvalReport {
  std::vector<ItemScore> items;  // every item present in gold or predictions, canonical order
  std::vector<GroupReport> groups;
  std::size_t documents = 0;
};

/// Pairs documents by doc_id. Throws LabelError when a gold document lacks a
/// prediction or the line counts differ.
EvalReport evaluate(std::span<const AnnotatedDocument> gold, std::span<const AnnotatedDocument> pred,
                    const EvalConfig& config = {});

/// CSV: item,tp,fp,fn,precision,recall,f1 rows, a blank line, then
/// group,members,macro_f1 rows.
std::string format_eval_csv(const EvalReport& report);
std::string format_eval_json(const EvalReport& report);

struct ItemStats {
  Item item = Item::k1;
  double avg_order = 0.0;        // over documents containing the item
  double avg_word_length = 0.0;  // over all documents
  double avg_line_length = 0.0;  // over all documents
  double prevalence = 0.0;
  std::size_t documents_with_item = 0;
};

/// One entry per item in canonical order. Word counts need line text; label-only
/// documents contribute 0 words. Throws std::invalid_argument on empty input.
std::vector<ItemStats> corpus_stats(std::span<const AnnotatedDocument> docs);
std::string format_stats_csv(std::span<const ItemStats> stats);

}  // namespace itemseg
