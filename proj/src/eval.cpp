#include "itemseg/eval.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>

#include "itemseg/error.hpp"
#include "itemseg/util.hpp"
#include "json.hpp"

namespace itemseg {

ItemScore ItemScore::from_counts(Item item, std::size_t tp, std::size_t fp, std::size_t fn) {
  ItemScore s;
  s.item = item;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

namespace {

bool in_item(const LineLabel& l, Item item) { return !l.is_outside() && l.item == item; }

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

Counts count(std::span<const LineLabel> gold, std::span<const LineLabel> pred, Item item) {
  if (gold.size() != pred.size()) {
    throw LabelError("gold has " + std::to_string(gold.size()) + " lines, prediction " + std::to_string(pred.size()));
  }
  Counts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    bool g = in_item(gold[i], item), p = in_item(pred[i], item);
    c.tp += g && p;
    c.fp += !g && p;
    c.fn += g && !p;
  }
  return c;
}

}  // namespace

ItemScore line_prf(std::span<const LineLabel> gold, std::span<const LineLabel> pred, Item item) {
  Counts c = count(gold, pred, item);
  return ItemScore::from_counts(item, c.tp, c.fp, c.fn);
}

double macro_f1(std::span<const double> f1_values) {
  if (f1_values.empty()) throw std::invalid_argument("macro-F1 of an empty item set");
  double sum = 0.0;
  for (double v : f1_values) sum += v;
  return sum / static_cast<double>(f1_values.size());
}

double macro_f1(std::span<const ItemScore> scores) {
  std::vector<double> f;
  for (const auto& s : scores) f.push_back(s.f1);
  return macro_f1(f);
}

double cohen_kappa(std::span<const LineLabel> a, std::span<const LineLabel> b) {
  if (a.size() != b.size()) throw LabelError("kappa needs sequences of equal length");
  if (a.empty()) throw LabelError("kappa of empty sequences");
  std::map<std::string, std::pair<std::size_t, std::size_t>> marginals;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++marginals[to_string(a[i])].first;
    ++marginals[to_string(b[i])].second;
    agree += a[i] == b[i];
  }
  const double n = static_cast<double>(a.size());
  const double po = static_cast<double>(agree) / n;
  double pe = 0.0;
  for (const auto& [label, m] : marginals) pe += (static_cast<double>(m.first) / n) * (static_cast<double>(m.second) / n);
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

KappaCheck kappa_gate(std::span<const LineLabel> a, std::span<const LineLabel> b, double threshold) {
  KappaCheck k;
  k.kappa = cohen_kappa(a, b);
  k.threshold = threshold;
  k.needs_review = k.kappa < threshold;
  return k;
}

std::vector<ItemGroup> default_item_groups() {
  return {
      {"core", {Item::k1, Item::k1A, Item::k3, Item::k7}},
      {"other",
       {Item::k2, Item::k4, Item::k5, Item::k6, Item::k7A, Item::k8, Item::k9, Item::k9A, Item::k10, Item::k11,
        Item::k12, Item::k13, Item::k14}},
  };
}

EvalReport evaluate(std::span<const AnnotatedDocument> gold, std::span<const AnnotatedDocument> pred,
                    const EvalConfig& config) {
  std::map<std::string, const AnnotatedDocument*> by_id;
  for (const auto& p : pred) {
    if (!by_id.emplace(p.doc_id, &p).second) throw LabelError("duplicate prediction for " + p.doc_id);
  }
  std::array<Counts, kItemCount> pooled{};
  std::array<double, kItemCount> p_sum{}, r_sum{}, f_sum{};
  std::array<std::size_t, kItemCount> doc_count{}, gold_docs{};
  std::array<bool, kItemCount> seen{};

  for (const auto& g : gold) {
    auto it = by_id.find(g.doc_id);
    if (it == by_id.end()) throw LabelError("no prediction for document " + g.doc_id);
    const auto& p = *it->second;
    if (p.labels.size() != g.labels.size()) {
      throw LabelError("document " + g.doc_id + ": gold has " + std::to_string(g.labels.size()) +
                       " lines, prediction " + std::to_string(p.labels.size()));
    }
    for (Item item : kAllItems) {
      const std::size_t k = canonical_index(item);
      Counts c = count(g.labels, p.labels, item);
      pooled[k].tp += c.tp;
      pooled[k].fp += c.fp;
      pooled[k].fn += c.fn;
      if (c.tp + c.fn > 0) ++gold_docs[k];
      if (c.tp + c.fp + c.fn > 0) {
        seen[k] = true;
        ItemScore s = ItemScore::from_counts(item, c.tp, c.fp, c.fn);
        p_sum[k] += s.precision;
        r_sum[k] += s.recall;
        f_sum[k] += s.f1;
        ++doc_count[k];
      }
    }
  }

  EvalReport report;
  report.documents = gold.size();
  std::array<ItemScore, kItemCount> scores;
  for (Item item : kAllItems) {
    const std::size_t k = canonical_index(item);
    scores[k] = ItemScore::from_counts(item, pooled[k].tp, pooled[k].fp, pooled[k].fn);
    if (config.per_document_mean && doc_count[k] > 0) {
      const double n = static_cast<double>(doc_count[k]);
      scores[k].precision = p_sum[k] / n;
      scores[k].recall = r_sum[k] / n;
      scores[k].f1 = f_sum[k] / n;
    }
    if (seen[k]) report.items.push_back(scores[k]);
  }

  for (const auto& group : config.groups) {
    GroupReport gr;
    gr.name = group.name;
    for (Item item : group.items) {
      const std::size_t k = canonical_index(item);
      double prevalence = gold.empty() ? 0.0 : static_cast<double>(gold_docs[k]) / static_cast<double>(gold.size());
      if (prevalence < config.min_prevalence) continue;
      gr.members.push_back(item);
      gr.scores.push_back(scores[k]);
    }
    if (!gr.scores.empty()) gr.macro_f1 = macro_f1(gr.scores);
    report.groups.push_back(std::move(gr));
  }
  return report;
}

namespace {

std::string members_text(const std::vector<Item>& items) {
  std::string out;
  for (Item i : items) {
    if (!out.empty()) out += ' ';
    out += to_string(i);
  }
  return out;
}

}  // namespace

std::string format_eval_csv(const EvalReport& report) {
  std::string out = "item,tp,fp,fn,precision,recall,f1\n";
  for (const auto& s : report.items) {
    out += std::string(to_string(s.item)) + ',' + std::to_string(s.tp) + ',' + std::to_string(s.fp) + ',' +
           std::to_string(s.fn) + ',' + format_double(s.precision) + ',' + format_double(s.recall) + ',' +
           format_double(s.f1) + '\n';
  }
  out += "\ngroup,members,macro_f1\n";
  for (const auto& g : report.groups) {
    out += g.name + ',' + members_text(g.members) + ',' + (g.macro_f1 ? format_double(*g.macro_f1) : "NA") + '\n';
  }
  return out;
}

std::string format_eval_json(const EvalReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["documents"] = report.documents;
  j["items"] = ordered_json::array();
  for (const auto& s : report.items) {
    j["items"].push_back({{"item", to_string(s.item)},
                          {"tp", s.tp},
                          {"fp", s.fp},
                          {"fn", s.fn},
                          {"precision", s.precision},
                          {"recall", s.recall},
                          {"f1", s.f1}});
  }
  j["groups"] = ordered_json::array();
  for (const auto& g : report.groups) {
    ordered_json members = ordered_json::array();
    for (Item i : g.members) members.push_back(to_string(i));
    j["groups"].push_back({{"name", g.name},
                           {"members", members},
                           {"macro_f1", g.macro_f1 ? ordered_json(*g.macro_f1) : ordered_json(nullptr)}});
  }
  return j.dump(2) + "\n";
}

std::vector<ItemStats> corpus_stats(std::span<const AnnotatedDocument> docs) {
  if (docs.empty()) throw std::invalid_argument("corpus statistics of an empty corpus");
  std::array<double, kItemCount> order_sum{}, words{}, lines{};
  std::array<std::size_t, kItemCount> with{};
  for (const auto& doc : docs) {
    std::size_t rank = 0;
    std::array<bool, kItemCount> started{};
    for (std::size_t i = 0; i < doc.labels.size(); ++i) {
      const LineLabel& l = doc.labels[i];
      if (l.is_outside()) continue;
      const std::size_t k = canonical_index(l.item);
      if (l.tag == Tag::B && !started[k]) {
        started[k] = true;
        order_sum[k] += static_cast<double>(++rank);
        ++with[k];
      }
      lines[k] += 1.0;
      if (i < doc.lines.size()) words[k] += static_cast<double>(split_words(doc.lines[i].text).size());
    }
  }
  const double n = static_cast<double>(docs.size());
  std::vector<ItemStats> out;
  for (Item item : kAllItems) {
    const std::size_t k = canonical_index(item);
    ItemStats s;
    s.item = item;
    s.documents_with_item = with[k];
    s.prevalence = static_cast<double>(with[k]) / n;
    s.avg_order = with[k] ? order_sum[k] / static_cast<double>(with[k]) : 0.0;
    s.avg_word_length = words[k] / n;
    s.avg_line_length = lines[k] / n;
    out.push_back(s);
  }
  return out;
}

std::string format_stats_csv(std::span<const ItemStats> stats) {
  std::string out = "item,avg_order,avg_word_length,avg_line_length,prevalence\n";
  for (const auto& s : stats) {
    out += std::string(to_string(s.item)) + ',' + format_double(s.avg_order) + ',' + format_double(s.avg_word_length) +
           ',' + format_double(s.avg_line_length) + ',' + format_double(s.prevalence) + '\n';
  }
  return out;
}

}  // namespace itemseg
