#include <gtest/gtest.h>

#include <random>

#include "itemseg/error.hpp"
#include "itemseg/eval.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace itemseg {
namespace {

std::vector<LineLabel> L(std::initializer_list<const char*> texts) {
  std::vector<LineLabel> out;
  for (const char* t : texts) out.push_back(*parse_label(t));
  return out;
}

TEST(LinePrf, CountsWithMergedTags) {
  auto gold = L({"O", "B1", "I1", "I1", "I1", "B2", "I2"});
  auto pred = L({"B1", "I1", "I1", "I1", "O", "B2", "I2"});
  auto s = line_prf(gold, pred, Item::k1);
  EXPECT_EQ(s.tp, 3u);
  EXPECT_EQ(s.fp, 1u);
  EXPECT_EQ(s.fn, 1u);
  EXPECT_DOUBLE_EQ(s.precision, 0.75);
  EXPECT_DOUBLE_EQ(s.recall, 0.75);
  EXPECT_DOUBLE_EQ(s.f1, 0.75);
  // B versus I of the same item is a hit
  auto shifted = line_prf(L({"B2", "I2"}), L({"O", "B2"}), Item::k2);
  EXPECT_EQ(shifted.tp, 1u);
  EXPECT_THROW(line_prf(gold, L({"O"}), Item::k1), LabelError);
}

TEST(LinePrf, UndefinedRatiosAreZero) {
  auto s = ItemScore::from_counts(Item::k3, 0, 0, 0);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
  auto t = ItemScore::from_counts(Item::k3, 0, 4, 0);
  EXPECT_EQ(t.f1, 0.0);
}

TEST(MacroF1, ReproducesPublishedGroupAverages) {
  std::vector<double> a{0.9740, 0.9425, 0.9472, 0.9668};
  std::vector<double> b{0.9885, 0.9825, 0.9706, 0.9882};
  EXPECT_NEAR(macro_f1(a), 0.9576, 5e-5);
  EXPECT_NEAR(macro_f1(b), 0.9825, 5e-5);
  std::vector<double> none;
  EXPECT_THROW(macro_f1(none), std::invalid_argument);
  std::vector<ItemScore> scores{ItemScore::from_counts(Item::k1, 1, 0, 0), ItemScore::from_counts(Item::k2, 0, 1, 1)};
  EXPECT_DOUBLE_EQ(macro_f1(scores), 0.5);
}

TEST(Kappa, SelfAgreementIsOne) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto x = testing::random_valid_labels(rng, 30);
    if (x.size() < 2) continue;
    bool constant = std::all_of(x.begin(), x.end(), [&](const LineLabel& l) { return l == x[0]; });
    if (constant) continue;
    EXPECT_DOUBLE_EQ(cohen_kappa(x, x), 1.0);
  }
}

TEST(Kappa, HandComputedTable) {
  auto a = L({"O", "O", "O", "O", "O", "B1", "I1", "I1", "I1", "I1"});
  auto b = L({"O", "O", "O", "O", "B1", "I1", "I1", "I1", "O", "I1"});
  // p_o = 7/10; both raters: O 5, B1 1, I1 4, so p_e = 0.25 + 0.01 + 0.16
  EXPECT_NEAR(cohen_kappa(a, b), 14.0 / 29.0, 1e-12);
  EXPECT_NEAR(cohen_kappa(b, a), 14.0 / 29.0, 1e-12);
}

TEST(Kappa, DegenerateAndInvalidInput) {
  auto c = L({"O", "O", "O"});
  EXPECT_EQ(cohen_kappa(c, c), 1.0);
  EXPECT_THROW(cohen_kappa(c, L({"O"})), LabelError);
  std::vector<LineLabel> none;
  EXPECT_THROW(cohen_kappa(none, none), LabelError);
}

TEST(Kappa, ReviewGate) {
  auto a = L({"O", "O", "O", "O", "O", "B1", "I1", "I1", "I1", "I1"});
  auto b = L({"O", "O", "O", "O", "B1", "I1", "I1", "I1", "O", "I1"});
  auto low = kappa_gate(a, b);
  EXPECT_DOUBLE_EQ(low.threshold, 0.8);
  EXPECT_TRUE(low.needs_review);
  EXPECT_FALSE(kappa_gate(a, a).needs_review);
  EXPECT_FALSE(kappa_gate(a, b, 0.4).needs_review);
  EXPECT_TRUE(kappa_gate(a, b, 0.49).needs_review);
}

AnnotatedDocument doc(std::string id, std::vector<LineLabel> labels) { return {std::move(id), {}, std::move(labels)}; }

TEST(Evaluate, PoolsCountsAcrossDocuments) {
  std::vector<AnnotatedDocument> gold{doc("a", L({"B1", "I1", "I1", "B7"})), doc("b", L({"O", "B1", "B7", "I7"}))};
  std::vector<AnnotatedDocument> pred{doc("b", L({"O", "B1", "I1", "B7"})), doc("a", L({"B1", "I1", "I1", "B7"}))};
  EvalConfig cfg;
  cfg.groups = {{"core", {Item::k1, Item::k7}}};
  auto rep = evaluate(gold, pred, cfg);
  EXPECT_EQ(rep.documents, 2u);
  ASSERT_EQ(rep.items.size(), 2u);
  EXPECT_EQ(rep.items[0].item, Item::k1);
  EXPECT_EQ(rep.items[0].tp, 4u);
  EXPECT_EQ(rep.items[0].fp, 1u);
  EXPECT_EQ(rep.items[1].tp, 2u);
  EXPECT_EQ(rep.items[1].fn, 1u);
  ASSERT_TRUE(rep.groups[0].macro_f1);
  EXPECT_NEAR(*rep.groups[0].macro_f1, (8.0 / 9.0 + 0.8) / 2.0, 1e-12);

  cfg.per_document_mean = true;
  auto mean = evaluate(gold, pred, cfg);
  // item 1: doc a perfect, doc b 1 tp 1 fp -> F1 2/3; item 7: doc a 1, doc b 1 tp 1 fn -> 2/3
  EXPECT_NEAR(mean.items[0].f1, (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
  EXPECT_NEAR(mean.items[1].f1, (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
}

TEST(Evaluate, PrevalenceFilterDropsRareItems) {
  std::vector<AnnotatedDocument> gold, pred;
  for (int d = 0; d < 10; ++d) {
    auto labels = d < 6 ? L({"B1", "B2", "I2"}) : L({"B1", "I1", "O"});
    gold.push_back(doc("d" + std::to_string(d), labels));
    pred.push_back(doc("d" + std::to_string(d), labels));
  }
  EvalConfig cfg;
  cfg.groups = {{"g", {Item::k1, Item::k2, Item::k3}}};
  auto rep = evaluate(gold, pred, cfg);
  ASSERT_EQ(rep.groups[0].members.size(), 1u);
  EXPECT_EQ(rep.groups[0].members[0], Item::k1);
  cfg.min_prevalence = 0.6;
  EXPECT_EQ(evaluate(gold, pred, cfg).groups[0].members.size(), 2u);
  cfg.groups = {{"empty", {Item::k16}}};
  EXPECT_FALSE(evaluate(gold, pred, cfg).groups[0].macro_f1);
}

TEST(Evaluate, MissingOrMismatchedPredictions) {
  std::vector<AnnotatedDocument> gold{doc("a", L({"B1"}))};
  std::vector<AnnotatedDocument> none;
  EXPECT_THROW(evaluate(gold, none), LabelError);
  std::vector<AnnotatedDocument> longer{doc("a", L({"B1", "I1"}))};
  EXPECT_THROW(evaluate(gold, longer), LabelError);
}

TEST(Evaluate, ReportFormats) {
  std::vector<AnnotatedDocument> gold{doc("a", L({"B1", "I1", "B7"}))};
  auto rep = evaluate(gold, gold);
  auto csv = format_eval_csv(rep);
  EXPECT_TRUE(csv.starts_with("item,tp,fp,fn,precision,recall,f1\n1,2,0,0,1,1,1\n7,1,0,0,1,1,1\n\n"));
  EXPECT_NE(csv.find("group,members,macro_f1\ncore,1 7,1\n"), std::string::npos);
  auto j = nlohmann::json::parse(format_eval_json(rep));
  EXPECT_EQ(j["documents"], 1);
  EXPECT_EQ(j["items"][0]["item"], "1");
  auto groups = default_item_groups();
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].items, (std::vector<Item>{Item::k1, Item::k1A, Item::k3, Item::k7}));
  EXPECT_EQ(groups[1].items.size(), 13u);
}

TEST(CorpusStats, HandCorpus) {
  AnnotatedDocument a{"a", number_lines({"cover page", "Item 1", "one two three", "Item 7", "x", "y z"}),
                      L({"O", "B1", "I1", "B7", "I7", "I7"})};
  AnnotatedDocument b{"b", number_lines({"cover", "Item 7. MD&A", "words here"}), L({"O", "B7", "I7"})};
  std::vector<AnnotatedDocument> docs{a, b};
  auto stats = corpus_stats(docs);
  ASSERT_EQ(stats.size(), kItemCount);
  const auto& s1 = stats[canonical_index(Item::k1)];
  const auto& s7 = stats[canonical_index(Item::k7)];
  EXPECT_DOUBLE_EQ(s1.prevalence, 0.5);
  EXPECT_DOUBLE_EQ(s1.avg_order, 1.0);
  EXPECT_DOUBLE_EQ(s1.avg_line_length, 1.0);
  EXPECT_DOUBLE_EQ(s1.avg_word_length, 2.5);
  EXPECT_DOUBLE_EQ(s7.prevalence, 1.0);
  EXPECT_DOUBLE_EQ(s7.avg_order, 1.5);
  EXPECT_DOUBLE_EQ(s7.avg_line_length, 2.5);
  EXPECT_DOUBLE_EQ(s7.avg_word_length, 5.0);
  EXPECT_EQ(stats[canonical_index(Item::k2)].documents_with_item, 0u);
  EXPECT_TRUE(format_stats_csv(stats).starts_with("item,avg_order,avg_word_length,avg_line_length,prevalence\n1,1,"));
  std::vector<AnnotatedDocument> none;
  EXPECT_THROW(corpus_stats(none), std::invalid_argument);
}

}  // namespace
}  // namespace itemseg
