#include <gtest/gtest.h>

#include "itemseg/document.hpp"
#include "itemseg/rule_seg.hpp"
#include "test_support.hpp"

namespace itemseg {
namespace {

std::optional<HeadingMatch> match(const std::string& text) { return match_heading(TextLine{0, text}); }

TEST(HeadingMatch, RecognizesCommonForms) {
  auto a = match("ITEM 7. MANAGEMENT'S DISCUSSION AND ANALYSIS OF FINANCIAL CONDITION");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->item, Item::k7);
  EXPECT_EQ(a->pattern, HeadingPattern::separator_title);

  auto b = match("Item 1A Risk Factors");
  ASSERT_TRUE(b);
  EXPECT_EQ(b->item, Item::k1A);
  EXPECT_EQ(b->pattern, HeadingPattern::inline_title);

  auto c = match("ITEM 9B");
  ASSERT_TRUE(c);
  EXPECT_EQ(c->pattern, HeadingPattern::bare_number);

  auto d = match("Item 4. (Removed and Reserved)");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->item, Item::k4);

  auto e = match("Item 5 \xE2\x80\x94 Other Information");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->pattern, HeadingPattern::separator_other);

  auto f = match("PART II, ITEM 8. FINANCIAL STATEMENTS AND SUPPLEMENTARY DATA");
  ASSERT_TRUE(f);
  EXPECT_EQ(f->item, Item::k8);
}

TEST(HeadingMatch, RejectsBodySentences) {
  EXPECT_FALSE(match("Items 1 and 2 are discussed below"));
  EXPECT_FALSE(match("Item 7 of this report describes results in detail"));
  EXPECT_FALSE(match("See Item 7 for details."));
  EXPECT_FALSE(match("Item 17. Something"));
  EXPECT_FALSE(match("Item 1D. Something"));
  EXPECT_FALSE(match("Itemized deductions"));
  std::string long_line = "Item 7. Management discussion";
  for (int i = 0; i < 40; ++i) long_line += " words";
  EXPECT_FALSE(match(long_line));
}

std::vector<TextLine> sample_report() {
  std::vector<std::string> t{"ANNUAL REPORT", "TABLE OF CONTENTS"};
  const char* toc[] = {"Item 1. Business", "Item 1A. Risk Factors", "Item 2. Properties",
                       "Item 3. Legal Proceedings", "Item 7. Management's Discussion and Analysis",
                       "Item 8. Financial Statements"};
  for (auto* s : toc) t.push_back(s);
  for (int k = 0; k < 6; ++k) t.push_back("Forward-looking statements appear throughout this report.");
  for (auto* s : toc) {
    t.push_back(s);
    for (int k = 0; k < 8; ++k) t.push_back("Body text line for this section of the report.");
  }
  return number_lines(t);
}

TEST(RuleSegmenter, SuppressesTableOfContents) {
  auto lines = sample_report();
  auto matches = find_heading_matches(lines);
  ASSERT_EQ(matches.size(), 12u);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_TRUE(matches[k].toc_suppressed) << k;
  for (std::size_t k = 6; k < 12; ++k) EXPECT_FALSE(matches[k].toc_suppressed) << k;

  auto spans = segment_rule_based(lines);
  ASSERT_EQ(spans.size(), 6u);
  EXPECT_EQ(spans[0], (ItemSpan{Item::k1, 14, 22}));
  EXPECT_EQ(spans.back().end_line, lines.size() - 1);
}

TEST(RuleSegmenter, EmptyDocument) {
  std::vector<TextLine> none;
  EXPECT_TRUE(segment_rule_based(none).empty());
}

TEST(RuleSegmenter, OutOfOrderHeadingIsDropped) {
  auto lines = number_lines({"Item 1. Business", "text", "text", "Item 7. Management's Discussion", "text",
                             "Item 2. Properties", "text", "Item 3. Legal Proceedings", "text"});
  auto spans = segment_rule_based(lines);
  ASSERT_EQ(spans.size(), 3u);
  EXPECT_EQ(spans[0].item, Item::k1);
  EXPECT_EQ(spans[0].end_line, 4u);
  EXPECT_EQ(spans[1].item, Item::k2);
  EXPECT_EQ(spans[2].item, Item::k3);
}

TEST(RuleSegmenter, ReconstructedFilingStartsAndTableOfContents) {
  auto docs = read_documents_jsonl(testing::fixture("servidyne_fy2010_docs.jsonl"));
  ASSERT_EQ(docs.size(), 1u);
  auto spans = segment_rule_based(docs[0].lines);
  auto labels = spans_to_labels(spans, docs[0].lines.size());
  EXPECT_EQ(labels[81], LineLabel::begin(Item::k1));
  EXPECT_EQ(labels[526], LineLabel::begin(Item::k7));
  EXPECT_EQ(labels[1668], LineLabel::begin(Item::k9));
  for (std::size_t i = 54; i <= 77; ++i) EXPECT_TRUE(labels[i].is_outside()) << "line " << i;

  auto gold = read_labels_jsonl(testing::fixture("servidyne_fy2010_gold.jsonl"));
  ASSERT_EQ(gold.size(), 1u);
  ASSERT_EQ(gold[0].labels.size(), labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (gold[0].labels[i].tag == Tag::B) EXPECT_EQ(labels[i], gold[0].labels[i]) << "line " << i;
  }
}

}  // namespace
}  // namespace itemseg
