#pragma once

#include <span>
#include <vector>

#include "itemseg/document.hpp"

namespace itemseg {

enum class HeadingPattern : int {
  bare_number = 0,      // "ITEM 7"
  separator_title = 1,  // "ITEM 7. MANAGEMENT'S DISCUSSION ..."
  separator_other = 2,  // "Item 4. (Removed and Reserved)"
  inline_title = 3,     // "Item 7 Management's Discussion ..."
};

struct HeadingMatch {
  std::size_t line_id = 0;
  Item item = Item::k1;
  HeadingPattern pattern = HeadingPattern::bare_number;
  double score = 0.0;
  bool toc_suppressed = false;
};

struct RuleConfig {
  /// Lines considered on each side of a match for the table-of-contents test.
  std::size_t toc_radius = 5;
  /// A match is suppressed when at least this many neighbors also match.
  std::size_t toc_min_neighbors = 5;
  /// Headings longer than this are treated as body sentences.
  std::size_t max_heading_words = 30;
};

/// Matches a single line against the heading patterns.
std::optional<HeadingMatch> match_heading(const TextLine& line, const RuleConfig& config = {});

/// All heading matches in document order, with table-of-contents suppression
/// applied (suppressed matches are kept, flagged).
std::vector<HeadingMatch> find_heading_matches(std::span<const TextLine> lines, const RuleConfig& config = {});

/// Regular-expression style baseline segmenter.
std::vector<ItemSpan> segment_rule_based(std::span<const TextLine> lines, const RuleConfig& config = {});

}  // namespace itemseg
