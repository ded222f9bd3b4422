#include "itemseg/rule_seg.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <string>

#include "itemseg/util.hpp"

namespace itemseg {

namespace {

/// Strips surrounding punctuation and a trailing possessive.
std::string normalize_word(std::string_view w) {
  std::size_t b = 0, e = w.size();
  while (b < e && !std::isalnum(static_cast<unsigned char>(w[b]))) ++b;
  while (e > b && !std::isalnum(static_cast<unsigned char>(w[e - 1]))) --e;
  std::string out = to_lower(w.substr(b, e - b));
  if (out.size() > 2 && out.ends_with("'s")) out.resize(out.size() - 2);
  return out;
}

using Lexicon = std::array<std::set<std::string>, kItemCount>;

const Lexicon& title_lexicon() {
  static const Lexicon lexicon = [] {
    static const std::set<std::string> kStop = {"and", "of", "the", "for", "on", "in", "with", "to", "a",
                                                "about", "by", "or", "form", "10-k", "certain"};
    Lexicon lex;
    auto add = [&](Item item, std::string_view title) {
      for (auto w : split_words(title)) {
        std::string n = normalize_word(w);
        if (!n.empty() && !kStop.contains(n)) lex[canonical_index(item)].insert(n);
      }
    };
    for (Item item : kAllItems) add(item, canonical_title(item));
    // Earlier or common alternative wordings.
    add(Item::k4, "Submission of Matters to a Vote of Security Holders; Removed and Reserved");
    add(Item::k5, "Market for Registrant's Common Stock and Related Shareholder Matters");
    add(Item::k6, "Reserved");
    add(Item::k7, "Management's Discussion Analysis");
    add(Item::k8, "Consolidated Financial Statements");
    add(Item::k9, "Changes in and Disagreements with Auditors");
    add(Item::k10, "Directors and Executive Officers of the Registrant");
    add(Item::k13, "Certain Relationships and Related Transactions");
    add(Item::k15, "Exhibits, Financial Statement Schedules, and Reports on Form 8-K");
    add(Item::k16, "Summary");
    return lex;
  }();
  return lexicon;
}

bool is_separator_start(std::string_view s) {
  if (s.empty()) return false;
  char c = s[0];
  if (c == '.' || c == ':' || c == '-' || c == ')' || c == '(' || c == ',') return true;
  // En and em dashes.
  return s.starts_with("\xE2\x80\x93") || s.starts_with("\xE2\x80\x94");
}

std::size_t skip_separators(std::string_view s, std::size_t p) {
  while (p < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[p])) || s[p] == '.' || s[p] == ':' || s[p] == '-' ||
        s[p] == ',') {
      ++p;
    } else if (s.substr(p).starts_with("\xE2\x80\x93") || s.substr(p).starts_with("\xE2\x80\x94")) {
      p += 3;
    } else {
      break;
    }
  }
  return p;
}

std::size_t skip_spaces(std::string_view s, std::size_t p) {
  while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
  return p;
}

}  // namespace

std::optional<HeadingMatch> match_heading(const TextLine& line, const RuleConfig& config) {
  std::string low = to_lower(trim(line.text));
  std::string_view s = low;
  if (split_words(s).size() > config.max_heading_words) return std::nullopt;

  std::size_t p = 0;
  if (s.starts_with("part")) {
    std::size_t q = skip_spaces(s, 4);
    std::size_t roman = q;
    while (q < s.size() && (s[q] == 'i' || s[q] == 'v' || s[q] == 'x')) ++q;
    if (q == roman) return std::nullopt;
    p = skip_separators(s, q);
  }
  if (s.compare(p, 4, "item") != 0) return std::nullopt;
  p = skip_spaces(s, p + 4);

  std::size_t num_start = p;
  while (p < s.size() && p - num_start < 2 && std::isdigit(static_cast<unsigned char>(s[p]))) ++p;
  if (p == num_start) return std::nullopt;
  if (p < s.size() && s[p] >= 'a' && s[p] <= 'c') ++p;
  auto item = parse_item(s.substr(num_start, p - num_start));
  if (!item) return std::nullopt;
  if (p < s.size() && std::isalnum(static_cast<unsigned char>(s[p]))) return std::nullopt;

  std::size_t after = skip_spaces(s, p);
  bool has_separator = is_separator_start(s.substr(after));
  std::size_t rest_start = skip_separators(s, after);
  if (rest_start < s.size() && s[rest_start] == '(') ++rest_start;
  auto words = split_words(s.substr(rest_start));

  HeadingMatch m;
  m.line_id = line.line_id;
  m.item = *item;
  if (words.empty()) {
    m.pattern = HeadingPattern::bare_number;
    m.score = 1.0;
    return m;
  }
  const auto& keywords = title_lexicon()[canonical_index(*item)];
  bool title_hit = false;
  for (std::size_t k = 0; k < std::min<std::size_t>(3, words.size()) && !title_hit; ++k) {
    title_hit = keywords.contains(normalize_word(words[k]));
  }
  if (has_separator) {
    m.pattern = title_hit ? HeadingPattern::separator_title : HeadingPattern::separator_other;
    m.score = title_hit ? 3.0 : 2.0;
    return m;
  }
  if (title_hit) {
    m.pattern = HeadingPattern::inline_title;
    m.score = 2.5;
    return m;
  }
  return std::nullopt;
}

std::vector<HeadingMatch> find_heading_matches(std::span<const TextLine> lines, const RuleConfig& config) {
  std::vector<HeadingMatch> matches;
  std::vector<bool> is_match(lines.size(), false);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (auto m = match_heading(lines[i], config)) {
      m->line_id = i;
      matches.push_back(*m);
      is_match[i] = true;
    }
  }

  // Dense heading clusters are tables of contents.
  for (auto& m : matches) {
    std::size_t lo = m.line_id >= config.toc_radius ? m.line_id - config.toc_radius : 0;
    std::size_t hi = std::min(lines.size() - 1, m.line_id + config.toc_radius);
    std::size_t neighbors = 0;
    for (std::size_t j = lo; j <= hi; ++j) neighbors += (j != m.line_id && is_match[j]) ? 1 : 0;
    m.toc_suppressed = neighbors >= config.toc_min_neighbors;
  }

  // The table of contents is the first suppressed cluster. A suppressed match
  // after it is restored when it is the only match for its item past the
  // table of contents, so a compact run of short items keeps its headings.
  auto first = std::find_if(matches.begin(), matches.end(), [](const HeadingMatch& m) { return m.toc_suppressed; });
  if (first != matches.end()) {
    std::size_t toc_end = first->line_id;
    for (auto it = first; it != matches.end(); ++it) {
      if (!it->toc_suppressed) continue;
      if (it->line_id - toc_end > 2 * config.toc_radius) break;
      toc_end = it->line_id;
    }
    std::array<std::size_t, kItemCount> after_toc{};
    for (const auto& m : matches) {
      if (m.line_id > toc_end) ++after_toc[canonical_index(m.item)];
    }
    for (auto& m : matches) {
      if (m.toc_suppressed && m.line_id > toc_end && after_toc[canonical_index(m.item)] == 1) {
        m.toc_suppressed = false;
      }
    }
  }
  return matches;
}

std::vector<ItemSpan> segment_rule_based(std::span<const TextLine> lines, const RuleConfig& config) {
  std::vector<ItemStart> candidates;
  for (const auto& m : find_heading_matches(lines, config)) {
    if (!m.toc_suppressed) candidates.push_back({m.item, m.line_id});
  }
  return spans_from_starts(select_ordered_starts(std::move(candidates)), lines.size());
}

}  // namespace itemseg
