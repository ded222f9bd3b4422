#include "itemseg/labels.hpp"

#include <algorithm>
#include <array>

#include "itemseg/error.hpp"

namespace itemseg {

std::string to_string(LineLabel label) {
  switch (label.tag) {
    case Tag::O:
      return "O";
    case Tag::B:
      return "B" + std::string(to_string(label.item));
    case Tag::I:
      return "I" + std::string(to_string(label.item));
  }
  return "O";
}

std::optional<LineLabel> parse_label(std::string_view text) {
  if (text == "O") return LineLabel::outside();
  if (text.size() < 2) return std::nullopt;
  auto item = parse_item(text.substr(1));
  if (!item) return std::nullopt;
  if (text[0] == 'B') return LineLabel::begin(*item);
  if (text[0] == 'I') return LineLabel::inside(*item);
  return std::nullopt;
}

std::optional<LabelViolation> validate_label_sequence(std::span<const LineLabel> labels) {
  std::array<bool, kItemCount> begun{};
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const LineLabel& cur = labels[t];
    if (cur.tag == Tag::B) {
      if (begun[canonical_index(cur.item)]) {
        return LabelViolation{t, "item " + std::string(to_string(cur.item)) + " begins twice"};
      }
      begun[canonical_index(cur.item)] = true;
    } else if (cur.tag == Tag::I) {
      bool continues = t > 0 && !labels[t - 1].is_outside() && labels[t - 1].item == cur.item;
      if (!continues) {
        return LabelViolation{t, "I" + std::string(to_string(cur.item)) +
                                     " is not preceded by B or I of the same item"};
      }
    }
  }
  return std::nullopt;
}

std::vector<ItemSpan> labels_to_spans(std::span<const LineLabel> labels) {
  if (auto violation = validate_label_sequence(labels)) {
    throw LabelError("invalid label sequence at position " + std::to_string(violation->position) +
                     ": " + violation->reason);
  }
  std::vector<ItemSpan> spans;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t].tag == Tag::B) {
      spans.push_back({labels[t].item, t, t});
    } else if (labels[t].tag == Tag::I) {
      spans.back().end_line = t;
    }
  }
  return spans;
}

std::vector<LineLabel> spans_to_labels(std::span<const ItemSpan> spans, std::size_t n_lines) {
  std::vector<LineLabel> labels(n_lines);
  std::vector<bool> covered(n_lines, false);
  std::array<bool, kItemCount> seen{};
  for (const ItemSpan& span : spans) {
    if (span.start_line > span.end_line) {
      throw LabelError("span for item " + std::string(to_string(span.item)) + " ends before it starts");
    }
    if (span.end_line >= n_lines) {
      throw LabelError("span for item " + std::string(to_string(span.item)) + " ends at line " +
                       std::to_string(span.end_line) + " but the document has " +
                       std::to_string(n_lines) + " lines");
    }
    if (seen[canonical_index(span.item)]) {
      throw LabelError("item " + std::string(to_string(span.item)) + " has more than one span");
    }
    seen[canonical_index(span.item)] = true;
    for (std::size_t t = span.start_line; t <= span.end_line; ++t) {
      if (covered[t]) throw LabelError("spans overlap at line " + std::to_string(t));
      covered[t] = true;
      labels[t] = t == span.start_line ? LineLabel::begin(span.item) : LineLabel::inside(span.item);
    }
  }
  return labels;
}

std::vector<LineLabel> repair_labels(std::span<const LineLabel> labels) {
  std::vector<LineLabel> out(labels.begin(), labels.end());
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (out[t].tag != Tag::I) continue;
    bool continues = t > 0 && !out[t - 1].is_outside() && out[t - 1].item == out[t].item;
    if (!continues) out[t].tag = Tag::B;
  }

  // Every run now starts with B. Keep the longest run per item.
  struct Run {
    std::size_t start, length;
  };
  std::array<std::optional<Run>, kItemCount> best{};
  std::vector<Run> runs;
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (out[t].tag != Tag::B) continue;
    std::size_t end = t + 1;
    while (end < out.size() && out[end].tag == Tag::I && out[end].item == out[t].item) ++end;
    auto& slot = best[canonical_index(out[t].item)];
    if (!slot || end - t >= slot->length) slot = Run{t, end - t};
    runs.push_back({t, end - t});
  }
  for (const Run& run : runs) {
    const auto& keep = best[canonical_index(out[run.start].item)];
    if (keep->start == run.start) continue;
    for (std::size_t t = run.start; t < run.start + run.length; ++t) out[t] = LineLabel::outside();
  }
  return out;
}

std::vector<ItemStart> select_ordered_starts(std::vector<ItemStart> candidates) {
  std::sort(candidates.begin(), candidates.end(), [](const ItemStart& a, const ItemStart& b) {
    if (a.line != b.line) return a.line < b.line;
    return item_before(a.item, b.item);
  });
  const std::size_t n = candidates.size();
  if (n == 0) return {};

  std::vector<std::size_t> chain(n, 1);
  std::vector<std::ptrdiff_t> prev(n, -1);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (candidates[j].line >= candidates[k].line) continue;
      if (!item_before(candidates[j].item, candidates[k].item)) continue;
      // Iterating j upward with >= prefers the later predecessor on ties.
      if (chain[j] + 1 >= chain[k]) {
        chain[k] = chain[j] + 1;
        prev[k] = static_cast<std::ptrdiff_t>(j);
      }
    }
  }
  std::size_t end = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (chain[k] >= chain[end]) end = k;
  }
  std::vector<ItemStart> picked;
  for (auto k = static_cast<std::ptrdiff_t>(end); k >= 0; k = prev[static_cast<std::size_t>(k)]) {
    picked.push_back(candidates[static_cast<std::size_t>(k)]);
  }
  std::reverse(picked.begin(), picked.end());
  return picked;
}

std::vector<ItemSpan> spans_from_starts(std::vector<ItemStart> starts, std::size_t n_lines) {
  std::sort(starts.begin(), starts.end(),
            [](const ItemStart& a, const ItemStart& b) { return a.line < b.line; });
  std::vector<ItemSpan> spans;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (starts[k].line >= n_lines) {
      throw LabelError("item start at line " + std::to_string(starts[k].line) + " is past the end of the document");
    }
    if (k > 0 && starts[k].line == starts[k - 1].line) {
      throw LabelError("two items start at line " + std::to_string(starts[k].line));
    }
    std::size_t end = k + 1 < starts.size() ? starts[k + 1].line - 1 : n_lines - 1;
    spans.push_back({starts[k].item, starts[k].line, end});
  }
  return spans;
}

}  // namespace itemseg
