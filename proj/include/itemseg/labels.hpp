#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itemseg/items.hpp"

namespace itemseg {

enum class Tag : std::uint8_t { O, B, I };

/// Modified-BIO line label. O labels always carry Item::k1 so that
/// defaulted comparison is meaningful.
struct LineLabel {
  Tag tag = Tag::O;
  Item item = Item::k1;

  static constexpr LineLabel outside() { return {}; }
  static constexpr LineLabel begin(Item it) { return {Tag::B, it}; }
  static constexpr LineLabel inside(Item it) { return {Tag::I, it}; }

  constexpr bool is_outside() const { return tag == Tag::O; }

  friend constexpr bool operator==(const LineLabel&, const LineLabel&) = default;
};

/// "O", "B1", "I7A", ...
std::string to_string(LineLabel label);
std::optional<LineLabel> parse_label(std::string_view text);

struct ItemSpan {
  Item item = Item::k1;
  std::size_t start_line = 0;
  std::size_t end_line = 0;  // inclusive

  friend bool operator==(const ItemSpan&, const ItemSpan&) = default;
};

struct LabelViolation {
  std::size_t position = 0;
  std::string reason;
};

/// Empty optional means the sequence is valid.
std::optional<LabelViolation> validate_label_sequence(std::span<const LineLabel> labels);

/// Throws LabelError on an invalid sequence.
std::vector<ItemSpan> labels_to_spans(std::span<const LineLabel> labels);

/// Throws LabelError when spans overlap, repeat an item, or run past n_lines.
std::vector<LineLabel> spans_to_labels(std::span<const ItemSpan> spans, std::size_t n_lines);

/// Turns a decoder's raw output into a valid sequence. An I with no B or I of
/// the same item directly before it becomes B. When one item then begins more
/// than once, its longest run is kept (ties go to the later run) and the
/// others are relabeled O.
std::vector<LineLabel> repair_labels(std::span<const LineLabel> labels);

struct ItemStart {
  Item item = Item::k1;
  std::size_t line = 0;

  friend bool operator==(const ItemStart&, const ItemStart&) = default;
};

/// Picks the largest subset of candidate starts whose items strictly increase in
/// canonical order as line numbers strictly increase. Among equally large
/// subsets the one using later lines wins. Result is sorted by line.
std::vector<ItemStart> select_ordered_starts(std::vector<ItemStart> candidates);

/// Each start spans to the line before the next start; the last runs to n_lines - 1.
/// Starts must have distinct lines below n_lines.
std::vector<ItemSpan> spans_from_starts(std::vector<ItemStart> starts, std::size_t n_lines);

}  // namespace itemseg
