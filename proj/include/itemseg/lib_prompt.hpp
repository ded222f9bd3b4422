#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "itemseg/document.hpp"
#include "itemseg/error.hpp"
#include "itemseg/items.hpp"

namespace itemseg {

/// A document rendered for line-ID-based prompting: every line keeps its id
/// and at most `word_limit` leading words.
struct LibReport {
  struct Line {
    std::size_t line_id = 0;
    std::string text;
  };
  std::vector<Line> lines;
  std::size_t word_limit = 0;

  /// "<id> <words>" per line, newline-terminated.
  std::string render() const;
};

/// Throws std::invalid_argument when word_limit is 0.
LibReport format_lib_report(std::span<const TextLine> lines, std::size_t word_limit);

struct Demonstration {
  std::string excerpt;          // LIB-formatted partial report
  std::string expected_output;  // "Item X,<id|NA>" rows
};

/// JSON Lines of {"excerpt", "expected_output"}. Throws ParseError when an
/// expected line id does not occur in its excerpt.
std::vector<Demonstration> load_demonstrations(const std::filesystem::path& path);
void check_demonstration(const Demonstration& demo);

/// The items asked for by default: 1, 1A, 2, 3, 4, 5, 6, 7, 7A, 8, 9, 9A, 10-15.
std::vector<Item> default_lib_items();

/// Full prompt text: task description, optional fenced demonstrations, the
/// fenced target report, and the output instruction.
std::string build_prompt(const LibReport& report, std::span<const Demonstration> demos, std::span<const Item> items);

struct PromptBudget {
  std::size_t word_limit = 30;
  std::size_t min_word_limit = 5;
  std::size_t context_tokens = 128000;
  double chars_per_token = 4.0;
  std::size_t max_demos = 10;

  std::size_t char_budget() const { return static_cast<std::size_t>(static_cast<double>(context_tokens) * chars_per_token); }
};

class PromptBudgetError : public Error {
 public:
  PromptBudgetError(std::size_t required_tokens, std::size_t available_tokens)
      : Error("prompt needs about " + std::to_string(required_tokens) + " tokens but only " +
              std::to_string(available_tokens) + " are available"),
        required_(required_tokens),
        available_(available_tokens) {}
  std::size_t required_tokens() const { return required_; }
  std::size_t available_tokens() const { return available_; }

 private:
  std::size_t required_, available_;
};

struct BuiltPrompt {
  std::string text;
  std::size_t word_limit = 0;
  std::size_t issued_ids = 0;  // ids 0..issued_ids-1 appear in the prompt
};

/// Builds the prompt at budget.word_limit, halving the limit (not below
/// min_word_limit) while the prompt exceeds the character budget.
BuiltPrompt build_prompt_within_budget(std::span<const TextLine> lines, std::span<const Demonstration> demos,
                                       std::span<const Item> items, const PromptBudget& budget);

/// Validated answer: one entry per requested item, in request order.
struct LibResponse {
  std::vector<std::pair<Item, std::optional<std::size_t>>> assignments;
  friend bool operator==(const LibResponse&, const LibResponse&) = default;
};

struct ResponseVerdict {
  std::optional<LibResponse> response;  // set when accepted
  std::vector<std::string> reasons;     // set when rejected
  bool accepted() const { return response.has_value(); }
};

/// Reads "Item X,Y" rows anywhere in `text`. Rejects rows for unrequested
/// items, repeated or missing items, non-integer ids, and ids outside
/// [0, issued_ids).
ResponseVerdict parse_response(std::string_view text, std::size_t issued_ids, std::span<const Item> items);

/// Inverse of parse_response for accepted responses.
std::string render_response(const LibResponse& response);

}  // namespace itemseg
