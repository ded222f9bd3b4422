#include "itemseg/lib_prompt.hpp"

#include <charconv>
#include <fstream>
#include <regex>
#include <set>
#include <stdexcept>

#include "itemseg/util.hpp"
#include "json.hpp"

namespace itemseg {

std::string LibReport::render() const {
  std::string out;
  for (const auto& l : lines) {
    out += std::to_string(l.line_id);
    if (!l.text.empty()) {
      out += ' ';
      out += l.text;
    }
    out += '\n';
  }
  return out;
}

LibReport format_lib_report(std::span<const TextLine> lines, std::size_t word_limit) {
  if (word_limit == 0) throw std::invalid_argument("word limit must be at least 1");
  LibReport report;
  report.word_limit = word_limit;
  report.lines.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto words = split_words(lines[i].text);
    std::string text;
    for (std::size_t k = 0; k < words.size() && k < word_limit; ++k) {
      if (k) text += ' ';
      text += words[k];
    }
    report.lines.push_back({i, std::move(text)});
  }
  return report;
}

std::vector<Item> default_lib_items() {
  return {Item::k1, Item::k1A, Item::k2,  Item::k3,  Item::k4,  Item::k5,  Item::k6,  Item::k7,  Item::k7A,
          Item::k8, Item::k9,  Item::k9A, Item::k10, Item::k11, Item::k12, Item::k13, Item::k14, Item::k15};
}

namespace {

const std::regex& row_pattern() {
  static const std::regex re(R"(^\s*Item\s+([0-9]{1,2}[A-Ca-c]?)\s*,\s*(.*?)\s*$)", std::regex::icase);
  return re;
}

std::optional<std::size_t> parse_id(std::string_view s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string_view> lines_of(std::string_view s) {
  std::vector<std::string_view> out;
  while (!s.empty()) {
    auto nl = s.find('\n');
    out.push_back(s.substr(0, nl));
    if (nl == std::string_view::npos) break;
    s.remove_prefix(nl + 1);
  }
  return out;
}

std::string item_list(std::span<const Item> items) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k) out += ", ";
    out += "Item ";
    out += to_string(items[k]);
  }
  return out;
}

}  // namespace

void check_demonstration(const Demonstration& demo) {
  std::set<std::size_t> ids;
  for (auto line : lines_of(demo.excerpt)) {
    auto words = split_words(line);
    if (!words.empty()) {
      if (auto id = parse_id(words[0])) ids.insert(*id);
    }
  }
  for (auto line : lines_of(demo.expected_output)) {
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(line.begin(), line.end(), m, row_pattern())) continue;
    std::string value = m[2].str();
    if (value == "NA") continue;
    auto id = parse_id(value);
    if (!id || !ids.contains(*id)) throw ParseError("demonstration output names line " + value + " absent from its excerpt");
  }
}

std::vector<Demonstration> load_demonstrations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open demonstrations file " + path.string());
  std::vector<Demonstration> demos;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("excerpt") || !j.contains("expected_output") ||
        !j["excerpt"].is_string() || !j["expected_output"].is_string()) {
      throw ParseError("demonstration record needs string fields excerpt and expected_output", line_no);
    }
    Demonstration d{j["excerpt"].get<std::string>(), j["expected_output"].get<std::string>()};
    try {
      check_demonstration(d);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    demos.push_back(std::move(d));
  }
  return demos;
}

std::string build_prompt(const LibReport& report, std::span<const Demonstration> demos, std::span<const Item> items) {
  std::string p;
  p += "You are an expert reader of annual reports. Your job is to find the line on which each item of the "
       "Form 10-K report below begins.\n\n";
  p += "The items of a Form 10-K are:\n";
  for (Item item : kAllItems) {
    p += "Item ";
    p += to_string(item);
    p += ". ";
    p += canonical_title(item);
    p += '\n';
  }
  p += "\nEvery line of the report starts with its line ID. An item normally opens with its heading line and its "
       "text follows. Give the line ID where each of these items begins: ";
  p += item_list(items);
  p += ". If the item is not available, print NA.\n";
  p += "A table of contents near the top of a report repeats the item headings. Those lines do not start an "
       "item, so skip them.\n";

  if (!demos.empty()) {
    p += "\nWorked examples follow, each showing part of a report and the answer for it.\n";
    for (std::size_t k = 0; k < demos.size(); ++k) {
      p += "\nExample " + std::to_string(k + 1) + ":\n=====\n";
      p += demos[k].excerpt;
      if (!demos[k].excerpt.ends_with('\n')) p += '\n';
      p += "=====\nOutput:\n";
      p += demos[k].expected_output;
      if (!demos[k].expected_output.ends_with('\n')) p += '\n';
    }
  }

  p += "\nThe task:\nHere is the full report. Answer with a two-column table: the item ID first, the line ID "
       "second. Use comma (\",\") to separate the two columns. Write one row per item, for example \"Item 1,12\", "
       "without extra white space.\n=====\n";
  p += report.render();
  p += "=====\nOutput:\n";
  return p;
}

BuiltPrompt build_prompt_within_budget(std::span<const TextLine> lines, std::span<const Demonstration> demos,
                                       std::span<const Item> items, const PromptBudget& budget) {
  if (demos.size() > budget.max_demos) {
    throw std::invalid_argument("at most " + std::to_string(budget.max_demos) + " demonstrations are allowed");
  }
  const std::size_t limit = budget.char_budget();
  auto tokens = [&](std::size_t chars) {
    return static_cast<std::size_t>(static_cast<double>(chars) / budget.chars_per_token + 0.999999);
  };
  std::size_t L = std::max<std::size_t>(budget.word_limit, 1);
  const std::size_t floor = std::max<std::size_t>(1, std::min(budget.min_word_limit, L));
  for (;;) {
    BuiltPrompt b;
    b.text = build_prompt(format_lib_report(lines, L), demos, items);
    b.word_limit = L;
    b.issued_ids = lines.size();
    if (b.text.size() <= limit) return b;
    if (L == floor) throw PromptBudgetError(tokens(b.text.size()), budget.context_tokens);
    L = std::max(floor, L / 2);
  }
}

ResponseVerdict parse_response(std::string_view text, std::size_t issued_ids, std::span<const Item> items) {
  ResponseVerdict v;
  std::vector<std::optional<std::optional<std::size_t>>> seen(items.size());
  auto slot = [&](Item item) -> std::optional<std::size_t> {
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (items[k] == item) return k;
    }
    return std::nullopt;
  };

  for (auto line : lines_of(text)) {
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(line.begin(), line.end(), m, row_pattern())) continue;
    std::string id_text = m[1].str();
    std::string value = m[2].str();
    auto item = parse_item(id_text);
    auto k = item ? slot(*item) : std::nullopt;
    if (!k) {
      v.reasons.push_back("Item " + id_text + " was not requested");
    } else if (seen[*k]) {
      v.reasons.push_back("Item " + id_text + " appears more than once");
    } else if (value == "NA" || value == "na") {
      seen[*k] = std::optional<std::size_t>{};
    } else if (auto id = parse_id(value)) {
      if (*id >= issued_ids) v.reasons.push_back("Item " + id_text + " names line " + value + ", which was not issued");
      seen[*k] = id;
    } else {
      v.reasons.push_back("Item " + id_text + " has a non-integer line ID \"" + value + "\"");
      seen[*k] = std::optional<std::size_t>{};
    }
  }
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (!seen[k]) v.reasons.push_back("Item " + std::string(to_string(items[k])) + " is missing");
  }
  if (v.reasons.empty()) {
    LibResponse r;
    for (std::size_t k = 0; k < items.size(); ++k) r.assignments.emplace_back(items[k], *seen[k]);
    v.response = std::move(r);
  }
  return v;
}

std::string render_response(const LibResponse& response) {
  std::string out;
  for (const auto& [item, id] : response.assignments) {
    out += "Item ";
    out += to_string(item);
    out += ',';
    out += id ? std::to_string(*id) : "NA";
    out += '\n';
  }
  return out;
}

}  // namespace itemseg
