#include "itemseg/html_text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

#include "html_entities.inc"
#include "itemseg/util.hpp"

namespace itemseg {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Windows-1252 code points for bytes 0x80..0x9F; 0 where undefined.
constexpr std::array<std::uint16_t, 32> kCp1252 = {
    0x20AC, 0,      0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0,      0x017D, 0,      0,      0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0,      0x017E, 0x0178,
};

std::optional<std::uint32_t> numeric_reference(std::string_view body) {
  // body is what follows "&#", without the ';'.
  bool hex = !body.empty() && (body[0] == 'x' || body[0] == 'X');
  if (hex) body.remove_prefix(1);
  if (body.empty() || body.size() > 8) return std::nullopt;
  std::uint32_t cp = 0;
  for (char c : body) {
    int digit;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (hex && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
    else if (hex && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
    else return std::nullopt;
    cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(digit);
    if (cp > 0x10FFFF) return std::nullopt;
  }
  if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) return std::nullopt;
  if (cp >= 0x80 && cp <= 0x9F) {
    std::uint32_t mapped = kCp1252[cp - 0x80];
    if (mapped == 0) return std::nullopt;
    return mapped;
  }
  return cp;
}

std::optional<std::uint32_t> named_reference(std::string_view name) {
  const auto* begin = std::begin(detail::kNamedEntities);
  const auto* end = std::end(detail::kNamedEntities);
  const auto* it = std::lower_bound(begin, end, name,
                                    [](const detail::NamedEntity& e, std::string_view n) { return e.name < n; });
  if (it != end && it->name == name) return it->codepoint;
  return std::nullopt;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

/// Accumulates flattened text into visual lines, tracking table structure.
class LineRenderer {
 public:
  void text(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      char c = s[i];
      // U+00A0 renders as a plain space.
      if (c == '\xC2' && i + 1 < s.size() && s[i + 1] == '\xA0') {
        pending_space_ = true;
        ++i;
        continue;
      }
      if (is_space(c)) {
        if (pre_depth_ > 0 && c == '\n') {
          line_break();
        } else {
          pending_space_ = true;
        }
        continue;
      }
      std::string& buf = target();
      if (pending_space_ && !buf.empty() && buf.back() != ' ') buf.push_back(' ');
      pending_space_ = false;
      buf.push_back(c);
    }
  }

  void block_break() {
    if (!tables_.empty()) {
      pending_space_ = true;
      return;
    }
    flush();
  }

  void line_break() { block_break(); }

  void enter_pre() {
    block_break();
    ++pre_depth_;
  }
  void leave_pre() {
    block_break();
    if (pre_depth_ > 0) --pre_depth_;
  }

  void open_table() {
    if (tables_.empty()) flush();
    pending_space_ = false;
    tables_.emplace_back();
  }

  void close_table() {
    if (tables_.empty()) return;
    close_row();
    tables_.pop_back();
    pending_space_ = !tables_.empty();
  }

  void open_row() {
    if (tables_.empty()) return;
    if (tables_.back().in_row) close_row();
    tables_.back().in_row = true;
  }

  void open_cell() {
    if (tables_.empty()) return;
    close_cell();
  }

  void close_cell() {
    if (tables_.empty()) return;
    Table& t = tables_.back();
    std::string_view cell = trim(t.cell);
    if (!cell.empty()) t.cells.emplace_back(cell);
    t.cell.clear();
    pending_space_ = false;
  }

  void close_row() {
    if (tables_.empty()) return;
    close_cell();
    Table& t = tables_.back();
    std::string row;
    for (const auto& c : t.cells) {
      if (!row.empty()) row.push_back(' ');
      row += c;
    }
    t.cells.clear();
    t.in_row = false;
    if (row.empty()) return;
    if (tables_.size() == 1) {
      lines_.push_back(std::move(row));
    } else {
      // A nested table flattens into the enclosing cell.
      std::string& outer = tables_[tables_.size() - 2].cell;
      if (!outer.empty()) outer.push_back(' ');
      outer += row;
    }
  }

  std::vector<std::string> finish() {
    while (!tables_.empty()) close_table();
    flush();
    return std::move(lines_);
  }

 private:
  struct Table {
    std::vector<std::string> cells;
    std::string cell;
    bool in_row = false;
  };

  std::string& target() { return tables_.empty() ? line_ : tables_.back().cell; }

  void flush() {
    std::string_view t = trim(line_);
    if (!t.empty()) lines_.emplace_back(t);
    line_.clear();
    pending_space_ = false;
  }

  std::vector<std::string> lines_;
  std::string line_;
  std::vector<Table> tables_;
  bool pending_space_ = false;
  int pre_depth_ = 0;
};

bool is_block_tag(std::string_view name) {
  static constexpr std::string_view kBlocks[] = {
      "address", "article", "aside", "blockquote", "body", "caption", "center", "dd", "div", "dl", "dt",
      "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header",
      "hr", "html", "li", "main", "nav", "ol", "p", "page", "section", "ul",
  };
  return std::find(std::begin(kBlocks), std::end(kBlocks), name) != std::end(kBlocks);
}

bool is_skipped_content(std::string_view name) {
  return name == "script" || name == "style" || name == "head" || name == "title" || name == "ix:header" ||
         name == "noscript";
}

std::size_t ifind(std::string_view hay, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    std::size_t k = 0;
    while (k < needle.size() &&
           std::tolower(static_cast<unsigned char>(hay[i + k])) == static_cast<unsigned char>(needle[k])) {
      ++k;
    }
    if (k == needle.size()) return i;
  }
  return std::string_view::npos;
}

/// End of a tag starting at `lt` (index of '>'), honoring quoted attribute values.
std::size_t tag_end(std::string_view html, std::size_t lt) {
  char quote = 0;
  for (std::size_t i = lt + 1; i < html.size(); ++i) {
    char c = html[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      return i;
    } else if (c == '<') {
      return std::string_view::npos;  // broken tag; treat '<' as text
    }
  }
  return std::string_view::npos;
}

std::uint32_t decode_utf8_at(std::string_view s, std::size_t& i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  std::size_t extra = (b0 >> 5) == 0x6 ? 1 : (b0 >> 4) == 0xE ? 2 : (b0 >> 3) == 0x1E ? 3 : 0;
  if (extra == 0 || i + extra >= s.size()) {
    ++i;
    return 0xFFFD;
  }
  std::uint32_t cp = b0 & (0x3Fu >> extra);
  for (std::size_t k = 1; k <= extra; ++k) {
    auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += extra + 1;
  return cp;
}

bool is_letter_codepoint(std::uint32_t cp) {
  if (cp < 0x80) return std::isalpha(static_cast<int>(cp)) != 0;
  if (cp == 0xAA || cp == 0xB5 || cp == 0xBA) return true;
  if (cp >= 0xC0 && cp <= 0x2AF) return cp != 0xD7 && cp != 0xF7;
  if (cp >= 0x370 && cp <= 0x52F) return cp != 0x37E && cp != 0x387;
  if (cp >= 0x3040 && cp <= 0x30FF) return true;
  if (cp >= 0x4E00 && cp <= 0x9FFF) return true;
  if (cp >= 0xAC00 && cp <= 0xD7A3) return true;
  return false;
}

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    std::size_t semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 32) {
      out.push_back(text[i++]);
      continue;
    }
    std::string_view body = text.substr(i + 1, semi - i - 1);
    std::optional<std::uint32_t> cp;
    if (!body.empty() && body[0] == '#') {
      cp = numeric_reference(body.substr(1));
    } else {
      cp = named_reference(body);
    }
    if (!cp) {
      out.push_back(text[i++]);
      continue;
    }
    append_utf8(out, *cp);
    i = semi + 1;
  }
  return out;
}

std::vector<std::string> render_html_lines(std::string_view html) {
  LineRenderer r;
  std::size_t i = 0;
  std::size_t text_start = 0;
  auto emit_text = [&](std::size_t end) {
    if (end > text_start) r.text(decode_entities(html.substr(text_start, end - text_start)));
  };

  while (i < html.size()) {
    if (html[i] != '<') {
      ++i;
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      emit_text(i);
      std::size_t close = html.find("-->", i + 4);
      i = close == std::string_view::npos ? html.size() : close + 3;
      text_start = i;
      continue;
    }
    if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
      emit_text(i);
      std::size_t close = html.find('>', i + 2);
      i = close == std::string_view::npos ? html.size() : close + 1;
      text_start = i;
      continue;
    }

    std::size_t p = i + 1;
    bool closing = p < html.size() && html[p] == '/';
    if (closing) ++p;
    std::size_t name_start = p;
    while (p < html.size() && (std::isalnum(static_cast<unsigned char>(html[p])) || html[p] == ':' ||
                               html[p] == '-' || html[p] == '_')) {
      ++p;
    }
    if (p == name_start || !std::isalpha(static_cast<unsigned char>(html[name_start]))) {
      ++i;  // not a tag; '<' stays in the text
      continue;
    }
    std::size_t end = tag_end(html, i);
    if (end == std::string_view::npos) {
      ++i;
      continue;
    }
    emit_text(i);
    std::string name = to_lower(html.substr(name_start, p - name_start));
    bool self_closing = html[end - 1] == '/';
    i = end + 1;
    text_start = i;

    if (!closing && !self_closing && is_skipped_content(name)) {
      std::size_t close = ifind(html, "</" + name, i);
      if (close == std::string_view::npos) {
        i = html.size();
      } else {
        std::size_t gt = html.find('>', close);
        i = gt == std::string_view::npos ? html.size() : gt + 1;
      }
      text_start = i;
      continue;
    }

    if (name == "table") {
      closing ? r.close_table() : r.open_table();
    } else if (name == "tr") {
      closing ? r.close_row() : r.open_row();
    } else if (name == "td" || name == "th") {
      closing ? r.close_cell() : r.open_cell();
    } else if (name == "br") {
      r.line_break();
    } else if (name == "pre" || name == "xmp" || name == "plaintext") {
      closing ? r.leave_pre() : r.enter_pre();
    } else if (is_block_tag(name)) {
      r.block_break();
    }
  }
  emit_text(html.size());
  return r.finish();
}

std::vector<std::string> split_plain_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    std::string cleaned(rtrim(line));
    std::replace_if(cleaned.begin(), cleaned.end(), [](char c) { return c == '\r' || c == '\f' || c == '\v'; }, ' ');
    lines.push_back(std::move(cleaned));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<TextLine> html_to_lines(const DocumentSession& session) {
  std::vector<std::string> texts;
  if (session.body_format == BodyFormat::html) {
    texts = render_html_lines(session.body);
  } else {
    for (auto& line : split_plain_lines(session.body)) {
      // Old text filings carry SGML pagination markers on their own lines.
      std::string_view t = trim(line);
      std::string upper = to_lower(t);
      if (upper == "<page>" || upper == "<table>" || upper == "</table>" || upper == "<caption>" ||
          upper == "<s>" || upper == "<c>" || upper == "<fn>") {
        continue;
      }
      texts.push_back(std::move(line));
    }
  }
  return filter_lines(number_lines(std::move(texts)));
}

bool has_letter(std::string_view word) {
  std::size_t i = 0;
  while (i < word.size()) {
    if (is_letter_codepoint(decode_utf8_at(word, i))) return true;
  }
  return false;
}

std::vector<TextLine> filter_lines(std::vector<TextLine> lines) {
  std::vector<TextLine> kept;
  kept.reserve(lines.size());
  for (auto& line : lines) {
    auto words = split_words(line.text);
    if (words.empty()) continue;
    std::size_t non_alpha = 0;
    for (auto w : words) non_alpha += has_letter(w) ? 0 : 1;
    if (2 * non_alpha > words.size()) continue;
    std::string text(rtrim(line.text));
    kept.push_back({kept.size(), std::move(text)});
  }
  return kept;
}

}  // namespace itemseg
