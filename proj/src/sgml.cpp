#include "itemseg/sgml.hpp"

#include <algorithm>
#include <cctype>

#include "itemseg/error.hpp"
#include "itemseg/util.hpp"

namespace itemseg {

namespace {

// Case-insensitive find of an ASCII tag.
std::size_t ifind(std::string_view hay, std::string_view needle, std::size_t from = 0) {
  if (needle.size() > hay.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size(); ++k) {
      if (std::toupper(static_cast<unsigned char>(hay[i + k])) != std::toupper(static_cast<unsigned char>(needle[k]))) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

bool istarts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && ifind(s.substr(0, prefix.size()), prefix) == 0;
}

bool iends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && ifind(s.substr(s.size() - suffix.size()), suffix) == 0;
}

/// Value of a one-line header tag such as "<TYPE>10-K".
std::string header_value(std::string_view block, std::string_view tag) {
  std::size_t at = ifind(block, tag);
  if (at == std::string_view::npos) return {};
  std::size_t start = at + tag.size();
  std::size_t end = block.find_first_of("\r\n<", start);
  return std::string(trim(block.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
}

BodyFormat detect_format(std::string_view filename, std::string_view body) {
  if (iends_with(filename, ".htm") || iends_with(filename, ".html")) return BodyFormat::html;
  std::string_view head = trim(body.substr(0, std::min<std::size_t>(body.size(), 512)));
  if (istarts_with(head, "<html") || istarts_with(head, "<!doctype html")) return BodyFormat::html;
  return BodyFormat::plain_text;
}

}  // namespace

std::vector<DocumentSession> unwrap_document_sessions(std::string_view raw) {
  static constexpr std::string_view kOpen = "<DOCUMENT>";
  static constexpr std::string_view kClose = "</DOCUMENT>";

  std::vector<DocumentSession> sessions;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = ifind(raw, kOpen, pos);
    if (open == std::string_view::npos) break;
    std::size_t close = ifind(raw, kClose, open + kOpen.size());
    std::size_t next_open =
        ifind(raw.substr(0, close == std::string_view::npos ? raw.size() : close), kOpen, open + kOpen.size());
    if (close == std::string_view::npos || next_open != std::string_view::npos) {
      throw SgmlError("unterminated <DOCUMENT> block", open);
    }
    std::string_view block = raw.substr(open + kOpen.size(), close - open - kOpen.size());

    DocumentSession s;
    std::size_t text_open = ifind(block, "<TEXT>");
    std::string_view header = text_open == std::string_view::npos ? block : block.substr(0, text_open);
    s.doc_type = header_value(header, "<TYPE>");
    s.filename = header_value(header, "<FILENAME>");
    if (text_open != std::string_view::npos) {
      std::size_t body_start = text_open + 6;
      std::size_t text_close = ifind(block, "</TEXT>", body_start);
      if (text_close == std::string_view::npos) throw SgmlError("unterminated <TEXT> section", open + kOpen.size() + text_open);
      std::string_view body = block.substr(body_start, text_close - body_start);
      // Drop the line break that follows <TEXT>.
      if (!body.empty() && body.front() == '\r') body.remove_prefix(1);
      if (!body.empty() && body.front() == '\n') body.remove_prefix(1);
      s.body = std::string(body);
    }
    if (trim(s.body).empty()) throw SgmlError("document block has an empty body", open);
    s.body_format = detect_format(s.filename, s.body);
    sessions.push_back(std::move(s));
    pos = close + kClose.size();
  }
  if (sessions.empty()) throw SgmlError("no <DOCUMENT> blocks found", 0);
  return sessions;
}

std::optional<std::size_t> primary_session(const std::vector<DocumentSession>& sessions,
                                           const std::set<std::string>& form_types) {
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    if (form_types.contains(sessions[i].doc_type)) return i;
  }
  return std::nullopt;
}

}  // namespace itemseg
