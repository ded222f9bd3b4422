#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "itemseg/document.hpp"
#include "itemseg/sgml.hpp"

namespace itemseg {

/// Decodes HTML 4 named references, &apos;, and decimal/hex numeric
/// references into UTF-8. Numeric references in 128..159 are read as
/// Windows-1252, as old filings use them that way. Unknown or malformed
/// references are copied verbatim.
std::string decode_entities(std::string_view text);

/// Renders HTML into visual lines before filtering. Headings, paragraphs,
/// list items, divs and <br> start new lines; each table row becomes one
/// line with its non-empty cells joined by single spaces; inline markup is
/// flattened; runs of whitespace collapse, and inside <pre> newlines also
/// end lines. Never throws on malformed markup.
std::vector<std::string> render_html_lines(std::string_view html);

/// Newline split with trailing whitespace removed.
std::vector<std::string> split_plain_lines(std::string_view text);

/// Converts a session body to filtered, numbered lines.
std::vector<TextLine> html_to_lines(const DocumentSession& session);

/// True if `word` holds at least one letter (ASCII or common non-ASCII scripts).
bool has_letter(std::string_view word);

/// Drops empty lines and lines where more than half of the whitespace
/// separated words contain no letter, then renumbers from 0. Idempotent.
std::vector<TextLine> filter_lines(std::vector<TextLine> lines);

}  // namespace itemseg
