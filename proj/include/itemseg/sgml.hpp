#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace itemseg {

enum class BodyFormat { html, plain_text };

/// One <DOCUMENT> block of an EDGAR submission.
struct DocumentSession {
  std::string doc_type;
  std::string filename;
  std::string body;  // contents of <TEXT>...</TEXT>
  BodyFormat body_format = BodyFormat::plain_text;
};

/// Splits a raw EDGAR submission into its document blocks, in order.
/// Throws SgmlError when no block exists, a block is unterminated, or a
/// block has an empty body.
std::vector<DocumentSession> unwrap_document_sessions(std::string_view raw_sgml);

/// First session whose type is one of `form_types`. When several sessions
/// carry a matching type, the first wins.
std::optional<std::size_t> primary_session(const std::vector<DocumentSession>& sessions,
                                           const std::set<std::string>& form_types);

}  // namespace itemseg
