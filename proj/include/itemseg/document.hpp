#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "itemseg/labels.hpp"

namespace itemseg {

/// One visual line of a converted filing. line_id is its 0-based position
/// after filtering.
struct TextLine {
  std::size_t line_id = 0;
  std::string text;

  friend bool operator==(const TextLine&, const TextLine&) = default;
};

/// Builds TextLines numbered 0..n-1.
std::vector<TextLine> number_lines(std::vector<std::string> texts);

struct ConvertedDocument {
  std::string doc_id;
  std::vector<TextLine> lines;
};

/// A document with one label per line. `lines` may be empty when only labels
/// were loaded (prediction files carry no text).
struct AnnotatedDocument {
  std::string doc_id;
  std::vector<TextLine> lines;
  std::vector<LineLabel> labels;
};

// Converted documents: {"doc_id": text, "lines": [text, ...]} per line.
std::vector<ConvertedDocument> read_documents_jsonl(const std::filesystem::path& path);
std::string format_document_jsonl(const ConvertedDocument& doc);
void write_documents_jsonl(const std::filesystem::path& path, const std::vector<ConvertedDocument>& docs);

// Gold/prediction labels: {"doc_id": text, "labels": ["O", "B1", ...], "lines": [...]?}.
// Loading validates each label sequence and rejects duplicate item starts.
std::vector<AnnotatedDocument> read_labels_jsonl(const std::filesystem::path& path);
AnnotatedDocument parse_labels_record(const std::string& json_line, std::size_t line_no = 0);
std::string format_labels_jsonl(const AnnotatedDocument& doc, bool include_lines);
void write_labels_jsonl(const std::filesystem::path& path, const std::vector<AnnotatedDocument>& docs,
                        bool include_lines);

/// Label strings for the trainable taggers: O, then B and I of every item
/// that occurs in the corpus, in canonical item order.
std::vector<std::string> label_set_for(std::span<const AnnotatedDocument> corpus);

}  // namespace itemseg
