#include <fstream>
#include <array>

#include "itemseg/document.hpp"
#include "itemseg/error.hpp"
#include "itemseg/util.hpp"
#include "json.hpp"

namespace itemseg {

using nlohmann::json;

std::vector<TextLine> number_lines(std::vector<std::string> texts) {
  std::vector<TextLine> lines;
  lines.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) lines.push_back({i, std::move(texts[i])});
  return lines;
}

namespace {

template <typename Fn>
void for_each_jsonl_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    fn(line, line_no);
  }
}

json parse_record(const std::string& text, std::size_t line_no) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw ParseError("record is not a JSON object", line_no);
    if (!j.contains("doc_id") || !j["doc_id"].is_string()) throw ParseError("record lacks a string doc_id", line_no);
    return j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
}

std::vector<std::string> string_array(const json& j, const char* key, std::size_t line_no) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ParseError(std::string("record lacks array field \"") + key + "\"", line_no);
  }
  std::vector<std::string> out;
  out.reserve(j[key].size());
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw ParseError(std::string("non-string entry in \"") + key + "\"", line_no);
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<ConvertedDocument> read_documents_jsonl(const std::filesystem::path& path) {
  std::vector<ConvertedDocument> docs;
  for_each_jsonl_record(path, [&](const std::string& text, std::size_t line_no) {
    json j = parse_record(text, line_no);
    docs.push_back({j["doc_id"].get<std::string>(), number_lines(string_array(j, "lines", line_no))});
  });
  return docs;
}

std::string format_document_jsonl(const ConvertedDocument& doc) {
  json lines = json::array();
  for (const auto& l : doc.lines) lines.push_back(l.text);
  json j = {{"doc_id", doc.doc_id}, {"lines", std::move(lines)}};
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

void write_documents_jsonl(const std::filesystem::path& path, const std::vector<ConvertedDocument>& docs) {
  std::string out;
  for (const auto& d : docs) {
    out += format_document_jsonl(d);
    out += '\n';
  }
  write_file_atomic(path, out);
}

AnnotatedDocument parse_labels_record(const std::string& text, std::size_t line_no) {
  json j = parse_record(text, line_no);
  AnnotatedDocument doc;
  doc.doc_id = j["doc_id"].get<std::string>();
  for (const auto& s : string_array(j, "labels", line_no)) {
    auto label = parse_label(s);
    if (!label) throw ParseError("unknown label \"" + s + "\" in " + doc.doc_id, line_no);
    doc.labels.push_back(*label);
  }
  if (j.contains("lines")) {
    doc.lines = number_lines(string_array(j, "lines", line_no));
    if (doc.lines.size() != doc.labels.size()) {
      throw ParseError(doc.doc_id + ": " + std::to_string(doc.lines.size()) + " lines but " +
                           std::to_string(doc.labels.size()) + " labels",
                       line_no);
    }
  }
  if (auto violation = validate_label_sequence(doc.labels)) {
    throw ParseError(doc.doc_id + ": invalid labels at position " + std::to_string(violation->position) + ": " +
                         violation->reason,
                     line_no);
  }
  return doc;
}

std::vector<AnnotatedDocument> read_labels_jsonl(const std::filesystem::path& path) {
  std::vector<AnnotatedDocument> docs;
  for_each_jsonl_record(path, [&](const std::string& text, std::size_t line_no) {
    docs.push_back(parse_labels_record(text, line_no));
  });
  return docs;
}

std::string format_labels_jsonl(const AnnotatedDocument& doc, bool include_lines) {
  json labels = json::array();
  for (const auto& l : doc.labels) labels.push_back(to_string(l));
  json j = {{"doc_id", doc.doc_id}, {"labels", std::move(labels)}};
  if (include_lines && !doc.lines.empty()) {
    json lines = json::array();
    for (const auto& l : doc.lines) lines.push_back(l.text);
    j["lines"] = std::move(lines);
  }
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

void write_labels_jsonl(const std::filesystem::path& path, const std::vector<AnnotatedDocument>& docs,
                        bool include_lines) {
  std::string out;
  for (const auto& d : docs) {
    out += format_labels_jsonl(d, include_lines);
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace itemseg

namespace itemseg {

std::vector<std::string> label_set_for(std::span<const AnnotatedDocument> corpus) {
  std::array<bool, kItemCount> present{};
  for (const auto& doc : corpus) {
    for (const auto& l : doc.labels) {
      if (!l.is_outside()) present[canonical_index(l.item)] = true;
    }
  }
  std::vector<std::string> names{"O"};
  for (Item item : kAllItems) {
    if (!present[canonical_index(item)]) continue;
    names.push_back(to_string(LineLabel::begin(item)));
    names.push_back(to_string(LineLabel::inside(item)));
  }
  return names;
}

}  // namespace itemseg
