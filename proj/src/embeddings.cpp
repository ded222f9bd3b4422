#include "itemseg/embeddings.hpp"

#include <cctype>
#include <cmath>

#include "itemseg/crf_features.hpp"
#include "itemseg/error.hpp"
#include "itemseg/util.hpp"
#include "json.hpp"

namespace itemseg {


std::map<std::string, const EmbeddingMatrix*> EmbeddingFile::index() const {
  std::map<std::string, const EmbeddingMatrix*> out;
  for (const auto& d : docs) {
    if (!out.emplace(d.doc_id, &d).second) throw ParseError("duplicate doc_id in embedding file: " + d.doc_id);
  }
  return out;
}

std::string serialize_embeddings(const EmbeddingFile& file) {
  std::string out = "LEMB";
  put_u32_le(out, kEmbeddingFileVersion);
  put_u32_le(out, file.dim);
  put_u32_le(out, static_cast<std::uint32_t>(file.docs.size()));
  std::string meta = nlohmann::json{{"encoder", file.encoder}}.dump();
  put_u32_le(out, static_cast<std::uint32_t>(meta.size()));
  out += meta;
  for (const auto& d : file.docs) {
    if (d.n_lines() > 0 && d.dim() != file.dim) {
      throw ModelError("embedding width of " + d.doc_id + " differs from the file width");
    }
    put_u32_le(out, static_cast<std::uint32_t>(d.doc_id.size()));
    out += d.doc_id;
    put_u32_le(out, static_cast<std::uint32_t>(d.n_lines()));
    for (Eigen::Index r = 0; r < d.rows.rows(); ++r) {
      for (Eigen::Index c = 0; c < d.rows.cols(); ++c) put_f32_le(out, d.rows(r, c));
    }
  }
  return out;
}

EmbeddingFile parse_embeddings(std::string_view bytes) {
  ByteReader in(bytes);
  if (in.take(4, "magic") != "LEMB") throw ParseError("not an embedding file (bad magic)");
  std::uint32_t version = in.u32("version");
  if (version != kEmbeddingFileVersion) throw ParseError("unsupported embedding file version " + std::to_string(version));
  EmbeddingFile file;
  file.dim = in.u32("dim");
  std::uint32_t n_docs = in.u32("document count");
  std::uint32_t meta_len = in.u32("metadata length");
  std::string_view meta = in.take(meta_len, "metadata");
  if (!meta.empty()) {
    auto j = nlohmann::json::parse(meta, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("embedding file metadata is not a JSON object");
    if (j.contains("encoder") && j["encoder"].is_string()) file.encoder = j["encoder"].get<std::string>();
  }
  file.docs.reserve(n_docs);
  for (std::uint32_t d = 0; d < n_docs; ++d) {
    EmbeddingMatrix m;
    m.doc_id = std::string(in.take(in.u32("doc_id length"), "doc_id"));
    std::uint32_t n = in.u32("line count");
    if (static_cast<std::uint64_t>(n) * file.dim * 4 > bytes.size() - in.pos()) {
      throw ParseError("embedding file truncated in document " + m.doc_id);
    }
    m.rows.resize(n, file.dim);
    for (std::uint32_t r = 0; r < n; ++r) {
      for (std::uint32_t c = 0; c < file.dim; ++c) {
        float v = in.f32("vector");
        if (!std::isfinite(v)) throw ParseError("non-finite embedding value in document " + m.doc_id);
        m.rows(r, c) = v;
      }
    }
    file.docs.push_back(std::move(m));
  }
  if (!in.done()) throw ParseError("trailing bytes after the last embedding record");
  file.index();
  return file;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingFile& file) {
  write_file_atomic(path, serialize_embeddings(file));
}

EmbeddingFile read_embeddings(const std::filesystem::path& path) { return parse_embeddings(read_file(path)); }

std::vector<float> pseudo_embedding(std::string_view text, std::size_t dim) {
  std::vector<float> v(dim, 0.0f);
  if (dim == 0) return v;
  auto add = [&](const std::string& token, float weight) {
    std::uint64_t h = fnv1a64(token);
    v[h % dim] += (h >> 63) ? -weight : weight;
  };
  auto tokens = feature_tokens(text);
  for (const auto& t : tokens) add("w:" + t, 1.0f);
  if (tokens.size() >= 2 && tokens[0] == "item") {
    add("head:" + tokens[1], 3.0f);
    add("shape:item_lead", 2.0f);
  }
  std::string_view t = trim(text);
  std::size_t letters = 0, upper = 0;
  for (unsigned char c : t) {
    if (std::isalpha(c)) {
      ++letters;
      if (std::isupper(c)) ++upper;
    }
  }
  if (letters && 2 * upper > letters) add("shape:mostly_upper", 1.5f);
  std::size_t words = split_words(t).size();
  add("shape:len" + std::to_string(words < 4 ? 0 : words < 10 ? 1 : words < 30 ? 2 : 3), 1.5f);

  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  if (sq > 0.0) {
    float inv = static_cast<float>(1.0 / std::sqrt(sq));
    for (float& x : v) x *= inv;
  }
  return v;
}

EmbeddingMatrix embed_document(const std::string& doc_id, std::span<const TextLine> lines, std::size_t dim) {
  EmbeddingMatrix m;
  m.doc_id = doc_id;
  m.rows.resize(static_cast<Eigen::Index>(lines.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto v = pseudo_embedding(lines[i].text, dim);
    for (std::size_t c = 0; c < dim; ++c) m.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v[c];
  }
  return m;
}

}  // namespace itemseg
