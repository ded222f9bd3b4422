#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itemseg/document.hpp"

namespace itemseg {

/// Per-line embedding vectors of one document; row t belongs to line t.
struct EmbeddingMatrix {
  std::string doc_id;
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows;

  std::size_t n_lines() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }
};

/// LEMB container, little-endian throughout:
///   "LEMB" | u32 version (1) | u32 dim | u32 n_docs | u32 meta_len | meta (UTF-8 JSON)
///   per doc: u32 id_len | id bytes | u32 n_lines | n_lines * dim f32
/// The metadata object carries at least {"encoder": name}.
inline constexpr std::uint32_t kEmbeddingFileVersion = 1;

struct EmbeddingFile {
  std::uint32_t dim = 0;
  std::string encoder;
  std::vector<EmbeddingMatrix> docs;

  /// Lookup by doc_id; throws ParseError on duplicate ids.
  std::map<std::string, const EmbeddingMatrix*> index() const;
};

std::string serialize_embeddings(const EmbeddingFile& file);
EmbeddingFile parse_embeddings(std::string_view bytes);
void write_embeddings(const std::filesystem::path& path, const EmbeddingFile& file);
EmbeddingFile read_embeddings(const std::filesystem::path& path);

/// Deterministic stand-in for a sentence encoder: signed feature hashing of
/// lowercased tokens plus coarse shape tokens (leading "item" token, casing,
/// length bucket), L2-normalized. Identical text gives identical vectors.
std::vector<float> pseudo_embedding(std::string_view text, std::size_t dim);

EmbeddingMatrix embed_document(const std::string& doc_id, std::span<const TextLine> lines, std::size_t dim);

}  // namespace itemseg
