#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "itemseg/document.hpp"
#include "itemseg/embeddings.hpp"

namespace itemseg {

/// Annotated-corpus averages per item, in canonical order: prevalence and the
/// mean number of lines per report (over all reports, absent items counting 0).
struct ItemProfile {
  double prevalence = 0.0;
  double lines_per_report = 0.0;
};
const std::array<ItemProfile, kItemCount>& annotated_corpus_profile();

struct SynthSpec {
  std::uint64_t seed = 42;
  std::size_t n_docs = 200;
  std::size_t first_index = 0;  // doc ids continue from here, so splits can share a seed
  std::array<double, kItemCount> inclusion{};
  /// Mean line count of an included item, heading included (at least 2).
  std::array<double, kItemCount> mean_item_lines{};
  double toc_probability = 0.8;
  /// Chance that a body line is replaced by page furniture (still labeled I).
  double noise_rate = 0.03;

  /// Inclusion from the annotated-corpus prevalence; item lengths are the
  /// per-report line means scaled by `length_scale` and conditioned on inclusion.
  static SynthSpec from_profile(double length_scale = 0.1);

  /// Throws std::invalid_argument when a probability is outside [0, 1] or a
  /// mean length is below 2.
  void validate() const;
};

/// Deterministic in spec; documents are independent given their index.
std::vector<AnnotatedDocument> generate_corpus(const SynthSpec& spec);
AnnotatedDocument generate_document(const SynthSpec& spec, std::size_t index);

/// Pseudo-embeddings of every document's lines.
EmbeddingFile embed_corpus(std::span<const AnnotatedDocument> docs, std::size_t dim);

}  // namespace itemseg
