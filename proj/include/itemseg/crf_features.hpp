#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "itemseg/document.hpp"

namespace itemseg {

/// Sparse feature vector of one line. Names are namespaced:
///   uni:<token>          lowercased unigram (binary)
///   bi:<token>|<token>   adjacent-token bigram (binary)
///   syn:first_upper      first non-space character is uppercase
///   syn:upper_pct        uppercase letters / letters (0 without letters)
///   str:word_len         word count, capped at kMaxWordLenFeature
///   str:fwd_pos          position / max(1, n - 1)
///   str:bwd_pos          1 - fwd_pos
using LineFeatures = std::map<std::string, double>;

inline constexpr double kMaxWordLenFeature = 200.0;

/// Lowercase, split on whitespace, strip leading/trailing punctuation; empty
/// tokens are dropped.
std::vector<std::string> feature_tokens(std::string_view text);

LineFeatures extract_features(std::span<const TextLine> lines, std::size_t position);

std::vector<LineFeatures> extract_all_features(std::span<const TextLine> lines);

}  // namespace itemseg
