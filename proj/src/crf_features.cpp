#include "itemseg/crf_features.hpp"

#include <algorithm>
#include <cctype>

#include "itemseg/util.hpp"

namespace itemseg {

std::vector<std::string> feature_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  for (auto word : split_words(text)) {
    std::size_t b = 0, e = word.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
    if (e > b) tokens.push_back(to_lower(word.substr(b, e - b)));
  }
  return tokens;
}

LineFeatures extract_features(std::span<const TextLine> lines, std::size_t position) {
  LineFeatures f;
  const std::string& text = lines[position].text;

  auto tokens = feature_tokens(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    f["uni:" + tokens[i]] = 1.0;
    if (i + 1 < tokens.size()) f["bi:" + tokens[i] + "|" + tokens[i + 1]] = 1.0;
  }

  std::string_view t = trim(text);
  f["syn:first_upper"] = !t.empty() && std::isupper(static_cast<unsigned char>(t.front())) ? 1.0 : 0.0;
  std::size_t letters = 0, upper = 0;
  for (unsigned char c : text) {
    if (std::isalpha(c)) {
      ++letters;
      if (std::isupper(c)) ++upper;
    }
  }
  f["syn:upper_pct"] = letters ? static_cast<double>(upper) / static_cast<double>(letters) : 0.0;

  f["str:word_len"] = std::min(kMaxWordLenFeature, static_cast<double>(split_words(text).size()));
  double n = static_cast<double>(lines.size());
  double fwd = static_cast<double>(position) / std::max(1.0, n - 1.0);
  f["str:fwd_pos"] = fwd;
  f["str:bwd_pos"] = 1.0 - fwd;
  return f;
}

std::vector<LineFeatures> extract_all_features(std::span<const TextLine> lines) {
  std::vector<LineFeatures> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) out.push_back(extract_features(lines, i));
  return out;
}

}  // namespace itemseg
