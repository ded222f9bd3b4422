#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace itemseg {

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it into place, so
/// readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Maximal runs of non-whitespace.
std::vector<std::string_view> split_words(std::string_view text);

std::string to_lower(std::string_view text);
std::string_view trim(std::string_view text);
std::string_view rtrim(std::string_view text);

std::uint64_t fnv1a64(std::string_view text);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Formats a double with 17 significant digits (exact round trip).
std::string format_double(double value);

/// Little-endian binary encoding helpers for the model and embedding files.
void put_u32_le(std::string& out, std::uint32_t v);
void put_u64_le(std::string& out, std::uint64_t v);
void put_f32_le(std::string& out, float v);
void put_f64_le(std::string& out, double v);

/// Cursor over a byte buffer; every read throws ParseError naming `what`
/// when the buffer is exhausted.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}
  std::uint32_t u32(const char* what);
  std::uint64_t u64(const char* what);
  float f32(const char* what);
  double f64(const char* what);
  std::string_view take(std::size_t n, const char* what);
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) const;
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace itemseg
