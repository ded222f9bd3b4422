#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace itemseg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Malformed SGML submission; `offset` is the byte offset of the offending block.
class SgmlError : public Error {
 public:
  SgmlError(const std::string& what, std::size_t offset)
      : Error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Network-level failure. status is the HTTP status, or 0 when no response arrived.
class FetchError : public Error {
 public:
  FetchError(const std::string& what, int status, bool retriable)
      : Error(what), status_(status), retriable_(retriable) {}
  int status() const { return status_; }
  bool retriable() const { return retriable_; }

 private:
  int status_;
  bool retriable_;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace itemseg
