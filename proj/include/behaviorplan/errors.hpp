#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace behaviorplan {

/// Base class for every domain failure raised by the library. The CLI maps
/// these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed JSON or malformed file contents.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (at byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed input that violates a structural invariant.
/// Zero-based offset of the offending byte from a JSON parser's count of
/// bytes read.
inline std::size_t json_error_offset(std::size_t bytes_read) {
  return bytes_read > 0 ? bytes_read - 1 : 0;
}

class StructuralError : public Error {
 public:
  StructuralError(const std::string& what, long index = -1)
      : Error(what), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace behaviorplan
