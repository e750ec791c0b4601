#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cnnt {

// Malformed network document. layer_index is npos for document-level errors.
class ParseError : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  ParseError(std::size_t layer_index, const std::string& what)
      : std::runtime_error(layer_index == npos ? what
                                               : "layer " + std::to_string(layer_index) + ": " + what),
        layer_index_(layer_index) {}

  std::size_t layer_index() const noexcept { return layer_index_; }

 private:
  std::size_t layer_index_;
};

// Weight container could not be read; offset is the byte position of the fault.
class LoadError : public std::runtime_error {
 public:
  LoadError(std::size_t offset, const std::string& what)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A tile configuration is invalid, or inconsistent with buffers or a hardware budget.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cnnt
