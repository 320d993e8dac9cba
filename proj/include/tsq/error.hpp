#pragma once

#include <stdexcept>
#include <string>

namespace tsq {

// Single exception type for the whole library. The kind survives the trip
// through the C API, where it becomes the status code.
class Error : public std::runtime_error {
public:
  enum class Kind {
    invalid_argument,
    decode,  // malformed UTF-8 or malformed tag strings
    parse,   // bad input file contents
    io,      // filesystem trouble
    config,  // unknown keys, out-of-range values
    shape,   // dimension mismatches
    train,   // degenerate training input
  };

  Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

  Kind kind() const { return kind_; }

  static Error invalid(const std::string& m) { return {Kind::invalid_argument, m}; }
  static Error decode(const std::string& m) { return {Kind::decode, m}; }
  static Error parse(const std::string& m) { return {Kind::parse, m}; }
  static Error io(const std::string& m) { return {Kind::io, m}; }
  static Error config(const std::string& m) { return {Kind::config, m}; }
  static Error shape(const std::string& m) { return {Kind::shape, m}; }
  static Error train(const std::string& m) { return {Kind::train, m}; }

private:
  Kind kind_;
};

}  // namespace tsq
