// Exception types shared across the slicevec library.

#ifndef SLICEVEC_ERROR_H_
#define SLICEVEC_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slicevec {

/// Malformed or unsupported input data (MIDI bytes, cache files, CSV).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// MIDI parse failure at a known byte offset.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : DataError(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// A metric that is undefined for its arguments, e.g. cosine of a zero vector.
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Training produced a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or usage.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace slicevec

#endif  // SLICEVEC_ERROR_H_
