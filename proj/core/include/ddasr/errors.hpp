#pragma once

#include <stdexcept>
#include <string>

namespace ddasr {

/// Array dimensions violate a layout contract (non-square grid, size not
/// divisible by the angular size, mismatched operands).
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An index argument lies outside the addressed array.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Malformed on-disk data: bad metadata, unknown keys, unsupported version.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Archive contents fail their checksum or are truncated.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training diverged (non-finite loss).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ddasr
