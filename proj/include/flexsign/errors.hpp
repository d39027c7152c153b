#pragma once

#include <stdexcept>
#include <string>

namespace flexsign {

// I/O failures: missing files, unwritable paths, refused connections.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data validation and parse failures: bad CSV rows, out-of-range values,
// degenerate configurations.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model file problems and dimension mismatches between a model and its input.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flexsign
