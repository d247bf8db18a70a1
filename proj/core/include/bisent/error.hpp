#pragma once

#include <stdexcept>
#include <string>

namespace bisent {

// Bad or missing input data: unreadable files, malformed records, empty
// corpora, undefined aggregates. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values during training or evaluation. Exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bisent
