#pragma once

#include <stdexcept>
#include <string>

namespace choquard {

/// Precondition violation on user-supplied data (bad N, alpha, exponents, sizes).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The operation is undefined for this input, e.g. projecting a field with c = 0.
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure produced non-finite values or failed to bracket a root.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system or parse failure at the I/O boundary.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace choquard
