#pragma once

#include <stdexcept>
#include <string>

namespace qct {

/// Malformed or inconsistent input data (count files, probability vectors, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: solver divergence, eigensolver non-convergence,
/// infeasible target residuals, degenerate truncations.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qct
