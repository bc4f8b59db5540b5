#pragma once

#include <stdexcept>
#include <string>

namespace gdim {

/// Malformed input files or model documents.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that are well-formed but numerically unusable (empty graph, zero
/// variance, infeasible Bernoulli rates).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The iterative eigensolver ran out of iterations. `fold` is -1 when the
/// failure did not happen inside a cross-validation fold.
class ConvergenceError : public NumericError {
 public:
  explicit ConvergenceError(const std::string& what, int fold = -1)
      : NumericError(what), fold_(fold) {}
  int fold() const noexcept { return fold_; }

 private:
  int fold_;
};

}  // namespace gdim
