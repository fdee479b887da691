#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ggb {

/// Bad input: precondition violated, malformed config, mismatched grids.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation exists in the contract but not for this model kind.
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Base for all failures caused by near-singular linear algebra.
class NumericalDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky breakdown. `minor()` is the 1-based leading minor that failed.
class FactorizationFailure : public NumericalDegeneracy {
 public:
  FactorizationFailure(const std::string& what, std::size_t minor)
      : NumericalDegeneracy(what), minor_(minor) {}
  std::size_t minor() const noexcept { return minor_; }

 private:
  std::size_t minor_;
};

/// The conditioning functionals are linearly dependent (singular Gram at 0).
class LinearDependence : public NumericalDegeneracy {
 public:
  using NumericalDegeneracy::NumericalDegeneracy;
};

/// A Gram matrix or pivot needed by a bridge construction is degenerate.
class DegenerateConditioning : public NumericalDegeneracy {
 public:
  using NumericalDegeneracy::NumericalDegeneracy;
};

}  // namespace ggb
