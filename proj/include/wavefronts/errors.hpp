#pragma once

#include <stdexcept>
#include <string>

namespace wavefront {

/// Malformed or contradictory input (bad files, bad parameter combinations).
struct InvalidInputError : std::runtime_error {
  explicit InvalidInputError(const std::string& what) : std::runtime_error(what) {}
};

/// A request that is well-formed but cannot be satisfied (e.g. a profile at a
/// speed outside the admissible interval).
struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// A numeric routine failed to meet its contract (quadrature divergence,
/// step-size underflow, bracket or tolerance faults).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wavefront
