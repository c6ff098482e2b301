#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace qfrac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Inconsistent matrix/vector dimensions in problem data.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Objective evaluation at a point where the denominator vanishes.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Malformed instance document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Rank-one factorization could not be produced.
class DecompositionError : public Error {
 public:
  using Error::Error;
};

/// 2^M sign patterns exceed the enumeration budget.
class RegionOverflowError : public Error {
 public:
  using Error::Error;
};

/// Feasible set admits an unbounded improving ray.
class UnboundedError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace qfrac
