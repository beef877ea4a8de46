#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace fsq {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message) : Error("invalid-argument", message) {}
};

class GridMismatch : public Error {
 public:
  explicit GridMismatch(const std::string& message = "curves are defined on different grids")
      : Error("grid-mismatch", message) {}
};

class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& message) : Error("rank-deficiency", message) {}
};

class NumericalPsd : public Error {
 public:
  explicit NumericalPsd(const std::string& message) : Error("numerical-psd", message) {}
};

class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& message, double condition)
      : Error("conditioning", message), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Raised when the gradient is requested at a point coincident with a datum.
class CoincidentDatum : public Error {
 public:
  explicit CoincidentDatum(Eigen::Index index)
      : Error("coincident-datum", "point coincides with datum " + std::to_string(index)), index_(index) {}

  Eigen::Index index() const noexcept { return index_; }

 private:
  Eigen::Index index_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, Eigen::VectorXd last_iterate, double grad_norm)
      : Error("non-convergence", message), last_iterate_(std::move(last_iterate)), grad_norm_(grad_norm) {}

  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
  double grad_norm() const noexcept { return grad_norm_; }

 private:
  Eigen::VectorXd last_iterate_;
  double grad_norm_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("parse", "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fsq
