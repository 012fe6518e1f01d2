#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace robust_unmix {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data or parameters violate a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NegativeEntry : public ValidationError {
 public:
  NegativeEntry(Eigen::Index row, Eigen::Index col)
      : ValidationError("negative entry at (" + std::to_string(row) + ", " + std::to_string(col) + ")"),
        row_(row),
        col_(col) {}
  Eigen::Index row() const { return row_; }
  Eigen::Index col() const { return col_; }

 private:
  Eigen::Index row_;
  Eigen::Index col_;
};

class NonFinite : public ValidationError {
 public:
  NonFinite(Eigen::Index row, Eigen::Index col)
      : ValidationError("non-finite entry at (" + std::to_string(row) + ", " + std::to_string(col) + ")"),
        row_(row),
        col_(col) {}
  Eigen::Index row() const { return row_; }
  Eigen::Index col() const { return col_; }

 private:
  Eigen::Index row_;
  Eigen::Index col_;
};

class BadRank : public ValidationError {
 public:
  BadRank(Eigen::Index k, Eigen::Index limit)
      : ValidationError("rank K=" + std::to_string(k) + " outside [1, " + std::to_string(limit) + "]"), k_(k) {}
  Eigen::Index rank() const { return k_; }

 private:
  Eigen::Index k_;
};

class ShapeMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonPositiveSigma : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class WeightOutOfRange : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Every band of the data has zero norm.
class DegenerateBand : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ZeroNormSpectrum : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A solver produced a non-finite iterate.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& what, std::size_t line) : IoError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedFormat : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace robust_unmix
