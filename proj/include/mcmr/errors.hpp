#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mcmr {

/// Base of every exception thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range physical or numerical parameter.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Population or density state violating normalization.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Operator dimensions do not match the 4-level space.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A quantity expected to be real carries an imaginary residue.
class RepresentationError : public Error {
 public:
  using Error::Error;
};

/// A channel does not have the restricted leakage structure required by the twirl.
class AssumptionError : public Error {
 public:
  AssumptionError(const std::string& what, double worst_magnitude)
      : Error(what), worst_magnitude_(worst_magnitude) {}
  double worst_magnitude() const { return worst_magnitude_; }

 private:
  double worst_magnitude_;
};

/// Nonlinear fit failed to converge or left its admissible region.
class FitError : public Error {
 public:
  FitError(const std::string& what, std::vector<double> residuals)
      : Error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Too many bootstrap refits failed.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment, campaign or channel configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data file. `line()` is 1-based, 0 when unknown.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line) : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mcmr
