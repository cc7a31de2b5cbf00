#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mimic {

/// One broken invariant found by a `validate` overload.
struct Violation {
  std::string invariant;  // short tag, e.g. "totality", "normalization"
  std::string element;    // offending element, e.g. "(odd, 0)"
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

std::string to_string(const Violation& v);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// An input symbol that is not in the alphabet of the unit consuming it.
class InputRejected : public Error {
 public:
  InputRejected(std::string symbol, std::size_t position, std::optional<std::size_t> cell = std::nullopt);
  const std::string& symbol() const noexcept { return symbol_; }
  std::size_t position() const noexcept { return position_; }
  std::optional<std::size_t> cell() const noexcept { return cell_; }

 private:
  std::string symbol_;
  std::size_t position_;
  std::optional<std::size_t> cell_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// No transition is enabled (partial automata only).
class StuckError : public Error {
 public:
  using Error::Error;
};

/// An explicit expansion would exceed its configured cap.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

class NestingError : public Error {
 public:
  using Error::Error;
};

class ReadoutError : public Error {
 public:
  using Error::Error;
};

/// State-space construction hit its bound.
class ExplosionError : public Error {
 public:
  ExplosionError(std::size_t states, std::size_t frontier);
  std::size_t states() const noexcept { return states_; }
  std::size_t frontier() const noexcept { return frontier_; }

 private:
  std::size_t states_;
  std::size_t frontier_;
};

class PropertyError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(std::size_t iterations, double residual);
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Caller misuse that is not a model defect (wrong schedule kind, missing random stream, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace mimic
