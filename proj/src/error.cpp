#include "mimic/error.hpp"

namespace mimic {

std::string to_string(const Violation& v) {
  std::string s = v.invariant;
  if (!v.element.empty()) s += " at " + v.element;
  if (!v.message.empty()) s += ": " + v.message;
  return s;
}

namespace {

std::string summarize(const ValidationReport& report) {
  std::string s = "validation failed";
  for (const auto& v : report) s += "\n  " + to_string(v);
  return s;
}

}  // namespace

ValidationError::ValidationError(ValidationReport report) : Error(summarize(report)), report_(std::move(report)) {}

InputRejected::InputRejected(std::string symbol, std::size_t position, std::optional<std::size_t> cell)
    : Error("input symbol '" + symbol + "' at position " + std::to_string(position) +
            (cell ? " of cell " + std::to_string(*cell) : std::string()) + " is outside the alphabet"),
      symbol_(std::move(symbol)),
      position_(position),
      cell_(cell) {}

ExplosionError::ExplosionError(std::size_t states, std::size_t frontier)
    : Error("state bound exceeded after " + std::to_string(states) + " states (frontier " + std::to_string(frontier) +
            ")"),
      states_(states),
      frontier_(frontier) {}

ConvergenceError::ConvergenceError(std::size_t iterations, double residual)
    : Error("value iteration did not converge in " + std::to_string(iterations) +
            " iterations (last residual " + std::to_string(residual) + ")"),
      residual_(residual) {}

}  // namespace mimic
