#pragma once

#include <stdexcept>
#include <string>

namespace undulate {

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Inconsistent sizes, invalid discretization, bad config values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Time step at or above the explicit stability bound.
struct StabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN/Inf in forces or state. Carries the simulated time of failure.
struct NumericalError : std::runtime_error {
  NumericalError(const std::string& what, double sim_time)
      : std::runtime_error(what + " (t=" + std::to_string(sim_time) + " s)"),
        time(sim_time) {}
  double time;
};

// Dynamic relaxation ran past its time budget.
struct SettleTimeout : std::runtime_error {
  SettleTimeout(const std::string& what, double sim_time)
      : std::runtime_error(what + " (t=" + std::to_string(sim_time) + " s)"),
        time(sim_time) {}
  double time;
};

// Signal analysis preconditions (too short, zero variance).
struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace undulate
