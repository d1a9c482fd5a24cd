#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace convext {

// Violated input contract (bad shapes, exponents out of range, infeasible
// configurations). CLI maps these to exit code 1.
struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Runtime numeric failure (divergence, overflow, no admissible value found).
// CLI maps these to exit code 2.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by the kernel positivity scan when no power up to n_max clears the
// ball; carries the per-power minima so callers can report the profile.
struct positivity_radius_error : numeric_error {
  std::vector<double> min_per_power;
  positivity_radius_error(const std::string& msg, std::vector<double> mins)
      : numeric_error(msg), min_per_power(std::move(mins)) {}
};

}  // namespace convext
