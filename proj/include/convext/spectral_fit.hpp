#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "convext/grid.hpp"
#include "convext/transform.hpp"

namespace convext {

// Dyadic-shell statistics of a frequency-side function and the log-log slope
// fit both decay estimators share (measure multipliers and iterate spectra).

struct ShellRow {
  int k = 0;           // shell [2^k, 2^{k+1}) in |xi| over the integer lattice
  double max_abs = 0;  // max |F(xi)| over the shell
  std::size_t count = 0;
};

struct DecayFit {
  double exponent = 0.0;    // alpha-hat; +inf sentinel for super-polynomial
  double fit_quality = 0.0; // R^2 of the log-log fit (1.0 for the sentinel)
  bool super_polynomial = false;
  int shells_used = 0;
};

inline std::vector<ShellRow> dyadic_shells(const GridFunction& freq_side) {
  const Grid& g = freq_side.grid();
  // |xi|^2 <= d * (n/2)^2, so 2^k never needs to exceed sqrt(d) * n/2
  const double max_r = std::sqrt(static_cast<double>(g.dim())) * g.n() / 2.0;
  int kmax = 0;
  while (std::pow(2.0, kmax + 1) <= max_r) ++kmax;
  std::vector<ShellRow> shells(static_cast<std::size_t>(kmax) + 1);
  for (int k = 0; k <= kmax; ++k) shells[k].k = k;
  for (std::size_t i = 0; i < freq_side.size(); ++i) {
    const double r2 = freq_index_norm2(g, i);
    if (r2 < 1.0) continue;  // xi = 0 carries no decay information
    const int k = static_cast<int>(std::floor(std::log2(std::sqrt(r2)) + 1e-12));
    if (k < 0 || k > kmax) continue;
    auto& row = shells[k];
    row.count += 1;
    row.max_abs = std::max(row.max_abs, std::abs(freq_side[i]));
  }
  while (!shells.empty() && shells.back().count == 0) shells.pop_back();
  return shells;
}

// Least-squares slope of log(shell max) against log(2^k), restricted to
// shells above the noise floor. If decay beats the floor before the lattice
// edge (the top nonempty shell is unusable) the data only bounds the exponent
// from below, reported as the +inf sentinel. A fit that reaches the edge with
// fewer than 3 usable shells means the grid cannot resolve a slope at all.
inline DecayFit fit_decay(const std::vector<ShellRow>& shells, double floor_) {
  std::vector<const ShellRow*> nonempty;
  for (const auto& s : shells)
    if (s.count > 0) nonempty.push_back(&s);
  if (nonempty.empty())
    throw precondition_error("decay fit: no nonempty dyadic shells");

  std::vector<const ShellRow*> usable;
  for (const auto* s : nonempty)
    if (s->max_abs >= floor_) usable.push_back(s);

  DecayFit fit;
  if (usable.empty() || usable.back() != nonempty.back()) {
    fit.exponent = std::numeric_limits<double>::infinity();
    fit.fit_quality = 1.0;
    fit.super_polynomial = true;
    fit.shells_used = static_cast<int>(usable.size());
    return fit;
  }
  if (usable.size() < 3)
    throw precondition_error(
        "decay fit: fewer than 3 usable shells (insufficient resolution)");

  const double ln2 = std::log(2.0);
  double sx = 0, sy = 0;
  for (const auto* s : usable) {
    sx += s->k * ln2;
    sy += std::log(s->max_abs);
  }
  const double n = static_cast<double>(usable.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto* s : usable) {
    const double dx = s->k * ln2 - mx;
    const double dy = std::log(s->max_abs) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  fit.exponent = -slope;
  fit.shells_used = static_cast<int>(usable.size());
  if (syy <= 1e-30) {
    fit.fit_quality = 1.0;  // exactly flat data
  } else {
    const double ss_res = syy - slope * sxy;
    fit.fit_quality = 1.0 - std::max(0.0, ss_res) / syy;
  }
  return fit;
}

}  // namespace convext
