#pragma once

// Synthetic multi-bubble inputs for the decomposition tests.
//
// The sixteen-bubble input is engineered backwards from the residual
// thresholds we want the greedy sweep to see.  Pick a decreasing target
// sequence t_0 > t_1 > ... > t_15 > 0, place sixteen copies of one narrow
// profile far enough apart that their images under T have disjoint
// supports, and set the j-th amplitude so that ||T b_j||_q^q equals
// t_{j-1}^q - t_j^q.  The sums then telescope: after k extractions the
// residual satisfies ||T r_k||_q = t_k exactly, so the bubble count at
// level eps is the number of thresholds above eps.  One free knob remains,
// the profile width, which we bisect until the profile's Rayleigh ratio
// ||T P||_q / ||P||_p matches the value that makes the assembled input
// come out with unit p-norm.

#include <cmath>
#include <vector>

#include "convext/conv_operator.hpp"
#include "convext/grid.hpp"
#include "convext/measure.hpp"
#include "convext/riesz.hpp"

namespace bubble_fixtures {

inline convext::Grid lab_grid() { return convext::Grid::windowed(1, 2368, 148.0); }

inline convext::MeasureSpec lab_measure() {
  return convext::MeasureSpec::mollified_two_point(0.25, 1e-4);
}

inline convext::riesz::ExponentPair lab_pair() { return {1.2, 12.0}; }

inline std::vector<int> lab_centers() {
  std::vector<int> c;
  for (int k = 0; k < 16; ++k) c.push_back(-70 + 9 * k);
  return c;
}

// Residual thresholds the sweep should realize: one bubble above 0.4, two
// above 0.2, five above 0.1, and a geometric tail keeping all sixteen
// above 0.05.
inline std::vector<double> lab_thresholds() {
  std::vector<double> t = {0.5, 0.3, 0.18, 0.15, 0.12};
  const double ratio = std::pow(0.052 / 0.098, 0.1);
  double v = 0.098;
  for (int i = 0; i < 11; ++i) {
    t.push_back(v);
    v *= ratio;
  }
  return t;
}

// Truncated Gaussian of the given width on a small quadratic pedestal,
// amplitude about one, centered at the window origin.  Support stays
// inside the extraction ball of radius 2.  The pedestal keeps the tail
// values large enough that a ball one lattice step off center loses a
// measurable share of the mass; without it the greedy scan can tie.
inline convext::GridFunction lab_profile(const convext::Grid& g, double width) {
  return convext::GridFunction::sample(g, [width](std::span<const double> x) {
    if (std::abs(x[0]) > 1.9) return 0.0;
    const double u = x[0] / 1.9;
    return std::exp(-x[0] * x[0] / (2.0 * width * width)) + 1e-3 * (1.0 - u * u);
  });
}

inline double rayleigh_ratio(const convext::ConvOperator& op,
                             const convext::riesz::ExponentPair& pair,
                             const convext::GridFunction& f) {
  return convext::lp_norm(op.apply(f), pair.q) / convext::lp_norm(f, pair.p);
}

// Builds the unit-norm sixteen-bubble input on the operator's grid.
inline convext::GridFunction sixteen_bubble_input(const convext::ConvOperator& op) {
  const convext::Grid g = op.grid();
  const convext::riesz::ExponentPair pair = lab_pair();
  std::vector<double> t = lab_thresholds();
  t.push_back(0.0);

  std::vector<double> target(16);  // ||T b_j||_q for the assembled input
  double sum_p = 0.0;
  for (int j = 0; j < 16; ++j) {
    target[j] = std::pow(std::pow(t[j], pair.q) - std::pow(t[j + 1], pair.q),
                         1.0 / pair.q);
    sum_p += std::pow(target[j], pair.p);
  }
  const double wanted_ratio = std::pow(sum_p, 1.0 / pair.p);

  // Narrow profiles concentrate T-mass relative to p-mass, wide ones
  // spread it, so the ratio crosses every intermediate value once.
  double lo = 0.01, hi = 1.5;
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (rayleigh_ratio(op, pair, lab_profile(g, mid)) > wanted_ratio)
      lo = mid;
    else
      hi = mid;
  }
  const double width = std::sqrt(lo * hi);
  const convext::GridFunction profile = lab_profile(g, width);
  const double nu_t = convext::lp_norm(op.apply(profile), pair.q);

  convext::GridFunction f(g);
  const double h = g.spacing();
  const std::vector<int> centers = lab_centers();
  for (int j = 0; j < 16; ++j) {
    const double amp = target[j] / nu_t;
    const int off = static_cast<int>(std::lround(centers[j] / h));
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (profile[i] != 0.0) {
        const int dst = static_cast<int>(i) + off;
        f[static_cast<std::size_t>(dst)] = amp * profile[i];
      }
    }
  }
  const double nf = convext::lp_norm(f, pair.p);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = f[i] / nf;
  return f;
}

// Slope of ln(count) against ln(1/eps) by least squares.
inline double count_fit_slope(const std::vector<double>& eps,
                              const std::vector<int>& counts) {
  const std::size_t m = eps.size();
  double sx = 0.0, sy = 0.0;
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = std::log(1.0 / eps[i]);
    y[i] = std::log(static_cast<double>(counts[i]));
    sx += x[i];
    sy += y[i];
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    num += (x[i] - sx / m) * (y[i] - sy / m);
    den += (x[i] - sx / m) * (x[i] - sx / m);
  }
  return num / den;
}

}  // namespace bubble_fixtures
