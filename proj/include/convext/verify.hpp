#pragma once

// Structural checks on computed extremizers: phase rigidity, positivity,
// the convexity inequality T(f^a) >= (Tf)^a, the fixed-point lower bound,
// the integrability ladder, and spectral smoothness evidence.  Every check
// returns measured numbers; deciding what counts as a pass is left to the
// caller (tests pin tolerances, reports just record).

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "convext/conv_operator.hpp"
#include "convext/errors.hpp"
#include "convext/extremizer.hpp"
#include "convext/grid.hpp"
#include "convext/riesz.hpp"
#include "convext/spectral_fit.hpp"
#include "convext/transform.hpp"

namespace convext {

struct SectorProfile {
  std::complex<double> omega0{1.0, 0.0};
  std::vector<double> sector_masses;  // fraction of ||f||_p^p per arg sector
  int dominant = 0;
  double triangle_gap = 0.0;          // || T|f| - |Tf| ||_q, zero iff constant phase
};

namespace detail {

// Sector index of one value.  Bins are half-open arcs of width 2pi/n whose
// bin 0 is centered on the anchor phase, so rotating the data and the
// anchor together leaves every index unchanged.
inline int sector_of(std::complex<double> v, double anchor, int n_sectors) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double bin = two_pi / n_sectors;
  double a = std::arg(v) - anchor + 0.5 * bin;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  const int j = static_cast<int>(a / bin);
  return j >= n_sectors ? n_sectors - 1 : j;
}

}  // namespace detail

// Splits the p-mass of f by argument into n half-open sectors of width
// 2pi/n anchored at the global circular mean phase, and reads off the
// aligned phase omega0 as the p-weighted circular mean over the dominant
// sector.  Anchoring makes the masses invariant under a global phase
// rotation and parks concentrated data at the center of bin 0, away from
// the bin boundaries.  A near-extremizer should put essentially all mass
// in one sector; triangle_gap measures the defect in the equality
// |Tf| = T|f| that forces this.
inline SectorProfile constant_argument_check(const ConvOperator& op,
                                             const riesz::ExponentPair& pair,
                                             const GridFunction& f,
                                             int n_sectors) {
  if (n_sectors < 2)
    throw precondition_error("constant_argument_check: need at least 2 sectors");
  if (f.grid() != op.grid())
    throw precondition_error("constant_argument_check: function grid does not match operator grid");
  if (max_abs(f) == 0.0)
    throw precondition_error("constant_argument_check: input is identically zero");

  const double p = pair.p;
  std::complex<double> anchor_sum{0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = std::abs(f[i]);
    if (r > 0.0) anchor_sum += std::pow(r, p) * (f[i] / r);
  }
  const double anchor = std::abs(anchor_sum) > 0.0 ? std::arg(anchor_sum) : 0.0;

  std::vector<double> mass(static_cast<std::size_t>(n_sectors), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = std::abs(f[i]);
    if (r == 0.0) continue;
    const int j = detail::sector_of(f[i], anchor, n_sectors);
    mass[static_cast<std::size_t>(j)] += std::pow(r, p);
  }
  double total = 0.0;
  for (double m : mass) total += m;

  SectorProfile prof;
  prof.sector_masses.resize(mass.size());
  for (std::size_t j = 0; j < mass.size(); ++j) {
    prof.sector_masses[j] = mass[j] / total;
    if (mass[j] > mass[static_cast<std::size_t>(prof.dominant)])
      prof.dominant = static_cast<int>(j);
  }

  std::complex<double> mean{0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = std::abs(f[i]);
    if (r == 0.0) continue;
    if (detail::sector_of(f[i], anchor, n_sectors) == prof.dominant)
      mean += std::pow(r, p) * (f[i] / r);
  }
  prof.omega0 = mean / std::abs(mean);

  const GridFunction t_abs = op.apply(abs(f));
  const GridFunction abs_t = abs(op.apply(f));
  prof.triangle_gap = lp_norm(t_abs - abs_t, pair.q);
  return prof;
}

// Minimum of Re f over the closed ball; callers align the phase first.
// Negative margins are data, not errors: they witness that the discrete
// positivity statement fails for this input.
inline double positivity_margin(const GridFunction& f,
                                const std::vector<double>& center,
                                double radius) {
  const std::vector<char> mask = ball_mask(f.grid(), center, radius);
  double margin = std::numeric_limits<double>::infinity();
  bool seen = false;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mask[i] == 0) continue;
    seen = true;
    margin = std::min(margin, f[i].real());
  }
  if (!seen)
    throw precondition_error("positivity_margin: window contains no grid points");
  return margin;
}

// Max over the grid of (Tf)^a - T(f^a).  Convexity of t^a and T 1 = 1 make
// this nonpositive up to discretization for probability kernels.
inline double jensen_check(const ConvOperator& op, const GridFunction& f,
                           double a) {
  if (!(a > 1.0) || !std::isfinite(a))
    throw precondition_error("jensen_check: exponent must be finite and exceed 1");
  if (f.grid() != op.grid())
    throw precondition_error("jensen_check: function grid does not match operator grid");
  detail::require_nonneg(f, "jensen_check");

  const GridFunction tf = op.apply(f);
  const GridFunction tfa = op.apply(pow_nonneg(f, a));
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double lhs = std::pow(std::max(tf[i].real(), 0.0), a);
    worst = std::max(worst, lhs - tfa[i].real());
  }
  return worst;
}

// Fixed-point lower bound: ratio = min over the window of
// f / ((T*T)^N f)^{((q-1)/(p-1))^N}, floored away from division by zero.
// For a true extremizer the Euler-Lagrange relation makes the denominator
// a power of f itself, so the ratio stays bounded below.
inline double lower_bound_check(const ConvOperator& op,
                                const riesz::ExponentPair& pair,
                                const GridFunction& f, int n_steps,
                                const std::vector<double>& center,
                                double radius) {
  if (n_steps < 1)
    throw precondition_error("lower_bound_check: need at least one T*T application");
  if (f.grid() != op.grid())
    throw precondition_error("lower_bound_check: function grid does not match operator grid");
  detail::require_nonneg(f, "lower_bound_check");

  GridFunction u = f;
  for (int k = 0; k < n_steps; ++k) u = op.apply_adjoint(op.apply(u));
  const double e = std::pow((pair.q - 1.0) / (pair.p - 1.0), n_steps);
  const GridFunction g = pow_nonneg(u, e);

  const std::vector<char> mask = ball_mask(f.grid(), center, radius);
  double gmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (mask[i] != 0) gmax = std::max(gmax, g[i].real());
  if (gmax == 0.0) return std::numeric_limits<double>::infinity();

  constexpr double floor_ = 1e-300;
  double ratio = std::numeric_limits<double>::infinity();
  bool seen = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (mask[i] == 0) continue;
    seen = true;
    const double num = std::max(f[i].real(), 0.0);
    ratio = std::min(ratio, num / std::max(g[i].real(), floor_));
  }
  if (!seen)
    throw precondition_error("lower_bound_check: window contains no grid points");
  return ratio;
}

struct LadderResult {
  std::vector<std::pair<double, double>> rungs;  // (s, ||f||_s) along the bootstrap ladder
  double linf = 0.0;
  bool bounded = false;   // every rung at most (1 + 1e-6) ||f||_inf
  bool monotone = false;  // rungs nondecreasing in s
  bool passed = false;
};

// Walks the bootstrap exponent ladder and records ||f||_s per rung.  On a
// unit-measure torus the rungs must climb toward ||f||_inf; staying bounded
// by it witnesses that the ladder argument closes.
inline LadderResult integrability_ladder(const ConvOperator& op,
                                         const riesz::ExponentPair& pair,
                                         const riesz::Region& region,
                                         const GridFunction& f) {
  if (f.grid() != op.grid())
    throw precondition_error("integrability_ladder: function grid does not match operator grid");
  const std::vector<double> ladder =
      riesz::q_exponent_sequence(region, pair, 1.0 / 256.0, 64);

  LadderResult res;
  res.linf = max_abs(f);
  for (double s : ladder) res.rungs.emplace_back(s, lp_norm(f, s));

  res.bounded = true;
  res.monotone = true;
  const double slack = 1e-12 * (1.0 + res.linf);
  for (std::size_t k = 0; k < res.rungs.size(); ++k) {
    if (res.rungs[k].second > (1.0 + 1e-6) * res.linf) res.bounded = false;
    if (k > 0 && res.rungs[k].second < res.rungs[k - 1].second - slack)
      res.monotone = false;
  }
  res.passed = res.bounded && res.monotone;
  return res;
}

struct SmoothnessProfile {
  DecayFit fit;
  std::vector<ShellRow> shells;
  double noise_floor = 0.0;
};

// Dyadic-shell decay of the spectrum.  Extremizers of smooth-multiplier
// operators should beat the decay of a generic initial iterate by at least
// the operator's smoothing exponent.
inline SmoothnessProfile smoothness_profile(const GridFunction& f,
                                            double noise_floor = 1e-13) {
  SmoothnessProfile prof;
  prof.noise_floor = noise_floor;
  prof.shells = dyadic_shells(forward_transform(f));
  prof.fit = fit_decay(prof.shells, noise_floor);
  return prof;
}

struct ExtremizerReport {
  std::complex<double> omega0{1.0, 0.0};
  std::vector<double> sector_masses;
  double dominant_mass = 0.0;
  double output_dominant_mass = 0.0;  // same sector scan applied to Tf
  double triangle_gap = 0.0;
  double positivity_margin = 0.0;
  double jensen_exponent = 0.0;
  double jensen_max_violation = 0.0;
  int lower_bound_steps = 0;
  double lower_bound_ratio = 0.0;
  LadderResult ladder;
  SmoothnessProfile decay;
  double el_residual = 0.0;
  double linf_norm = 0.0;
};

// Runs the full battery on one function.  Positivity, convexity, and the
// lower bound act on the phase-aligned input with negative dust clamped;
// the sector scan sees the raw values.
inline ExtremizerReport build_report(const ConvOperator& op,
                                     const riesz::ExponentPair& pair,
                                     const riesz::Region& region,
                                     const GridFunction& f, double el_residual,
                                     int n_sectors = 8, double jensen_a = 2.0,
                                     int lower_steps = 1) {
  ExtremizerReport rep;
  const SectorProfile sec = constant_argument_check(op, pair, f, n_sectors);
  rep.omega0 = sec.omega0;
  rep.sector_masses = sec.sector_masses;
  rep.dominant_mass = sec.sector_masses[static_cast<std::size_t>(sec.dominant)];
  rep.triangle_gap = sec.triangle_gap;

  const SectorProfile out_sec =
      constant_argument_check(op, pair, op.apply(f), n_sectors);
  rep.output_dominant_mass =
      out_sec.sector_masses[static_cast<std::size_t>(out_sec.dominant)];

  const Grid& g = op.grid();
  const std::vector<double> origin(g.dim(), 0.0);
  const double everywhere = g.period() * std::sqrt(static_cast<double>(g.dim()));
  const GridFunction aligned = clamp_nonneg(std::conj(sec.omega0) * f);
  rep.positivity_margin =
      positivity_margin(std::conj(sec.omega0) * f, origin, everywhere);
  rep.jensen_exponent = jensen_a;
  rep.jensen_max_violation = jensen_check(op, aligned, jensen_a);
  rep.lower_bound_steps = lower_steps;
  rep.lower_bound_ratio =
      lower_bound_check(op, pair, aligned, lower_steps, origin, everywhere);
  rep.ladder = integrability_ladder(op, pair, region, f);
  rep.decay = smoothness_profile(f);
  rep.el_residual = el_residual;
  rep.linf_norm = max_abs(f);
  return rep;
}

}  // namespace convext
