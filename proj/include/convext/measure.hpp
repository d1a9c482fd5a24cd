#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

#include "convext/grid.hpp"
#include "convext/spectral_fit.hpp"
#include "convext/transform.hpp"

namespace convext {

// Compactly supported probability measures, represented purely through their
// Fourier transform sigma-hat. Built-in families are mollified by a Gaussian
// factor exp(-eps |2 pi xi|^2) where noted; a raw sphere or two-point measure
// would alias on any finite grid.
//
// Families and multipliers (xi in physical frequency units, i.e. lattice
// index / period):
//   Uniform                 1 at xi = 0, else 0 (torus Haar measure)
//   Heat(t)                 exp(-t |2 pi xi|^2)
//   MollifiedTwoPoint(a,e)  cos(2 pi a xi) exp(-e |2 pi xi|^2), d = 1
//   MollifiedSphere(r,e)    d=2: J0(2 pi r |xi|) exp(-e |2 pi xi|^2)
//                           d=3: sinc(2 pi r |xi|) exp(-e |2 pi xi|^2)
//   CustomTable             user samples on one fixed torus lattice
//
// For WindowedBox runs the measure must carry a support radius so the
// operator can pad convolutions; defaults put the Gaussian tail below 3e-16.

enum class MeasureFamily {
  uniform,
  heat,
  mollified_sphere,
  mollified_two_point,
  custom_table,
};

class MeasureSpec {
 public:
  static MeasureSpec uniform() { return MeasureSpec(MeasureFamily::uniform); }

  static MeasureSpec heat(double t) {
    if (!(t > 0.0)) throw precondition_error("heat measure: need t > 0");
    MeasureSpec m(MeasureFamily::heat);
    m.t_ = t;
    return m;
  }

  static MeasureSpec mollified_sphere(double r, double eps) {
    if (!(r > 0.0) || !(eps > 0.0))
      throw precondition_error("sphere measure: need r > 0 and eps > 0");
    MeasureSpec m(MeasureFamily::mollified_sphere);
    m.r_ = r;
    m.eps_ = eps;
    return m;
  }

  static MeasureSpec mollified_two_point(double a, double eps) {
    if (!(a > 0.0) || !(eps > 0.0))
      throw precondition_error("two-point measure: need a > 0 and eps > 0");
    MeasureSpec m(MeasureFamily::mollified_two_point);
    m.a_ = a;
    m.eps_ = eps;
    return m;
  }

  // Frequency-side samples on the table's own torus grid. The sample at
  // transform index 0 must be exactly the total mass 1.
  static MeasureSpec custom_table(GridFunction samples) {
    if (samples.grid().domain() != Domain::torus)
      throw precondition_error("custom table: samples must live on a torus grid");
    if (std::abs(samples[0] - std::complex<double>(1.0)) > 1e-12)
      throw precondition_error(
          "custom table: probability violation, multiplier at 0 must be 1");
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (std::abs(samples[i]) > 1.0 + 1e-12)
        throw precondition_error(
            "custom table: multiplier magnitude exceeds total mass");
    MeasureSpec m(MeasureFamily::custom_table);
    m.table_ = std::make_shared<GridFunction>(std::move(samples));
    return m;
  }

  MeasureFamily family() const { return family_; }
  std::optional<double> alpha_hint;

  // user-declared support radius (required for CustomTable on windows)
  std::optional<double> declared_support_radius;

  double support_radius() const {
    if (declared_support_radius) return *declared_support_radius;
    switch (family_) {
      case MeasureFamily::uniform:
        return 0.0;
      case MeasureFamily::heat:
        return 12.0 * std::sqrt(t_);
      case MeasureFamily::mollified_two_point:
        return a_ + 12.0 * std::sqrt(eps_);
      case MeasureFamily::mollified_sphere:
        return r_ + 12.0 * std::sqrt(eps_);
      case MeasureFamily::custom_table:
        throw precondition_error(
            "custom table: support radius must be declared for windowed use");
    }
    return 0.0;
  }

  double param_t() const { return t_; }
  double param_a() const { return a_; }
  double param_r() const { return r_; }
  double param_eps() const { return eps_; }
  const GridFunction& table() const {
    if (!table_) throw precondition_error("measure: no custom table attached");
    return *table_;
  }

  // sigma-hat at a physical frequency tuple (analytic families only)
  std::complex<double> multiplier_at(std::span<const double> xi) const {
    double norm2 = 0.0;
    for (double c : xi) norm2 += c * c;
    const double two_pi = 2.0 * std::numbers::pi;
    switch (family_) {
      case MeasureFamily::uniform:
        return norm2 == 0.0 ? 1.0 : 0.0;
      case MeasureFamily::heat:
        return std::exp(-t_ * two_pi * two_pi * norm2);
      case MeasureFamily::mollified_two_point:
        return std::cos(two_pi * a_ * xi[0]) *
               std::exp(-eps_ * two_pi * two_pi * norm2);
      case MeasureFamily::mollified_sphere: {
        const double u = two_pi * r_ * std::sqrt(norm2);
        const double shape = xi.size() == 2
                                 ? std::cyl_bessel_j(0.0, u)
                                 : (u == 0.0 ? 1.0 : std::sin(u) / u);
        return shape * std::exp(-eps_ * two_pi * two_pi * norm2);
      }
      case MeasureFamily::custom_table:
        throw precondition_error(
            "custom table: no off-lattice multiplier evaluation");
    }
    return 0.0;
  }

  bool valid_for_dim(int dim) const {
    switch (family_) {
      case MeasureFamily::mollified_two_point:
        return dim == 1;
      case MeasureFamily::mollified_sphere:
        return dim == 2 || dim == 3;
      default:
        return true;
    }
  }

  std::string family_name() const {
    switch (family_) {
      case MeasureFamily::uniform: return "uniform";
      case MeasureFamily::heat: return "heat";
      case MeasureFamily::mollified_sphere: return "mollified_sphere";
      case MeasureFamily::mollified_two_point: return "mollified_two_point";
      case MeasureFamily::custom_table: return "custom_table";
    }
    return "?";
  }

 private:
  explicit MeasureSpec(MeasureFamily f) : family_(f) {}

  MeasureFamily family_;
  double t_ = 0.0, a_ = 0.0, r_ = 0.0, eps_ = 0.0;
  std::shared_ptr<const GridFunction> table_;
};

// sigma-hat sampled on the grid's frequency lattice (natural transform order).
inline GridFunction multiplier(const MeasureSpec& spec, const Grid& g) {
  if (!spec.valid_for_dim(g.dim()))
    throw precondition_error("measure: family not defined for dim " +
                             std::to_string(g.dim()));
  if (spec.family() == MeasureFamily::custom_table) {
    const GridFunction& t = spec.table();
    if (t.grid() != g)
      throw precondition_error(
          "custom table: sampled on a different grid than requested");
    return t;
  }
  if (spec.family() == MeasureFamily::uniform &&
      g.domain() != Domain::torus)
    throw precondition_error("uniform measure: torus grids only");
  GridFunction out(g);
  std::vector<int> idx(g.dim());
  std::vector<double> xi(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unflatten(i, idx);
    for (int ax = 0; ax < g.dim(); ++ax)
      xi[ax] = g.freq(idx[ax]) / g.period();
    out[i] = spec.multiplier_at(xi);
  }
  return out;
}

// Dyadic-shell decay exponent of sigma-hat on this grid; +inf sentinel when
// the decay outruns the 1e-14 floor before the lattice edge.
inline DecayFit estimate_decay(const MeasureSpec& spec, const Grid& g) {
  GridFunction mult = multiplier(spec, g);
  auto shells = dyadic_shells(mult);
  int nonempty = 0;
  for (const auto& s : shells)
    if (s.count > 0) ++nonempty;
  if (nonempty < 8)
    throw precondition_error(
        "estimate_decay: need at least 8 nonempty dyadic shells; enlarge grid");
  return fit_decay(shells, 1e-14);
}

struct ProbabilityReport {
  double mass = 0.0;         // sigma-hat at 0
  double min_density = 0.0;  // min of the grid density (inverse transform)
  bool ok = false;
};

inline ProbabilityReport verify_probability(const MeasureSpec& spec,
                                            const Grid& g) {
  GridFunction mult = multiplier(spec, g);
  GridFunction density = inverse_transform(mult);
  ProbabilityReport rep;
  rep.mass = mult[0].real();
  rep.min_density = density[0].real();
  for (std::size_t i = 0; i < density.size(); ++i)
    rep.min_density = std::min(rep.min_density, density[i].real());
  rep.ok = std::fabs(rep.mass - 1.0) <= 1e-12 && rep.min_density >= -1e-8;
  return rep;
}

}  // namespace convext
