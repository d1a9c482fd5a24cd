#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "convext/errors.hpp"
#include "convext/reduce.hpp"

namespace convext {

enum class Domain : std::uint8_t { torus = 0, windowed_box = 1 };

// Uniform periodic grid on [0,1)^d (torus) or a centered box
// [-L/2, L/2)^d (windowed_box), n points per axis, row-major flattening.
class Grid {
 public:
  static Grid torus(int dim, int n) { return Grid(dim, n, Domain::torus, 1.0); }

  static Grid windowed(int dim, int n, double length) {
    return Grid(dim, n, Domain::windowed_box, length);
  }

  int dim() const { return dim_; }
  int n() const { return n_; }
  Domain domain() const { return domain_; }
  double period() const { return period_; }
  double spacing() const { return period_ / n_; }
  std::size_t size() const { return size_; }

  // Physical coordinate of axis index j.
  double position(int j) const {
    return domain_ == Domain::torus ? j * spacing()
                                    : (j - n_ / 2) * spacing();
  }

  // Signed centered frequency for transform index k; for even n the Nyquist
  // row sits at -n/2.
  int freq(int k) const { return k <= (n_ - 1) / 2 ? k : k - n_; }

  // Distance respecting periodicity on the torus.
  double axis_distance(double a, double b) const {
    double d = std::fabs(a - b);
    if (domain_ == Domain::torus) {
      d = std::fmod(d, period_);
      d = std::min(d, period_ - d);
    }
    return d;
  }

  void unflatten(std::size_t flat, std::span<int> out) const {
    for (int ax = dim_ - 1; ax >= 0; --ax) {
      out[ax] = static_cast<int>(flat % n_);
      flat /= n_;
    }
  }

  std::size_t flatten(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int ax = 0; ax < dim_; ++ax) f = f * n_ + static_cast<std::size_t>(idx[ax]);
    return f;
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && domain_ == o.domain_ &&
           period_ == o.period_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  Grid(int dim, int n, Domain domain, double period)
      : dim_(dim), n_(n), domain_(domain), period_(period) {
    if (dim < 1 || dim > 3) throw precondition_error("grid: dim must be 1..3");
    if (n < 2) throw precondition_error("grid: need n >= 2 points per axis");
    if (!(period > 0.0) || !std::isfinite(period))
      throw precondition_error("grid: period must be positive and finite");
    double pts = std::pow(static_cast<double>(n), dim);
    if (pts > static_cast<double>(std::size_t(1) << 30))
      throw precondition_error("grid: total point count too large");
    size_ = 1;
    for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(n);
  }

  int dim_;
  int n_;
  Domain domain_;
  double period_;
  std::size_t size_;
};

// Complex-valued samples on a Grid. The same container holds space-side and
// frequency-side data; frequency-side values are stored in natural transform
// order (use Grid::freq to read off the centered component).
class GridFunction {
 public:
  explicit GridFunction(const Grid& g)
      : grid_(g), v_(g.size(), std::complex<double>(0.0, 0.0)) {}

  GridFunction(const Grid& g, std::vector<std::complex<double>> values)
      : grid_(g), v_(std::move(values)) {
    if (v_.size() != grid_.size())
      throw precondition_error("grid function: value count does not match grid");
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  std::complex<double>& operator[](std::size_t i) { return v_[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return v_[i]; }
  std::vector<std::complex<double>>& values() { return v_; }
  const std::vector<std::complex<double>>& values() const { return v_; }

  template <class F>
  static GridFunction sample(const Grid& g, F&& f) {
    GridFunction out(g);
    std::vector<int> idx(g.dim());
    std::vector<double> x(g.dim());
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.unflatten(i, idx);
      for (int ax = 0; ax < g.dim(); ++ax) x[ax] = g.position(idx[ax]);
      out[i] = f(std::span<const double>(x));
    }
    return out;
  }

 private:
  Grid grid_;
  std::vector<std::complex<double>> v_;
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b,
                              const char* ctx) {
  if (a.grid() != b.grid())
    throw precondition_error(std::string(ctx) + ": grid mismatch");
}

// ---------------------------------------------------------------------------
// pointwise arithmetic
// ---------------------------------------------------------------------------

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "operator+");
  GridFunction out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "operator-");
  GridFunction out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline GridFunction operator*(std::complex<double> c, const GridFunction& a) {
  GridFunction out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

inline GridFunction abs(const GridFunction& a) {
  GridFunction out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i]);
  return out;
}

// Real part with negative dips clamped to zero; the fixed-point solver uses
// this before fractional powers.
inline GridFunction clamp_nonneg(const GridFunction& a) {
  GridFunction out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = std::max(a[i].real(), 0.0);
  return out;
}

// Entrywise a^e for nonnegative real data (imaginary parts ignored).
inline GridFunction pow_nonneg(const GridFunction& a, double e) {
  GridFunction out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = std::pow(std::max(a[i].real(), 0.0), e);
  return out;
}

inline bool all_finite(const GridFunction& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a[i].real()) || !std::isfinite(a[i].imag())) return false;
  return true;
}

inline double max_abs(const GridFunction& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

// ---------------------------------------------------------------------------
// norms and inner product (rectangle rule, deterministic reductions)
// ---------------------------------------------------------------------------

// L^p norm with the cell-volume weight h^d; p = infinity gives the max norm.
// Finite p is computed against the scaled data |f|/max so huge exponents
// (integrability ladders) neither overflow nor underflow.
inline double lp_norm(const GridFunction& f, double p) {
  if (!(p >= 1.0))
    throw precondition_error("lp_norm: exponent must satisfy p >= 1");
  const Grid& g = f.grid();
  if (std::isinf(p)) return max_abs(f);
  const double m = max_abs(f);
  if (m == 0.0) return 0.0;
  const double cell = std::pow(g.spacing(), g.dim());
  const double s = pairwise_sum(0, f.size(), [&](std::size_t i) {
    return std::pow(std::abs(f[i]) / m, p);
  });
  return m * std::exp(std::log(cell * s) / p);
}

// <f,g> = h^d sum f conj(g)
inline std::complex<double> inner(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "inner");
  const double cell = std::pow(a.grid().spacing(), a.grid().dim());
  return cell * pairwise_sum_complex(0, a.size(), [&](std::size_t i) {
           return a[i] * std::conj(b[i]);
         });
}

// ---------------------------------------------------------------------------
// translation and ball restriction
// ---------------------------------------------------------------------------

// Shift by whole grid cells: circular on the torus, zero-fill on a window.
inline GridFunction translate(const GridFunction& f, std::span<const int> shift) {
  const Grid& g = f.grid();
  if (static_cast<int>(shift.size()) != g.dim())
    throw precondition_error("translate: shift rank does not match grid dim");
  GridFunction out(g);
  std::vector<int> idx(g.dim()), src(g.dim());
  const int n = g.n();
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unflatten(i, idx);
    bool inside = true;
    for (int ax = 0; ax < g.dim(); ++ax) {
      int s = idx[ax] - shift[ax];
      if (g.domain() == Domain::torus) {
        s %= n;
        if (s < 0) s += n;
      } else if (s < 0 || s >= n) {
        inside = false;
        break;
      }
      src[ax] = s;
    }
    out[i] = inside ? f[g.flatten(src)] : 0.0;
  }
  return out;
}

inline GridFunction translate(const GridFunction& f,
                              const std::vector<int>& shift) {
  return translate(f, std::span<const int>(shift));
}

// Membership mask of the closed Euclidean ball B(center, radius); distances
// are periodic on the torus.
inline std::vector<char> ball_mask(const Grid& g, std::span<const double> center,
                                   double radius) {
  if (static_cast<int>(center.size()) != g.dim())
    throw precondition_error("ball_mask: center rank does not match grid dim");
  if (!(radius >= 0.0))
    throw precondition_error("ball_mask: radius must be nonnegative");
  std::vector<char> mask(g.size());
  std::vector<int> idx(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unflatten(i, idx);
    double d2 = 0.0;
    for (int ax = 0; ax < g.dim(); ++ax) {
      double dx = g.axis_distance(g.position(idx[ax]), center[ax]);
      d2 += dx * dx;
    }
    mask[i] = d2 <= radius * radius ? 1 : 0;
  }
  return mask;
}

// Zero out everything outside (keep = true) or inside (keep = false) the ball.
inline GridFunction restrict_ball(const GridFunction& f,
                                  std::span<const double> center, double radius,
                                  bool keep_inside = true) {
  const std::vector<char> mask = ball_mask(f.grid(), center, radius);
  GridFunction out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i)
    out[i] = (mask[i] != 0) == keep_inside ? f[i] : 0.0;
  return out;
}

inline GridFunction restrict_ball(const GridFunction& f,
                                  const std::vector<double>& center,
                                  double radius, bool keep_inside = true) {
  return restrict_ball(f, std::span<const double>(center), radius, keep_inside);
}

}  // namespace convext
