#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "convext/grid.hpp"
#include "convext/measure.hpp"
#include "convext/riesz.hpp"
#include "convext/transform.hpp"

namespace convext {

// Convolution against the measure, Tf = f * sigma, realized spectrally:
// transform, multiply by sigma-hat, transform back. On a torus the operator
// grid is the working grid. On a WindowedBox the input is zero-padded to at
// least n + support diameter samples so circular convolution on the padded
// grid equals linear convolution on the window, then cropped back.
class ConvOperator {
 public:
  ConvOperator(MeasureSpec spec, const Grid& grid)
      : spec_(std::move(spec)), grid_(grid), work_grid_(grid) {
    if (!spec_.valid_for_dim(grid.dim()))
      throw precondition_error("operator: measure family not defined for dim " +
                               std::to_string(grid.dim()));
    if (grid.domain() == Domain::windowed_box) {
      if (spec_.family() == MeasureFamily::uniform)
        throw precondition_error("operator: uniform measure needs a torus grid");
      if (spec_.family() == MeasureFamily::custom_table)
        throw precondition_error(
            "operator: custom tables cannot be resampled onto padded windows");
      const double h = grid.spacing();
      const int pad = static_cast<int>(
          std::ceil(2.0 * spec_.support_radius() / h)) + 2;
      int m = grid.n() + pad;
      int pow2 = 1;
      while (pow2 < m) pow2 *= 2;  // power of two keeps the transforms cheap
      work_grid_ = Grid::windowed(grid.dim(), pow2, pow2 * h);
    }
    mult_ = build_multiplier();
    if (std::abs(mult_[0] - std::complex<double>(1.0)) > 1e-12)
      throw precondition_error("operator: sigma-hat(0) must equal 1");
  }

  const Grid& grid() const { return grid_; }
  const Grid& work_grid() const { return work_grid_; }
  const MeasureSpec& spec() const { return spec_; }
  const GridFunction& multiplier_table() const { return mult_; }

  GridFunction apply(const GridFunction& f) const { return convolve(f, false); }
  GridFunction apply_adjoint(const GridFunction& f) const {
    return convolve(f, true);
  }

  // K_N = inverse transform of |sigma-hat|^{2N}, the kernel of (T* T)^N and
  // the density of the N-fold (sigma~ * sigma) convolution. Values around the
  // origin are returned on the operator grid; K(0) is computed, never assumed.
  GridFunction kernel_power(int n) const {
    if (n < 1) throw precondition_error("kernel_power: need N >= 1");
    GridFunction powd(work_grid_);
    for (std::size_t i = 0; i < powd.size(); ++i)
      powd[i] = std::pow(std::norm(mult_[i]), n);
    GridFunction full = inverse_transform(powd);
    if (grid_.domain() == Domain::torus) return full;

    // crop the padded kernel onto the centered window
    GridFunction out(grid_);
    std::vector<int> idx(grid_.dim()), src(grid_.dim());
    const int m = work_grid_.n();
    for (std::size_t i = 0; i < out.size(); ++i) {
      grid_.unflatten(i, idx);
      for (int ax = 0; ax < grid_.dim(); ++ax) {
        int s = (idx[ax] - grid_.n() / 2) % m;
        if (s < 0) s += m;
        src[ax] = s;
      }
      out[i] = full[work_grid_.flatten(src)];
    }
    return out;
  }

  struct PositivityRadius {
    int power = 0;    // smallest N with K_N strictly positive on the ball
    double c_r = 0;   // min of K_N over the ball
    double k0 = 0;    // K_N at the origin
  };

  // Scan N = 1..n_max for strict positivity of K_N on B(0, R). Strictness is
  // literal: any value <= 0 rejects that N.
  PositivityRadius find_positivity_radius(double radius, int n_max) const {
    if (!(radius > 0.0))
      throw precondition_error("positivity radius: need R > 0");
    const double limit = grid_.period() / 2.0;
    if (radius >= limit)
      throw precondition_error(
          "positivity radius: R must be below half the domain extent");
    if (n_max < 1)
      throw precondition_error("positivity radius: need n_max >= 1");

    const std::vector<double> origin(grid_.dim(), 0.0);
    const std::vector<char> mask = ball_mask(grid_, origin, radius);
    std::vector<double> mins;
    mins.reserve(n_max);
    for (int n = 1; n <= n_max; ++n) {
      GridFunction k = kernel_power(n);
      double mn = std::numeric_limits<double>::infinity();
      double k0 = 0.0;
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (!mask[i]) continue;
        mn = std::min(mn, k[i].real());
      }
      std::vector<int> center_idx(grid_.dim(),
                                  grid_.domain() == Domain::torus ? 0 : grid_.n() / 2);
      k0 = k[grid_.flatten(center_idx)].real();
      if (mn > 0.0) return {n, mn, k0};
      mins.push_back(mn);
    }
    throw positivity_radius_error(
        "positivity radius: no kernel power up to N = " + std::to_string(n_max) +
            " is strictly positive on the ball",
        std::move(mins));
  }

 private:
  GridFunction build_multiplier() const {
    if (grid_.domain() == Domain::torus) return multiplier(spec_, grid_);
    // padded window: analytic families evaluated at physical frequencies
    const Grid& w = work_grid_;
    GridFunction out(w);
    std::vector<int> idx(w.dim());
    std::vector<double> xi(w.dim());
    for (std::size_t i = 0; i < w.size(); ++i) {
      w.unflatten(i, idx);
      for (int ax = 0; ax < w.dim(); ++ax)
        xi[ax] = w.freq(idx[ax]) / w.period();
      out[i] = spec_.multiplier_at(xi);
    }
    return out;
  }

  GridFunction convolve(const GridFunction& f, bool adjoint) const {
    if (f.grid() != grid_)
      throw precondition_error("operator: input grid does not match");
    if (grid_.domain() == Domain::torus) {
      GridFunction fhat = forward_transform(f);
      for (std::size_t i = 0; i < fhat.size(); ++i)
        fhat[i] *= adjoint ? std::conj(mult_[i]) : mult_[i];
      return inverse_transform(fhat);
    }

    // embed the window into the padded grid at offset 0
    GridFunction buf(work_grid_);
    std::vector<int> idx(grid_.dim());
    for (std::size_t i = 0; i < f.size(); ++i) {
      grid_.unflatten(i, idx);
      buf[work_grid_.flatten(idx)] = f[i];
    }
    GridFunction bhat = forward_transform(buf);
    for (std::size_t i = 0; i < bhat.size(); ++i)
      bhat[i] *= adjoint ? std::conj(mult_[i]) : mult_[i];
    GridFunction conv = inverse_transform(bhat);
    GridFunction out(grid_);
    for (std::size_t i = 0; i < out.size(); ++i) {
      grid_.unflatten(i, idx);
      out[i] = conv[work_grid_.flatten(idx)];
    }
    return out;
  }

  MeasureSpec spec_;
  Grid grid_;
  Grid work_grid_;
  GridFunction mult_{Grid::torus(1, 2)};
};

// ---------------------------------------------------------------------------
// smoothing exponent from the Riesz diagram
// ---------------------------------------------------------------------------

struct KappaScanRow {
  double theta = 0.0;
  bool feasible = false;
  double gain = 0.0;  // theta * alpha
};

// kappa = alpha * sup{theta in (0,1]} such that interpolating (1/p, 1/q)
// with weight theta against the L^2 -> L^2 point (1/2, 1/2) stays inside the
// region: 1/p = theta/2 + (1-theta)/r, 1/q = theta/2 + (1-theta)/s with
// (1/r, 1/s) in the region. Scanned on a fixed 1e-4 mesh. alpha may be the
// +inf sentinel, in which case any feasible theta makes kappa infinite.
// A boundary point has no room to interpolate and yields 0; a point outside
// the region is rejected. p = q is allowed here (the L^2 point itself).
inline double smoothing_kappa(const riesz::Region& region, double alpha,
                              double p, double q,
                              std::vector<KappaScanRow>* scan = nullptr) {
  if (!(alpha > 0.0))
    throw precondition_error("smoothing_kappa: alpha must be positive");
  if (!(p > 1.0) || !(q > 1.0) || !std::isfinite(p) || !std::isfinite(q))
    throw precondition_error("smoothing_kappa: need finite p, q > 1");
  const riesz::Point z{1.0 / p, 1.0 / q};
  if (!region.contains(z, 1e-12))
    throw precondition_error("smoothing_kappa: (1/p, 1/q) must lie in the region");

  const double mesh = 1e-4;
  double best_theta = 0.0;
  const int steps = static_cast<int>(std::round(1.0 / mesh));
  for (int k = 1; k <= steps; ++k) {
    const double theta = k * mesh;
    bool ok;
    if (k == steps) {
      // theta = 1 forces (1/p, 1/q) = (1/2, 1/2) itself
      ok = std::fabs(z.x - 0.5) <= 1e-12 && std::fabs(z.y - 0.5) <= 1e-12;
    } else {
      const double rx = (z.x - theta / 2.0) / (1.0 - theta);
      const double ry = (z.y - theta / 2.0) / (1.0 - theta);
      ok = rx >= -1e-12 && rx <= 1.0 + 1e-12 && ry >= -1e-12 &&
           ry <= 1.0 + 1e-12 && region.contains({rx, ry}, 1e-12);
    }
    if (ok) best_theta = theta;
    if (scan) scan->push_back({theta, ok, theta * alpha});
  }
  if (best_theta == 0.0) return 0.0;  // avoid 0 * inf when alpha is the sentinel
  return best_theta * alpha;
}

}  // namespace convext
