#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "convext/errors.hpp"

namespace convext::riesz {

// Riesz-diagram calculus on the unit square of reciprocal exponents (1/p on
// the horizontal axis, 1/q on the vertical). A boundedness region is a convex
// polygon containing the endpoint points (0,0) and (1,1); its lower envelope
// t -> min{u : (t,u) in region} encodes the best output exponent available at
// input exponent t, and the bootstrap map composes two envelope lookups.

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct ExponentPair {
  double p;
  double q;
  ExponentPair(double p_, double q_) : p(p_), q(q_) {
    if (!(p > 1.0) || !(q > p) || !std::isfinite(q))
      throw precondition_error("exponent pair: need 1 < p < q < inf");
  }
  double inv_p() const { return 1.0 / p; }
  double inv_q() const { return 1.0 / q; }
};

class Region {
 public:
  explicit Region(std::vector<Point> vertices) : v_(std::move(vertices)) {
    if (v_.size() < 3)
      throw precondition_error("riesz region: need at least 3 vertices");
    for (const auto& p : v_)
      if (p.x < -1e-12 || p.x > 1.0 + 1e-12 || p.y < -1e-12 || p.y > 1.0 + 1e-12)
        throw precondition_error("riesz region: vertices must lie in [0,1]^2");
    normalize_ccw();
    check_convex();
    if (!contains({0.0, 0.0}, 1e-9) || !contains({1.0, 1.0}, 1e-9))
      throw precondition_error("riesz region: must contain (0,0) and (1,1)");
  }

  // convex hull of (0,0), (1,1) and the declared bound (1/p0, 1/q0)
  static Region decay_triangle(double p0, double q0) {
    ExponentPair check(p0, q0);  // validates 1 < p0 < q0
    return Region({{0.0, 0.0}, {1.0 / p0, 1.0 / q0}, {1.0, 1.0}});
  }

  static Region full_square() {
    return Region({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}});
  }

  const std::vector<Point>& vertices() const { return v_; }

  bool contains(Point p, double tol = 1e-12) const {
    return signed_margin(p) >= -tol;
  }

  bool strictly_contains(Point p, double margin = 1e-12) const {
    return signed_margin(p) > margin;
  }

  // smallest signed distance from p to the edge lines (positive inside)
  double signed_margin(Point p) const {
    double m = std::numeric_limits<double>::infinity();
    const std::size_t n = v_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = v_[i];
      const Point& b = v_[(i + 1) % n];
      const double ex = b.x - a.x, ey = b.y - a.y;
      const double len = std::hypot(ex, ey);
      const double cross = ex * (p.y - a.y) - ey * (p.x - a.x);
      m = std::min(m, cross / len);
    }
    return m;
  }

  // lower envelope: min u with (t, u) in the region
  double lower_envelope(double t) const {
    double xmin = v_[0].x, xmax = v_[0].x;
    for (const auto& p : v_) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
    }
    if (t < xmin - 1e-12 || t > xmax + 1e-12)
      throw precondition_error("riesz region: exponent outside horizontal range");
    t = std::clamp(t, xmin, xmax);

    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = v_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = v_[i];
      const Point& b = v_[(i + 1) % n];
      const double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
      if (t < lo - 1e-14 || t > hi + 1e-14) continue;
      if (hi - lo <= 1e-14) {
        best = std::min(best, std::min(a.y, b.y));
      } else {
        const double u = a.y + (t - a.x) * (b.y - a.y) / (b.x - a.x);
        best = std::min(best, u);
      }
    }
    return best;
  }

 private:
  void normalize_ccw() {
    double area2 = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) {
      const Point& a = v_[i];
      const Point& b = v_[(i + 1) % v_.size()];
      area2 += a.x * b.y - b.x * a.y;
    }
    if (std::fabs(area2) < 1e-15)
      throw precondition_error("riesz region: degenerate (zero area)");
    if (area2 < 0.0) std::reverse(v_.begin(), v_.end());
  }

  void check_convex() const {
    const std::size_t n = v_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = v_[i];
      const Point& b = v_[(i + 1) % n];
      const Point& c = v_[(i + 2) % n];
      const double cross =
          (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
      if (cross < -1e-12)
        throw precondition_error("riesz region: vertex list is not convex");
    }
  }

  std::vector<Point> v_;
};

inline double r_map(const Region& region, double t) {
  return region.lower_envelope(t);
}

// One bootstrap step: feed the envelope output through the dual exponent
// scaling, s(t) = r(r(t) * (q-1)) / (p-1).
inline double s_map(const Region& region, const ExponentPair& pair, double t) {
  const double u = r_map(region, t);
  const double arg = u * (pair.q - 1.0);
  if (arg < -1e-12 || arg > 1.0 + 1e-12)
    throw precondition_error(
        "bootstrap infeasible: intermediate exponent escapes [0,1] "
        "(pair too close to the region boundary)");
  return r_map(region, std::clamp(arg, 0.0, 1.0)) / (pair.p - 1.0);
}

// Iterate s_map from t0 = 1/p down below tol. Returns the full sequence
// including t0. The sequence must strictly decrease at every step.
inline std::vector<double> bootstrap_sequence(const Region& region,
                                              const ExponentPair& pair,
                                              double tol, int max_iter) {
  if (!(tol > 0.0)) throw precondition_error("bootstrap: tol must be positive");
  if (max_iter < 1) throw precondition_error("bootstrap: max_iter must be >= 1");
  if (!region.strictly_contains({pair.inv_p(), pair.inv_q()}, 1e-9))
    throw precondition_error(
        "bootstrap infeasible: (1/p, 1/q) must lie strictly inside the region");
  std::vector<double> seq{pair.inv_p()};
  for (int k = 0; k < max_iter && seq.back() >= tol; ++k) {
    const double next = s_map(region, pair, seq.back());
    if (!(next < seq.back()))
      throw numeric_error(
          "bootstrap monotonicity violation at step " + std::to_string(k) +
          ": region/pair combination does not contract");
    seq.push_back(next);
  }
  return seq;
}

// Reciprocals of the bootstrap iterates: the integrability ladder
// s_k = 1/t_k starting at s_0 = p, strictly increasing.
inline std::vector<double> q_exponent_sequence(const Region& region,
                                               const ExponentPair& pair,
                                               double tol, int max_iter) {
  std::vector<double> ladder;
  for (double t : bootstrap_sequence(region, pair, tol, max_iter))
    ladder.push_back(1.0 / t);
  return ladder;
}

}  // namespace convext::riesz
