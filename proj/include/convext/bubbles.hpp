#pragma once

// Greedy bubble decomposition of near-extremizers on windowed grids.
//
// Given f with ||f||_p = 1 and a level epsilon, repeatedly extract the
// integer-lattice ball carrying the most p-mass of the current residual
// until ||T r||_q drops to epsilon.  Extraction subtracts exact stored
// values, so summing the translated profiles plus the remainder rebuilds
// f bitwise.  component_split groups nearby centers and localize reports
// how much of f lives near the dominant group.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "convext/conv_operator.hpp"
#include "convext/errors.hpp"
#include "convext/extremizer.hpp"
#include "convext/grid.hpp"
#include "convext/riesz.hpp"

namespace convext {

struct BubbleDecomposition {
  explicit BubbleDecomposition(GridFunction rem) : remainder(std::move(rem)) {}

  double epsilon = 0.0;
  double c_d = 0.0;                       // sqrt(dim); bubbles live in balls of radius 2 c_d
  double gamma = 0.0;                     // p q / (q - p), the bubble-count exponent
  std::vector<std::vector<int>> centers;  // integer lattice points, extraction order
  std::vector<GridFunction> profiles;     // translated to the origin, support in B(0, 2 c_d)
  std::vector<double> bubble_masses;      // ||phi_j||_p
  std::vector<double> residual_norms;     // ||r_j||_p for j = 0..N
  GridFunction remainder;
  double remainder_t_norm = 0.0;          // ||T r_N||_q, at most epsilon
  double c_empirical = 0.0;               // min_j ||phi_j||_p^p / epsilon^gamma, +inf when empty
  double big_c_empirical = 0.0;           // N epsilon^gamma

  int size() const { return static_cast<int>(centers.size()); }
};

namespace detail {

// Largest |r|^p mass over closed balls of radius 2 c_d centered at integer
// lattice points of the window.  Centers snap to the nearest grid index so
// the scanned mass equals the mass of the profile a later extraction at
// that center would produce.  Strict > keeps the lexicographically
// smallest argmax.
inline std::vector<int> argmax_ball_center(const GridFunction& r, double p,
                                           double radius) {
  const Grid& g = r.grid();
  const int d = g.dim();
  const int n = g.n();
  const double h = g.spacing();
  const double half = 0.5 * g.period();

  const int lo = static_cast<int>(std::ceil(-half - 1e-9));
  const int hi = static_cast<int>(std::ceil(half - 1e-9)) - 1;
  if (hi < lo) throw precondition_error("decompose: window has no integer lattice points");

  const int reach = static_cast<int>(std::ceil(radius / h)) + 1;
  std::vector<int> alpha(d, lo), best(d, lo);
  std::vector<int> box_lo(d), box_hi(d), idx(d);
  std::vector<double> snapped(d);
  double best_mass = -1.0;
  while (true) {
    double mass = 0.0;
    bool box_ok = true;
    for (int ax = 0; ax < d; ++ax) {
      const int off = static_cast<int>(std::lround(alpha[ax] / h));
      snapped[ax] = off * h;
      box_lo[ax] = std::max(0, n / 2 + off - reach);
      box_hi[ax] = std::min(n - 1, n / 2 + off + reach);
      idx[ax] = box_lo[ax];
      if (box_hi[ax] < box_lo[ax]) box_ok = false;
    }
    while (box_ok) {
      double d2 = 0.0;
      for (int ax = 0; ax < d; ++ax) {
        const double dx = g.position(idx[ax]) - snapped[ax];
        d2 += dx * dx;
      }
      if (d2 <= radius * radius) {
        std::size_t flat = 0;
        for (int ax = 0; ax < d; ++ax) flat = flat * n + idx[ax];
        mass += std::pow(std::abs(r[flat]), p);
      }
      int ax = d - 1;
      while (ax >= 0 && ++idx[ax] > box_hi[ax]) idx[ax] = box_lo[ax], --ax;
      if (ax < 0) break;
    }
    if (mass > best_mass) {
      best_mass = mass;
      best = alpha;
    }
    int ax = d - 1;
    while (ax >= 0 && ++alpha[ax] > hi) alpha[ax] = lo, --ax;
    if (ax < 0) break;
  }
  return best;
}

}  // namespace detail

// Peels p-mass concentrations off f until ||T r||_q <= epsilon.  Requires a
// windowed grid and ||f||_p = 1 up to 1e-10.  epsilon at or above ||T f||_q
// yields the empty decomposition with remainder f.
inline BubbleDecomposition decompose(const ConvOperator& op,
                                     const riesz::ExponentPair& pair,
                                     const GridFunction& f, double epsilon) {
  const Grid& g = op.grid();
  if (g.domain() != Domain::windowed_box)
    throw precondition_error("decompose: needs a windowed grid, the torus has no infinity to escape to");
  if (f.grid() != g) throw precondition_error("decompose: function grid does not match operator grid");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw precondition_error("decompose: epsilon must be positive and finite");
  const double p = pair.p;
  const double q = pair.q;
  const double nf = lp_norm(f, p);
  if (std::abs(nf - 1.0) > 1e-10)
    throw precondition_error("decompose: input must be normalized, ||f||_p = " + std::to_string(nf));

  const double c_d = std::sqrt(static_cast<double>(g.dim()));
  const double radius = 2.0 * c_d;
  const double h = g.spacing();
  constexpr int max_bubbles = 4096;

  BubbleDecomposition dec(f);
  dec.epsilon = epsilon;
  dec.c_d = c_d;
  dec.gamma = p * q / (q - p);
  dec.residual_norms.push_back(nf);

  GridFunction r = f;
  double tr = lp_norm(op.apply(r), q);
  const std::vector<double> origin(g.dim(), 0.0);
  while (tr > epsilon) {
    if (dec.size() >= max_bubbles)
      throw numeric_error("decompose: bubble count exceeded safety cap, residual is not draining");
    const std::vector<int> alpha = detail::argmax_ball_center(r, p, radius);
    std::vector<int> shift(g.dim());
    for (int ax = 0; ax < g.dim(); ++ax)
      shift[ax] = static_cast<int>(std::lround(alpha[ax] / h));
    std::vector<int> back_shift(g.dim());
    for (int ax = 0; ax < g.dim(); ++ax) back_shift[ax] = -shift[ax];

    GridFunction phi = restrict_ball(translate(r, back_shift), origin, radius);
    GridFunction claimed = translate(phi, shift);
    for (std::size_t i = 0; i < r.size(); ++i)
      if (claimed[i] != 0.0) r[i] = 0.0;  // exact handoff, no cancellation error

    dec.centers.push_back(alpha);
    dec.profiles.push_back(std::move(phi));
    dec.bubble_masses.push_back(lp_norm(dec.profiles.back(), p));
    dec.residual_norms.push_back(lp_norm(r, p));
    tr = lp_norm(op.apply(r), q);
  }

  dec.remainder = r;
  dec.remainder_t_norm = tr;
  const double eps_gamma = std::pow(epsilon, dec.gamma);
  dec.big_c_empirical = dec.size() * eps_gamma;
  if (dec.size() == 0) {
    dec.c_empirical = std::numeric_limits<double>::infinity();
  } else {
    double cmin = std::numeric_limits<double>::infinity();
    for (double m : dec.bubble_masses)
      cmin = std::min(cmin, std::pow(m, p) / eps_gamma);
    dec.c_empirical = cmin;
  }
  return dec;
}

struct ComponentSplit {
  std::vector<int> component_of;  // per center; component 0 contains the first center
  int count = 0;
};

// Groups centers whose distance is below 8 c_d.  Chains merge, so two
// centers can share a component without being close themselves.
inline ComponentSplit component_split(const std::vector<std::vector<int>>& centers,
                                      double c_d) {
  if (centers.empty())
    throw precondition_error("component_split: no centers to split");
  if (!(c_d > 0.0)) throw precondition_error("component_split: c_d must be positive");
  const int n = static_cast<int>(centers.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&parent](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  const double thresh2 = 64.0 * c_d * c_d;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (centers[j].size() != centers[i].size())
        throw precondition_error("component_split: centers have mixed dimensions");
      double d2 = 0.0;
      for (std::size_t ax = 0; ax < centers[i].size(); ++ax) {
        const double dx = static_cast<double>(centers[i][ax] - centers[j][ax]);
        d2 += dx * dx;
      }
      if (d2 < thresh2) parent[find(i)] = find(j);
    }
  ComponentSplit split;
  split.component_of.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (split.component_of[root] < 0) split.component_of[root] = split.count++;
  }
  for (int i = 0; i < n; ++i) split.component_of[i] = split.component_of[find(i)];
  return split;
}

struct LocalizeResult {
  explicit LocalizeResult(BubbleDecomposition dec) : decomposition(std::move(dec)) {}

  std::vector<int> x0;       // center of the dominant bubble
  double radius = 0.0;       // 4 N c_d, the concentration scale
  double tail_mass = 0.0;    // ||f||_p outside B(x0, radius)
  double a_mass = 0.0;       // ||.||_p of the bubbles in the component of x0
  double b_mass = 0.0;       // ||.||_p of the rest
  double epsilon_used = 0.0;
  BubbleDecomposition decomposition;
  ComponentSplit components;
};

// Decomposes a near-extremizer at level eta^exponent ||T f||_q and splits
// the bubbles into the component of the dominant center versus the rest.
// A small b_mass certifies that f concentrates in one ball; a large one
// flags mass split across distant sites.
inline LocalizeResult localize(const ConvOperator& op,
                               const riesz::ExponentPair& pair,
                               const GridFunction& f, double eta,
                               double norm_estimate, double eta_exponent = 0.5) {
  if (!(eta > 0.0) || !(eta < 1.0))
    throw precondition_error("localize: eta must lie in (0, 1)");
  if (!(norm_estimate > 0.0) || !std::isfinite(norm_estimate))
    throw precondition_error("localize: norm estimate must be positive and finite");
  if (!(eta_exponent > 0.0))
    throw precondition_error("localize: eta exponent must be positive");
  const double p = pair.p;
  const double q = pair.q;
  const double nf = lp_norm(f, p);
  const double tf = lp_norm(op.apply(f), q);
  if (!(tf > (1.0 - eta) * norm_estimate * nf))
    throw precondition_error("localize: input is not a near-extremizer at this eta");

  const double eps = std::pow(eta, eta_exponent) * tf;
  LocalizeResult res(decompose(op, pair, f, eps));
  res.epsilon_used = eps;
  const BubbleDecomposition& dec = res.decomposition;
  if (dec.size() == 0)
    throw numeric_error("localize: no bubbles extracted, the level exceeds ||T f||_q");
  res.components = component_split(dec.centers, dec.c_d);

  const Grid& g = op.grid();
  const double h = g.spacing();
  GridFunction part_a(g), part_b(g);
  for (int j = 0; j < dec.size(); ++j) {
    std::vector<int> shift(g.dim());
    for (int ax = 0; ax < g.dim(); ++ax)
      shift[ax] = static_cast<int>(std::lround(dec.centers[j][ax] / h));
    const GridFunction back = translate(dec.profiles[j], shift);
    if (res.components.component_of[j] == res.components.component_of[0])
      part_a = part_a + back;
    else
      part_b = part_b + back;
  }
  res.x0 = dec.centers[0];
  res.a_mass = lp_norm(part_a, p);
  res.b_mass = lp_norm(part_b, p);
  res.radius = 4.0 * dec.size() * dec.c_d;

  std::vector<int> center_shift(g.dim());
  for (int ax = 0; ax < g.dim(); ++ax)
    center_shift[ax] = -static_cast<int>(std::lround(res.x0[ax] / h));
  const std::vector<double> origin(g.dim(), 0.0);
  const GridFunction outside =
      restrict_ball(translate(f, center_shift), origin, res.radius, false);
  res.tail_mass = lp_norm(outside, p);
  return res;
}

}  // namespace convext
