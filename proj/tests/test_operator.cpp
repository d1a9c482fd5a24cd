#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "convext/conv_operator.hpp"
#include "convext/rng.hpp"

using namespace convext;
using Catch::Approx;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

GridFunction random_complex(const Grid& g, std::uint64_t seed) {
  SplitMix64 rng(seed);
  GridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = {rng.next_normal(), rng.next_normal()};
  return f;
}

// centered Gaussian density with variance 2s, the inverse transform of
// exp(-s (2 pi xi)^2), evaluated by hand
double gauss(double x, double s) {
  return std::exp(-x * x / (4.0 * s)) / std::sqrt(4.0 * std::numbers::pi * s);
}

// periodization over the unit torus, truncated where the tails underflow
double periodized_gauss(double x, double s) {
  double acc = 0.0;
  for (int m = -8; m <= 8; ++m) acc += gauss(x + m, s);
  return acc;
}

// spatial form of kernel_power(N) for the mollified two-point measure:
// the 2N-fold Bernoulli walk over {-a, +a} smeared by a Gaussian of
// variance 4 N eps, periodized. Walk endpoints sit at 2ka - Na... shifted:
// sigma~ * sigma in one factor puts mass binom(2,.)/4 on {-2a, 0, 2a}; the
// N-fold power is the binomial profile binom(2N, N+k) / 4^N on {2ka}.
double two_point_kernel(double x, double a, double eps, int n) {
  double acc = 0.0;
  for (int k = -n; k <= n; ++k) {
    double w = 1.0;
    for (int i = 1; i <= n - k; ++i)
      w *= static_cast<double>(n + k + i) / static_cast<double>(i);
    w /= std::pow(4.0, n);
    acc += w * periodized_gauss(x - 2.0 * a * k, 2.0 * n * eps);
  }
  return acc;
}
}  // namespace

TEST_CASE("operator: single-mode action and T1 = 1") {
  Grid g = Grid::torus(1, 64);
  const double t = 0.02;
  ConvOperator op(MeasureSpec::heat(t), g);

  GridFunction mode = GridFunction::sample(g, [](std::span<const double> x) {
    return std::exp(std::complex<double>(0.0, kTwoPi * 3.0 * x[0]));
  });
  GridFunction out = op.apply(mode);
  const double damp = std::exp(-t * kTwoPi * kTwoPi * 9.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(std::abs(out[i] - damp * mode[i]) < 1e-12);
  }

  GridFunction one(g);
  for (std::size_t i = 0; i < one.size(); ++i) one[i] = 1.0;
  GridFunction tone = op.apply(one);
  for (std::size_t i = 0; i < tone.size(); ++i) CHECK(std::abs(tone[i] - 1.0) < 1e-13);
}

TEST_CASE("operator: adjoint identity on random pairs") {
  Grid g = Grid::torus(2, 16);
  ConvOperator op(MeasureSpec::mollified_sphere(0.3, 1e-3), g);
  for (int trial = 0; trial < 100; ++trial) {
    GridFunction f = random_complex(g, 900 + trial);
    GridFunction gg = random_complex(g, 5000 + trial);
    auto lhs = inner(op.apply(f), gg);
    auto rhs = inner(f, op.apply_adjoint(gg));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
  }

  Grid w = Grid::windowed(1, 64, 1.0);
  ConvOperator opw(MeasureSpec::mollified_two_point(0.2, 1e-3), w);
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction f = random_complex(w, 1700 + trial);
    GridFunction gg = random_complex(w, 6400 + trial);
    auto lhs = inner(opw.apply(f), gg);
    auto rhs = inner(f, opw.apply_adjoint(gg));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("operator: endpoint contractions") {
  Grid g = Grid::torus(1, 128);
  ConvOperator heat(MeasureSpec::heat(0.01), g);
  ConvOperator tp(MeasureSpec::mollified_two_point(0.25, 1e-3), g);
  Grid w = Grid::windowed(1, 128, 1.0);
  ConvOperator tpw(MeasureSpec::mollified_two_point(0.25, 1e-3), w);

  auto check_all = [](const ConvOperator& op, const GridFunction& f) {
    GridFunction tf = op.apply(f);
    for (double p : {1.0, 2.0, kInf}) {
      CHECK(lp_norm(tf, p) <= lp_norm(f, p) * (1.0 + 1e-10));
    }
  };
  for (int trial = 0; trial < 5; ++trial) {
    check_all(heat, random_complex(g, 31 + trial));
    check_all(tp, random_complex(g, 77 + trial));
    check_all(tpw, random_complex(w, 123 + trial));
  }
}

TEST_CASE("operator: windowed apply matches direct quadrature") {
  // on a window the padded circular convolution must equal the linear one;
  // the oracle sums f against the physical density at exact offsets
  Grid w = Grid::windowed(1, 64, 1.0);
  const double a = 0.2, eps = 1e-3;
  ConvOperator op(MeasureSpec::mollified_two_point(a, eps), w);
  GridFunction f = random_complex(w, 2024);
  GridFunction tf = op.apply(f);

  const double h = w.spacing();
  for (int i = 0; i < w.n(); ++i) {
    std::complex<double> acc = 0.0;
    const double xi = w.position(i);
    for (int j = 0; j < w.n(); ++j) {
      const double d = xi - w.position(j);
      acc += f[j] * 0.5 * (gauss(d - a, eps) + gauss(d + a, eps)) * h;
    }
    CHECK(std::abs(tf[i] - acc) < 1e-12);
  }
}

TEST_CASE("kernel_power: heat kernel against the periodized Gaussian") {
  Grid g = Grid::torus(1, 64);
  const double t = 0.01;
  ConvOperator op(MeasureSpec::heat(t), g);

  for (int n : {1, 3}) {
    GridFunction k = op.kernel_power(n);
    double scale = 0.0;
    for (int i = 0; i < g.n(); ++i)
      scale = std::max(scale, std::abs(k[i].real()));
    for (int i = 0; i < g.n(); ++i) {
      const double expect = periodized_gauss(g.position(i), 2.0 * n * t);
      CHECK(k[i].real() == Approx(expect).margin(1e-12 * scale));
      CHECK(std::abs(k[i].imag()) < 1e-13);
    }
  }
}

TEST_CASE("kernel_power: two-point kernel is real, even, and matches the walk") {
  Grid g = Grid::torus(1, 256);
  const double a = 0.25, eps = 1e-3;
  ConvOperator op(MeasureSpec::mollified_two_point(a, eps), g);

  for (int n : {1, 2}) {
    GridFunction k = op.kernel_power(n);
    for (int i = 0; i < g.n(); ++i) CHECK(std::abs(k[i].imag()) < 1e-12);
    for (int i = 1; i < g.n(); ++i)
      CHECK(k[i].real() == Approx(k[g.n() - i].real()).margin(1e-12));
    for (int i = 0; i < g.n(); ++i) {
      const double expect = two_point_kernel(g.position(i), a, eps, n);
      CHECK(k[i].real() == Approx(expect).margin(1e-10));
    }
  }
}

TEST_CASE("kernel_power: max at origin and no dips below -1e-10") {
  Grid g1 = Grid::torus(1, 256);
  Grid g2 = Grid::torus(2, 32);
  ConvOperator heat(MeasureSpec::heat(0.01), g1);
  ConvOperator tp(MeasureSpec::mollified_two_point(0.25, 1e-3), g1);
  ConvOperator sp(MeasureSpec::mollified_sphere(0.3, 1e-3), g2);

  auto check = [](const ConvOperator& op, int n) {
    GridFunction k = op.kernel_power(n);
    const double k0 = k[0].real();
    CHECK(k0 > 0.0);
    for (std::size_t i = 0; i < k.size(); ++i) {
      CHECK(k[i].real() >= -1e-10);
      CHECK(k[i].real() <= k0 * (1.0 + 1e-12));
    }
  };
  for (int n : {1, 2}) {
    check(heat, n);
    check(tp, n);
    check(sp, n);
  }
}

TEST_CASE("kernel_power: windowed crop agrees with the free-space kernel") {
  Grid w = Grid::windowed(1, 64, 1.0);
  const double t = 0.005;
  ConvOperator op(MeasureSpec::heat(t), w);
  GridFunction k = op.kernel_power(1);
  for (int i = 0; i < w.n(); ++i) {
    CHECK(k[i].real() == Approx(gauss(w.position(i), 2.0 * t)).margin(1e-12));
  }
  // origin lands at index n/2 on a centered window
  CHECK(k[w.n() / 2].real() == Approx(1.0 / std::sqrt(8.0 * std::numbers::pi * t)).epsilon(1e-12));
}

TEST_CASE("find_positivity_radius: uniform and heat") {
  Grid g = Grid::torus(1, 128);

  auto u = ConvOperator(MeasureSpec::uniform(), g).find_positivity_radius(0.25, 4);
  CHECK(u.power == 1);
  CHECK(u.c_r == Approx(1.0).margin(1e-13));
  CHECK(u.k0 == Approx(1.0).margin(1e-13));

  const double t = 0.01;
  auto h = ConvOperator(MeasureSpec::heat(t), g).find_positivity_radius(0.25, 4);
  CHECK(h.power == 1);
  // min over the closed ball sits at the lattice point nearest +-0.25
  double mn = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.n(); ++i) {
    double x = g.position(i);
    double d = std::min(x, 1.0 - x);
    if (d <= 0.25) mn = std::min(mn, periodized_gauss(x, 2.0 * t));
  }
  CHECK(h.c_r == Approx(mn).epsilon(1e-12));
  CHECK(h.c_r > 0.9);
}

TEST_CASE("find_positivity_radius: mass spreading for the two-point measure") {
  Grid g = Grid::torus(1, 256);

  // wide mollification: one convolution already covers the gap at x = 0.25
  auto wide = ConvOperator(MeasureSpec::mollified_two_point(0.25, 1e-3), g)
                  .find_positivity_radius(0.4, 8);
  CHECK(wide.power == 1);
  const double oracle_gap = two_point_kernel(0.25, 0.25, 1e-3, 1);
  CHECK(wide.c_r > 0.5 * oracle_gap);
  CHECK(wide.c_r < 2.0 * oracle_gap);

  // tight mollification: the gap underflows for N = 1, more powers needed
  ConvOperator tight(MeasureSpec::mollified_two_point(0.25, 1e-5), g);
  auto got = tight.find_positivity_radius(0.4, 40);
  CHECK(got.power >= 2);
  CHECK(got.c_r > 0.0);
  try {
    tight.find_positivity_radius(0.4, got.power - 1);
    FAIL("expected positivity_radius_error");
  } catch (const positivity_radius_error& e) {
    REQUIRE(static_cast<int>(e.min_per_power.size()) == got.power - 1);
    for (double m : e.min_per_power) CHECK(m <= 0.0);
  }
}

TEST_CASE("operator: construction and argument errors") {
  Grid g = Grid::torus(1, 64);
  Grid w = Grid::windowed(1, 64, 1.0);
  ConvOperator op(MeasureSpec::heat(0.01), g);

  CHECK_THROWS_AS(ConvOperator(MeasureSpec::uniform(), w), precondition_error);
  CHECK_THROWS_AS(ConvOperator(MeasureSpec::mollified_two_point(0.25, 1e-3), Grid::torus(2, 16)),
                  precondition_error);
  GridFunction table(g);
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = (i == 0) ? 1.0 : 0.5;
  CHECK_THROWS_AS(ConvOperator(MeasureSpec::custom_table(table), w), precondition_error);

  CHECK_THROWS_AS(op.apply(GridFunction(Grid::torus(1, 32))), precondition_error);
  CHECK_THROWS_AS(op.kernel_power(0), precondition_error);
  CHECK_THROWS_AS(op.find_positivity_radius(0.0, 4), precondition_error);
  CHECK_THROWS_AS(op.find_positivity_radius(0.5, 4), precondition_error);
  CHECK_THROWS_AS(op.find_positivity_radius(0.25, 0), precondition_error);
}

TEST_CASE("smoothing_kappa: regression, endpoints, and monotonicity") {
  riesz::Region tri({{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}});
  riesz::Region square = riesz::Region::full_square();

  // ray from (1/2,1/2) through (0.6,0.4) exits tri at (1,0), i.e. theta = 0.8
  const double p = 1.0 / 0.6, q = 1.0 / 0.4;
  CHECK(smoothing_kappa(tri, 1.0, p, q) == Approx(0.8).margin(1e-9));
  CHECK(smoothing_kappa(tri, 3.0, p, q) == Approx(2.4).margin(1e-8));

  // the L^2 point interpolates against itself
  CHECK(smoothing_kappa(square, 2.5, 2.0, 2.0) == Approx(2.5).margin(1e-12));
  CHECK(smoothing_kappa(square, kInf, 2.0, 2.0) == kInf);
  CHECK(std::isinf(smoothing_kappa(tri, kInf, p, q)));

  // boundary point: no interpolation room
  riesz::Region dt = riesz::Region::decay_triangle(1.5, 3.0);
  CHECK(smoothing_kappa(dt, 1.0, 1.5, 3.0) == 0.0);

  // region monotonicity: pinching the lower vertex to (0.7,0.3) halves theta
  riesz::Region pinched({{0.0, 0.0}, {1.0, 1.0}, {0.7, 0.3}});
  const double inner_kappa = smoothing_kappa(pinched, 1.0, p, q);
  CHECK(inner_kappa == Approx(0.5).margin(1e-9));
  CHECK(inner_kappa <= smoothing_kappa(tri, 1.0, p, q));
  CHECK(smoothing_kappa(tri, 1.0, p, q) <= smoothing_kappa(square, 1.0, p, q));

  CHECK_THROWS_AS(smoothing_kappa(tri, 1.0, 1.0 / 0.3, 1.0 / 0.6), precondition_error);
  CHECK_THROWS_AS(smoothing_kappa(tri, 0.0, p, q), precondition_error);
  CHECK_THROWS_AS(smoothing_kappa(tri, 1.0, 0.9, 2.0), precondition_error);
}

TEST_CASE("smoothing_kappa: scan rows are audit-complete") {
  riesz::Region tri({{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}});
  std::vector<KappaScanRow> rows;
  const double kappa = smoothing_kappa(tri, 2.0, 1.0 / 0.6, 1.0 / 0.4, &rows);
  REQUIRE(rows.size() == 10000);
  double best = 0.0;
  for (const auto& r : rows) {
    CHECK(r.gain == Approx(r.theta * 2.0).margin(1e-15));
    if (r.feasible) best = std::max(best, r.gain);
  }
  CHECK(best == Approx(kappa).margin(1e-12));
  // feasibility is an interval from theta = 0: once lost it never returns
  bool seen_infeasible = false;
  for (const auto& r : rows) {
    if (!r.feasible) seen_infeasible = true;
    else CHECK_FALSE(seen_infeasible);
  }
}
