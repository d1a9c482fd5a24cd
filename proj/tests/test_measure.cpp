#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "convext/measure.hpp"

using namespace convext;
using Catch::Approx;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

GridFunction power_law_table(const Grid& g, double alpha) {
  GridFunction t(g);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double r2 = freq_index_norm2(g, i);
    t[i] = std::pow(1.0 + r2, -alpha / 2.0);
  }
  return t;
}
}  // namespace

TEST_CASE("multiplier: family formulas on the lattice") {
  Grid g = Grid::torus(1, 64);

  GridFunction u = multiplier(MeasureSpec::uniform(), g);
  CHECK(u[0] == std::complex<double>(1.0));
  for (std::size_t i = 1; i < u.size(); ++i) CHECK(u[i] == std::complex<double>(0.0));

  // heat at xi = 3
  GridFunction h = multiplier(MeasureSpec::heat(0.05), g);
  CHECK(h[3].real() == Approx(std::exp(-0.05 * kTwoPi * kTwoPi * 9.0)).epsilon(1e-14));
  CHECK(h[0].real() == 1.0);

  // two-point at xi = 2: cos(2 pi * 0.25 * 2) * exp(-1e-4 * (4 pi)^2)
  GridFunction tp = multiplier(MeasureSpec::mollified_two_point(0.25, 1e-4), g);
  const double expect = std::cos(kTwoPi * 0.25 * 2.0) *
                        std::exp(-1e-4 * kTwoPi * kTwoPi * 4.0);
  CHECK(tp[2].real() == Approx(expect).margin(1e-15));
  CHECK(tp[2].real() == Approx(-0.9843326).margin(1e-6));

  // total mass 1 and endpoint bound |sigma-hat| <= 1 across families
  Grid g2 = Grid::torus(2, 32);
  GridFunction sp = multiplier(MeasureSpec::mollified_sphere(0.25, 1e-3), g2);
  CHECK(sp[0].real() == 1.0);
  for (const auto& f : {h, tp}) {
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(f[i]) <= 1.0 + 1e-12);
  }
  for (std::size_t i = 0; i < sp.size(); ++i) CHECK(std::abs(sp[i]) <= 1.0 + 1e-12);
}

TEST_CASE("multiplier: dimension and domain restrictions") {
  CHECK_THROWS_AS(multiplier(MeasureSpec::mollified_two_point(0.25, 1e-4), Grid::torus(2, 16)),
                  precondition_error);
  CHECK_THROWS_AS(multiplier(MeasureSpec::mollified_sphere(0.25, 1e-3), Grid::torus(1, 16)),
                  precondition_error);
  CHECK_THROWS_AS(multiplier(MeasureSpec::uniform(), Grid::windowed(1, 16, 4.0)),
                  precondition_error);
  CHECK_THROWS_AS(MeasureSpec::heat(0.0), precondition_error);
}

TEST_CASE("custom table: validation and grid binding") {
  Grid g = Grid::torus(1, 64);
  GridFunction tab = power_law_table(g, 1.0);
  MeasureSpec spec = MeasureSpec::custom_table(tab);
  GridFunction m = multiplier(spec, g);
  CHECK(m[5] == tab[5]);
  CHECK_THROWS_AS(multiplier(spec, Grid::torus(1, 128)), precondition_error);

  GridFunction bad_mass(g);
  bad_mass[0] = 0.5;
  CHECK_THROWS_AS(MeasureSpec::custom_table(bad_mass), precondition_error);

  GridFunction bad_bound = power_law_table(g, 1.0);
  bad_bound[7] = 2.0;
  CHECK_THROWS_AS(MeasureSpec::custom_table(bad_bound), precondition_error);

  CHECK_THROWS_AS(MeasureSpec::custom_table(GridFunction(Grid::windowed(1, 8, 2.0))),
                  precondition_error);
}

TEST_CASE("verify_probability: haar, heat, two-point, and a signed table") {
  Grid g = Grid::torus(1, 128);

  auto haar = verify_probability(MeasureSpec::uniform(), g);
  CHECK(haar.mass == 1.0);
  CHECK(haar.min_density == Approx(1.0).margin(1e-12));
  CHECK(haar.ok);

  auto heat = verify_probability(MeasureSpec::heat(0.01), g);
  CHECK(heat.mass == 1.0);
  CHECK(heat.min_density > 0.0);
  CHECK(heat.ok);

  auto tp = verify_probability(MeasureSpec::mollified_two_point(0.25, 1e-4), Grid::torus(1, 256));
  CHECK(tp.ok);
  // the mollified atoms leave a genuinely real density
  GridFunction dens = inverse_transform(
      multiplier(MeasureSpec::mollified_two_point(0.25, 1e-4), Grid::torus(1, 256)));
  for (std::size_t i = 0; i < dens.size(); ++i) CHECK(std::fabs(dens[i].imag()) <= 1e-12);

  // indicator of {-1, 0, 1}: density 1 + 2 cos(2 pi x), dips to -1
  GridFunction ind(g);
  ind[0] = 1.0;
  ind[1] = 1.0;
  ind[g.size() - 1] = 1.0;
  auto signed_rep = verify_probability(MeasureSpec::custom_table(ind), g);
  CHECK(signed_rep.mass == 1.0);
  CHECK(signed_rep.min_density == Approx(-1.0).margin(1e-10));
  CHECK_FALSE(signed_rep.ok);
}

TEST_CASE("estimate_decay: sentinels and power-law fits") {
  // uniform: single nonzero coefficient, decay beats any floor
  auto u = estimate_decay(MeasureSpec::uniform(), Grid::torus(1, 256));
  CHECK(u.super_polynomial);
  CHECK(std::isinf(u.exponent));

  // heat: Gaussian decay dives under the floor well before the lattice edge
  auto h = estimate_decay(MeasureSpec::heat(0.01), Grid::torus(1, 256));
  CHECK(h.super_polynomial);
  CHECK(std::isinf(h.exponent));

  // <xi>^{-1} table: fitted exponent within 5% of 1 on a large grid
  Grid big = Grid::torus(1, 1024);
  auto fit1 = estimate_decay(MeasureSpec::custom_table(power_law_table(big, 1.0)), big);
  CHECK_FALSE(fit1.super_polynomial);
  CHECK(fit1.exponent == Approx(1.0).margin(0.05));
  CHECK(fit1.fit_quality > 0.99);

  auto fit2 = estimate_decay(MeasureSpec::custom_table(power_law_table(big, 2.0)), big);
  CHECK(fit2.exponent == Approx(2.0).margin(0.1));

  // too few shells
  CHECK_THROWS_AS(estimate_decay(MeasureSpec::heat(0.05), Grid::torus(1, 64)),
                  precondition_error);
}

TEST_CASE("support radii for windowed padding") {
  CHECK(MeasureSpec::heat(0.04).support_radius() == Approx(2.4));
  CHECK(MeasureSpec::mollified_two_point(0.25, 1e-4).support_radius() ==
        Approx(0.25 + 12.0 * 0.01));
  MeasureSpec heat = MeasureSpec::heat(0.04);
  heat.declared_support_radius = 1.0;
  CHECK(heat.support_radius() == 1.0);
  Grid g = Grid::torus(1, 8);
  CHECK_THROWS_AS(MeasureSpec::custom_table(multiplier(MeasureSpec::uniform(), g)).support_radius(),
                  precondition_error);
}
