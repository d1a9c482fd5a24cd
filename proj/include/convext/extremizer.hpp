#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "convext/conv_operator.hpp"
#include "convext/grid.hpp"
#include "convext/riesz.hpp"
#include "convext/rng.hpp"

namespace convext {

enum class InitKind { constant = 0, random_positive = 1, user_supplied = 2 };

struct SolverConfig {
  explicit SolverConfig(riesz::ExponentPair pq) : pair(pq) {}

  riesz::ExponentPair pair;
  int max_iter = 500;
  double rel_tol = 1e-9;
  int restarts = 4;
  std::uint64_t seed = 1;
  InitKind init = InitKind::constant;
  std::optional<GridFunction> user_init;

  void validate(const Grid& grid) const {
    if (max_iter < 1) throw precondition_error("solver: max_iter must be >= 1");
    if (!(rel_tol > 0.0)) throw precondition_error("solver: rel_tol must be positive");
    if (restarts < 1) throw precondition_error("solver: restarts must be >= 1");
    if (init == InitKind::user_supplied) {
      if (!user_init) throw precondition_error("solver: user init selected but none given");
      if (user_init->grid() != grid)
        throw precondition_error("solver: user init lives on the wrong grid");
    }
  }
};

struct HistoryRow {
  int iter = 0;
  double phi = 0.0;
  double step = 0.0;
};

struct ExtremizerResult {
  explicit ExtremizerResult(GridFunction f0) : f(std::move(f0)) {}

  GridFunction f;
  double phi = 0.0;
  double norm_estimate = 0.0;  // best phi seen during the run
  double el_residual = 0.0;
  std::vector<HistoryRow> history;
  bool converged = false;
};

inline GridFunction normalize_p(const GridFunction& f, double p) {
  const double n = lp_norm(f, p);
  if (!(n > 0.0) || !std::isfinite(n))
    throw numeric_error("normalize: input has zero or non-finite norm");
  GridFunction out = f;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= n;
  return out;
}

// Rayleigh quotient ||Tf||_q / ||f||_p
inline double functional(const ConvOperator& op, const riesz::ExponentPair& pair,
                         const GridFunction& f) {
  const double nf = lp_norm(f, pair.p);
  if (nf == 0.0) throw precondition_error("functional: input is identically zero");
  return lp_norm(op.apply(f), pair.q) / nf;
}

namespace detail {

// real part clamped at 0, then raised to e; discretization can push values a
// hair below zero and fractional powers must not see that
inline GridFunction clamped_real_pow(const GridFunction& f, double e) {
  GridFunction out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = std::max(f[i].real(), 0.0);
    out[i] = std::pow(v, e);
  }
  if (!all_finite(out))
    throw numeric_error("el_map: power overflow, rescale the input");
  return out;
}

inline void require_nonneg(const GridFunction& f, const char* who) {
  const double scale = max_abs(f) + 1e-300;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].real() < -1e-12 * scale || std::fabs(f[i].imag()) > 1e-12 * scale)
      throw precondition_error(std::string(who) + ": input must be nonnegative");
  }
}

}  // namespace detail

// One Euler-Lagrange application, f |-> norm_scale^{-q/(p-1)} (T*(Tf)^{q-1})^{1/(p-1)}.
// A fixed point of this map with norm_scale equal to the operator norm is a
// critical point of the Rayleigh quotient.
inline GridFunction el_map(const ConvOperator& op, const riesz::ExponentPair& pair,
                           const GridFunction& f, double norm_scale) {
  if (!(norm_scale > 0.0) || !std::isfinite(norm_scale))
    throw precondition_error("el_map: norm_scale must be positive and finite");
  detail::require_nonneg(f, "el_map");
  GridFunction u = op.apply(f);
  GridFunction v = detail::clamped_real_pow(u, pair.q - 1.0);
  GridFunction w = op.apply_adjoint(v);
  GridFunction x = detail::clamped_real_pow(w, 1.0 / (pair.p - 1.0));
  const double c = std::pow(norm_scale, -pair.q / (pair.p - 1.0));
  if (!std::isfinite(c)) throw numeric_error("el_map: norm_scale power overflow");
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= c;
  return x;
}

// Normalized fixed-point ascent (nonlinear power method). phi is logged every
// iteration; monotone growth is observed in practice but never assumed, and
// any decrease is visible in the returned history.
inline ExtremizerResult ascend(const ConvOperator& op, const SolverConfig& cfg) {
  cfg.validate(op.grid());
  const double p = cfg.pair.p, q = cfg.pair.q;

  GridFunction g(op.grid());
  switch (cfg.init) {
    case InitKind::constant:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = 1.0;
      break;
    case InitKind::random_positive: {
      SplitMix64 rng(cfg.seed);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = 1.0 - rng.next_double();
      break;
    }
    case InitKind::user_supplied:
      detail::require_nonneg(*cfg.user_init, "ascend");
      g = *cfg.user_init;
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = std::max(g[i].real(), 0.0);
      break;
  }
  g = normalize_p(g, p);

  ExtremizerResult res{GridFunction(op.grid())};
  GridFunction u = op.apply(g);
  double phi = lp_norm(u, q);
  if (!std::isfinite(phi)) throw numeric_error("ascend: iteration diverged");
  res.history.push_back({0, phi, 0.0});
  res.norm_estimate = phi;

  for (int k = 1; k <= cfg.max_iter; ++k) {
    GridFunction v = detail::clamped_real_pow(u, q - 1.0);
    GridFunction w = op.apply_adjoint(v);
    GridFunction x = detail::clamped_real_pow(w, 1.0 / (p - 1.0));
    GridFunction next = normalize_p(x, p);

    double step_acc = 0.0;
    {
      GridFunction diff = next - g;
      step_acc = lp_norm(diff, p);
    }
    u = op.apply(next);
    const double phi_next = lp_norm(u, q);
    if (!std::isfinite(phi_next)) throw numeric_error("ascend: iteration diverged");
    res.history.push_back({k, phi_next, step_acc});
    res.norm_estimate = std::max(res.norm_estimate, phi_next);

    const bool done =
        std::fabs(phi_next - phi) <= cfg.rel_tol * phi && step_acc <= cfg.rel_tol;
    g = std::move(next);
    phi = phi_next;
    if (done) {
      res.converged = true;
      break;
    }
  }

  res.f = g;
  res.phi = phi;
  // residual of the unnormalized equation, with the best norm stand-in we
  // have: the final Rayleigh value itself
  GridFunction back = el_map(op, cfg.pair, g, phi);
  res.el_residual = lp_norm(g - back, p);
  return res;
}

struct NormEstimate {
  double norm = 0.0;
  ExtremizerResult best;
  int best_restart = 0;
};

// Best ascend over a constant init plus restarts-1 random positive inits.
// Restart j always uses derive_seed(cfg.seed, j), and the merge scans by
// index, so the answer does not depend on the thread count.
inline NormEstimate estimate_norm(const ConvOperator& op, const SolverConfig& cfg,
                                  int threads = 0) {
  cfg.validate(op.grid());
  const int r = cfg.restarts;
  int nt = threads;
  if (nt <= 0) nt = static_cast<int>(std::thread::hardware_concurrency());
  nt = std::clamp(nt, 1, r);

  std::vector<std::optional<ExtremizerResult>> results(r);
  std::vector<std::string> failures(r);
  std::vector<std::string> hard_errors(r);

  auto worker = [&](int t) {
    for (int j = t; j < r; j += nt) {
      SolverConfig local = cfg;
      local.init = (j == 0) ? InitKind::constant : InitKind::random_positive;
      local.user_init.reset();
      local.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(j));
      try {
        results[j] = ascend(op, local);
      } catch (const numeric_error& e) {
        failures[j] = e.what();
      } catch (const std::exception& e) {
        hard_errors[j] = e.what();
      }
    }
  };

  if (nt == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  for (int j = 0; j < r; ++j) {
    if (!hard_errors[j].empty())
      throw precondition_error("estimate_norm restart " + std::to_string(j) + ": " +
                               hard_errors[j]);
  }

  int best = -1;
  for (int j = 0; j < r; ++j) {
    if (!results[j]) continue;
    if (best < 0 || results[j]->phi > results[best]->phi) best = j;
  }
  if (best < 0)
    throw numeric_error("estimate_norm: all restarts diverged (" + failures[0] + ")");

  NormEstimate out{results[best]->phi, std::move(*results[best]), best};
  out.best.norm_estimate = out.norm;
  return out;
}

struct BruteForceResult {
  double value = 0.0;
  GridFunction f;
};

// Projected gradient ascent on the unit p-sphere over complex-valued f, with
// central finite differences. Deliberately independent of the fixed-point
// machinery above so the two can cross-check each other. Only sized for tiny
// grids; the cost is restarts * steps * (2 * points + 1) operator applies.
inline BruteForceResult brute_force_norm(const ConvOperator& op,
                                         const riesz::ExponentPair& pair,
                                         int restarts, std::uint64_t seed) {
  const Grid& g = op.grid();
  if (g.n() > 8 || g.dim() > 2)
    throw precondition_error("brute_force_norm: oracle only runs on grids up to 8^2");
  if (restarts < 1) throw precondition_error("brute_force_norm: restarts must be >= 1");

  auto phi = [&](const GridFunction& f) {
    const double nf = lp_norm(f, pair.p);
    if (!(nf > 0.0)) return 0.0;
    return lp_norm(op.apply(f), pair.q) / nf;
  };

  BruteForceResult best{0.0, GridFunction(g)};
  for (int r = 0; r < restarts; ++r) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    GridFunction f(g);
    if (r == 0) {
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0;
    } else if (r % 2 == 1) {
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.next_normal();
    } else {
      for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = {rng.next_normal(), rng.next_normal()};
    }
    f = normalize_p(f, pair.p);
    double val = phi(f);

    double eta = 0.1;
    GridFunction grad(g);
    for (int it = 0; it < 400 && eta > 1e-11; ++it) {
      const double fd = 1e-6;
      GridFunction probe = f;
      for (std::size_t i = 0; i < f.size(); ++i) {
        probe[i] = f[i] + fd;
        const double up_re = phi(probe);
        probe[i] = f[i] - fd;
        const double dn_re = phi(probe);
        probe[i] = f[i] + std::complex<double>(0.0, fd);
        const double up_im = phi(probe);
        probe[i] = f[i] - std::complex<double>(0.0, fd);
        const double dn_im = phi(probe);
        probe[i] = f[i];
        grad[i] = {(up_re - dn_re) / (2 * fd), (up_im - dn_im) / (2 * fd)};
      }
      GridFunction trial = f + eta * grad;
      const double tn = lp_norm(trial, pair.p);
      if (!(tn > 0.0)) break;
      trial = normalize_p(trial, pair.p);
      const double tval = phi(trial);
      if (tval > val) {
        f = std::move(trial);
        val = tval;
        eta *= 1.5;
      } else {
        eta *= 0.5;
      }
    }
    if (val > best.value) best = {val, f};
  }
  return best;
}

}  // namespace convext
