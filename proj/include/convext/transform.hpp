#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "convext/grid.hpp"

namespace convext {

// Discrete Fourier pair used throughout:
//   forward:  F(xi) = h^d sum_x f(x) exp(-2 pi i xi.x / period)
//   inverse:  f(x)  = period^{-d} sum_xi F(xi) exp(+2 pi i xi.x / period)
// Frequency data stays in natural transform order; Grid::freq maps an index
// to the centered component in [-n/2, n/2) (Nyquist row at -n/2).
//
// FFTW supplies the raw transforms. Plans are built once per shape with
// FFTW_ESTIMATE (deterministic, no self-tuning) and FFTW_UNALIGNED so the
// new-array execute calls accept any buffer; creation is serialized behind a
// mutex while execution is safe from concurrent worker threads.

namespace detail {

class PlanCache {
 public:
  struct Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
  };

  static const Plans& get(const std::vector<int>& dims) {
    static PlanCache cache;
    std::lock_guard<std::mutex> lock(cache.mu_);
    auto it = cache.plans_.find(dims);
    if (it != cache.plans_.end()) return it->second;

    std::size_t total = 1;
    for (int n : dims) total *= static_cast<std::size_t>(n);
    std::vector<std::complex<double>> a(total), b(total);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans p;
    p.fwd = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), in, out,
                          FFTW_FORWARD, flags);
    p.bwd = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), in, out,
                          FFTW_BACKWARD, flags);
    if (!p.fwd || !p.bwd)
      throw numeric_error("transform: FFTW plan creation failed");
    return cache.plans_.emplace(dims, p).first->second;
  }

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [dims, p] : plans_) {
      fftw_destroy_plan(p.fwd);
      fftw_destroy_plan(p.bwd);
    }
  }
  std::mutex mu_;
  std::map<std::vector<int>, Plans> plans_;
};

inline void run_dft(const Grid& g, const std::vector<std::complex<double>>& in,
                    std::vector<std::complex<double>>& out, bool forward) {
  std::vector<int> dims(g.dim(), g.n());
  const auto& plans = PlanCache::get(dims);
  out.resize(in.size());
  // new-array execute; in is not modified by out-of-place c2c transforms
  auto* ip = reinterpret_cast<fftw_complex*>(
      const_cast<std::complex<double>*>(in.data()));
  auto* op = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(forward ? plans.fwd : plans.bwd, ip, op);
}

}  // namespace detail

inline GridFunction forward_transform(const GridFunction& f) {
  const Grid& g = f.grid();
  std::vector<std::complex<double>> out;
  detail::run_dft(g, f.values(), out, true);
  const double scale = std::pow(g.spacing(), g.dim());
  for (auto& z : out) z *= scale;
  return GridFunction(g, std::move(out));
}

inline GridFunction inverse_transform(const GridFunction& F) {
  const Grid& g = F.grid();
  std::vector<std::complex<double>> out;
  detail::run_dft(g, F.values(), out, false);
  // 1/(h^d n^d): cancels the forward h^d exactly on a round trip
  double scale = 1.0;
  for (int i = 0; i < g.dim(); ++i) scale *= g.spacing() * g.n();
  scale = 1.0 / scale;
  for (auto& z : out) z *= scale;
  return GridFunction(g, std::move(out));
}

// Squared Euclidean length of the centered integer frequency tuple at a flat
// transform index.
inline double freq_index_norm2(const Grid& g, std::size_t flat) {
  double s = 0.0;
  for (int ax = g.dim() - 1; ax >= 0; --ax) {
    int k = static_cast<int>(flat % g.n());
    flat /= g.n();
    double c = g.freq(k);
    s += c * c;
  }
  return s;
}

// Bessel potential <xi>^s = (1 + |xi|^2)^{s/2} over the integer frequency
// lattice. s = 0 is the identity, exactly.
inline GridFunction bessel_apply(const GridFunction& f, double s) {
  if (s == 0.0) return f;
  GridFunction F = forward_transform(f);
  for (std::size_t i = 0; i < F.size(); ++i)
    F[i] *= std::pow(1.0 + freq_index_norm2(f.grid(), i), 0.5 * s);
  return inverse_transform(F);
}

inline double sobolev_norm(const GridFunction& f, double s, double p) {
  if (s == 0.0) return lp_norm(f, p);
  return lp_norm(bessel_apply(f, s), p);
}

}  // namespace convext
