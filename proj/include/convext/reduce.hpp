#pragma once

#include <complex>
#include <cstddef>
#include <utility>

namespace convext {

// Fixed-shape pairwise (binary tree) reductions. The summation tree depends
// only on the index range, never on thread count or partitioning, so every
// norm and inner product in the library is bitwise reproducible. Accuracy is
// also much better than left-to-right accumulation on the long sums the
// spectral code produces.

namespace detail {
constexpr std::size_t kPairwiseLeaf = 32;
}

// Sums term(i) for i in [lo, hi).
template <class Term>
double pairwise_sum(std::size_t lo, std::size_t hi, Term&& term) {
  const std::size_t len = hi - lo;
  if (len <= detail::kPairwiseLeaf) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = lo + len / 2;
  return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

template <class Term>
std::complex<double> pairwise_sum_complex(std::size_t lo, std::size_t hi,
                                          Term&& term) {
  const std::size_t len = hi - lo;
  if (len <= detail::kPairwiseLeaf) {
    std::complex<double> s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = lo + len / 2;
  return pairwise_sum_complex(lo, mid, term) +
         pairwise_sum_complex(mid, hi, term);
}

// Max with deterministic tie handling (first index wins).
template <class Term>
std::pair<double, std::size_t> pairwise_max(std::size_t lo, std::size_t hi,
                                            Term&& term) {
  double best = term(lo);
  std::size_t arg = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double v = term(i);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  return {best, arg};
}

}  // namespace convext
