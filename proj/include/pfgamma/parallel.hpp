#pragma once

// Worker pool helpers. Every reduction in the library first materializes
// per-item values and then sums them with pairwise_sum, so results do not
// depend on the number of workers.

#include <algorithm>
#include <cstddef>
#include <cmath>
#include <cstdlib>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace pfgamma {

/// Worker count from PFGAMMA_THREADS (default 1).
inline unsigned worker_count() {
  if (const char* env = std::getenv("PFGAMMA_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<unsigned>(std::min<long>(n, 256));
    } catch (...) {
    }
  }
  return 1;
}

/// Runs body(i) for i in [0, n), split into contiguous chunks over workers.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, unsigned workers = worker_count()) {
  if (workers <= 1 || n < 2048) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
}

/// Pairwise (tree) summation; fixed association order for a given length.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

/// Sum over i of x[i * stride + offset], pairwise.
inline double pairwise_sum_strided(std::span<const double> x, std::size_t stride,
                                   std::size_t offset) {
  const std::size_t n = x.size() / stride;
  std::vector<double> tmp(n);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i * stride + offset];
  return pairwise_sum(tmp);
}

inline double norm2(std::span<const double> x) {
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
  return std::sqrt(pairwise_sum(sq));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  std::vector<double> p(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] * b[i];
  return pairwise_sum(p);
}

}  // namespace pfgamma
