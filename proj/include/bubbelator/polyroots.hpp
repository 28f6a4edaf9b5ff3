#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

namespace bubbelator {

template <class T>
struct AberthResult {
  std::vector<std::complex<T>> roots;
  std::vector<bool> converged;
  int iterations = 0;
  bool all_converged = false;
};

/// Aberth-Ehrlich simultaneous iteration (Gauss-Seidel sweep).
///
/// `newton_ratio(z)` must return p(z)/p'(z) for the function whose zeros are
/// sought. The function need not be a polynomial given by coefficients: any
/// p whose zero count equals z.size() works, which is how the characteristic
/// function is handled without expanding it.
template <class T, class Ratio>
AberthResult<T> aberth(std::vector<std::complex<T>> start, Ratio&& newton_ratio, int max_iter,
                       T tol) {
  using C = std::complex<T>;
  const std::size_t n = start.size();
  AberthResult<T> res;
  res.roots = std::move(start);
  res.converged.assign(n, false);
  auto& z = res.roots;
  std::size_t done = 0;
  int it = 0;
  for (; it < max_iter && done < n; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      if (res.converged[i]) continue;
      const C ratio = newton_ratio(z[i]);
      if (ratio == C(0)) {
        res.converged[i] = true;
        ++done;
        continue;
      }
      C s(0);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) s += T(1) / (z[i] - z[j]);
      }
      const C w = ratio / (T(1) - ratio * s);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) continue;
      z[i] -= w;
      if (std::abs(w) <= tol * (T(1) + std::abs(z[i]))) {
        res.converged[i] = true;
        ++done;
      }
    }
  }
  res.iterations = it;
  res.all_converged = done == n;
  return res;
}

/// Coefficients c[0..n] of p(x) = sum c[k] x^k. Returns p(x)/p'(x).
template <class T>
std::complex<T> horner_ratio(const std::vector<T>& c, std::complex<T> x) {
  using C = std::complex<T>;
  C p(c.back());
  C dp(0);
  for (std::size_t k = c.size() - 1; k-- > 0;) {
    dp = dp * x + p;
    p = p * x + c[k];
  }
  if (p == C(0)) return C(0);
  return p / dp;
}

/// All complex roots of a real polynomial given by ascending coefficients.
template <class T>
AberthResult<T> polynomial_roots(const std::vector<T>& c, int max_iter = 2000) {
  using C = std::complex<T>;
  const std::size_t n = c.size() - 1;
  // Start on a circle whose radius is the geometric mean of a Fujiwara-type
  // bound, rotated off the real axis so that conjugate pairs can separate.
  T bound(0);
  for (std::size_t k = 0; k < n; ++k) {
    const T r = std::pow(std::abs(c[k] / c[n]), T(1) / T(n - k));
    bound = std::max(bound, r);
  }
  const T radius = bound > T(0) ? bound / T(2) : T(1);
  std::vector<C> start(n);
  for (std::size_t k = 0; k < n; ++k) {
    const T angle = T(2) * std::numbers::pi_v<T> * (T(k) + T(0.25)) / T(n) + T(0.4);
    start[k] = std::polar(radius, angle);
  }
  auto ratio = [&](C x) { return horner_ratio(c, x); };
  auto res = aberth<T>(std::move(start), ratio, max_iter,
                       T(1e-14));
  // Two extra Newton steps on the converged roots.
  for (auto& x : res.roots) {
    for (int k = 0; k < 2; ++k) {
      const C r = ratio(x);
      if (std::abs(r) < T(1e-6) * (T(1) + std::abs(x))) x -= r;
    }
  }
  return res;
}

}  // namespace bubbelator
