#include "bubbelator/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bubbelator/charfn.hpp"
#include "bubbelator/errors.hpp"
#include "bubbelator/polyroots.hpp"

namespace bubbelator {

namespace {

constexpr double kPi = std::numbers::pi;

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double t_root(int j) {
  const double lo0 = (2 * j - 1) * kPi;
  double lo = lo0;
  double hi = lo0 + kPi / 2;
  auto g = [](double t) { return std::sin(t) - t * std::cos(t); };
  // g(lo) = lo > 0 and g(hi) = -1 < 0.
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 5; ++it) {
    const double dg = t * std::sin(t);
    const double step = g(t) / dg;
    if (!std::isfinite(step) || std::abs(step) > 1e-6) break;
    t -= step;
  }
  return t;
}

}  // namespace

std::vector<double> tan_eq_t_roots(int k_max) {
  if (k_max < 1) throw UsageError("k_max must be at least 1");
  std::vector<double> t(k_max);
  for (int j = 1; j <= k_max; ++j) t[j - 1] = t_root(j);
  return t;
}

double kappa_j0(int j) {
  if (j < 1) throw UsageError("branch index must be at least 1");
  const double t = t_root(j);
  return std::sqrt(std::sqrt(1.0 + t * t) - 1.0);
}

cplx refine_q_root(cplx z0, double kappa, int max_iter) {
  cplx z = z0;
  for (int it = 0; it < max_iter; ++it) {
    const CharfnValue q = q_of_z(z, kappa);
    const cplx step = q.value / q.derivative;
    if (!finite(step)) throw NumericError("Newton on Q produced a non-finite step");
    z -= step;
    if (std::abs(step) <= 1e-14 * (1.0 + std::abs(z))) return z;
  }
  const CharfnValue q = q_of_z(z, kappa);
  if (std::abs(q.value) <= 1e-12 * q.term_scale) return z;
  throw NumericError("Newton on Q did not converge");
}

cplx q_root_tangent(cplx z, double kappa) {
  const double w = kappa * kappa;
  const cplx dz_dw = z / (w * (2.0 + (w + z * z) / (1.0 + z)));
  return 2.0 * kappa * dz_dw;
}

QRootCurve q_root_curve(int j, std::span<const double> kappa_grid) {
  if (!std::is_sorted(kappa_grid.begin(), kappa_grid.end())) {
    throw UsageError("kappa grid must be sorted ascending");
  }
  if (!kappa_grid.empty() && !(kappa_grid.front() > 0.0)) {
    throw UsageError("kappa grid must be positive");
  }
  QRootCurve curve;
  curve.j = j;
  curve.t_j = t_root(j);
  curve.kappa_j0 = kappa_j0(j);

  const cplx anchor(0.0, curve.t_j);
  constexpr double kMaxStep = 0.05;

  // Continue from (k_from, z_from) to k_to with adaptive sub-steps.
  auto advance = [&](double k_from, cplx z_from, double k_to) {
    double k = k_from;
    cplx z = z_from;
    double h = std::clamp(k_to - k_from, -kMaxStep, kMaxStep);
    int halvings = 0;
    while (k != k_to) {
      if (std::abs(k_to - k) < std::abs(h)) h = k_to - k;
      const cplx pred = z + h * q_root_tangent(z, k);
      try {
        const cplx corr = refine_q_root(pred, k + h, 30);
        const double pred_len = std::abs(pred - z);
        if (corr.imag() <= 0.0 || std::abs(corr - pred) > 0.5 * pred_len + 1e-10) {
          throw NumericError("corrector left the branch");
        }
        k += h;
        z = corr;
        halvings = 0;
      } catch (const NumericError&) {
        if (++halvings > 30) {
          throw ContinuationError("Q-root continuation failed", k, z);
        }
        h *= 0.5;
      }
    }
    return z;
  };

  std::vector<QRootSample> below, above;
  {
    double k = curve.kappa_j0;
    cplx z = anchor;
    for (auto it = kappa_grid.rbegin(); it != kappa_grid.rend(); ++it) {
      if (*it >= curve.kappa_j0) continue;
      z = advance(k, z, *it);
      k = *it;
      below.push_back({k, z, q_root_tangent(z, k)});
    }
  }
  {
    double k = curve.kappa_j0;
    cplx z = anchor;
    for (double target : kappa_grid) {
      if (target < curve.kappa_j0) continue;
      z = target == curve.kappa_j0 ? anchor : advance(k, z, target);
      k = target;
      above.push_back({k, z, q_root_tangent(z, k)});
    }
  }
  curve.samples.assign(below.rbegin(), below.rend());
  curve.samples.insert(curve.samples.end(), above.begin(), above.end());
  for (const auto& s : above) {
    if (!(s.dz_dkappa.real() > 0.0 && s.dz_dkappa.imag() > 0.0)) {
      curve.monotone_after_crossing = false;
    }
  }
  return curve;
}

bool is_spurious_phi(const ModelParams& p, cplx phi, double tol) {
  const double A = p.A();
  const double r = 1.0 / std::sqrt(A);
  for (double s : {1.0, 1.0 / A, r, -r}) {
    if (std::abs(phi - s) <= tol) return true;
  }
  return false;
}

namespace {

// Newton ratio q/q' for q(phi) = phi^M F(phi) / ((phi-1)^2 (A phi-1)^2 (A phi^2-1)).
cplx deflated_ratio(const ModelParams& p, cplx phi) {
  const double A = p.A();
  const CharfnValue f = f_of_phi_scaled(p, phi);
  if (f.value == cplx(0.0, 0.0)) return {0.0, 0.0};
  const cplx log_deriv = static_cast<double>(p.M()) / phi + f.derivative / f.value -
                         2.0 / (phi - 1.0) - 2.0 * A / (A * phi - 1.0) -
                         2.0 * A * phi / (A * phi * phi - 1.0);
  return 1.0 / log_deriv;
}

std::vector<cplx> initial_guesses(const ModelParams& p, double offset) {
  const int M = p.M();
  const double A = p.A();
  std::vector<cplx> outer;
  outer.reserve(M - 1);
  const int ring = M - 2;
  for (int k = 0; k < ring; ++k) {
    const double theta = 2.0 * kPi * (k + 0.5) / ring + offset / M;
    outer.push_back(std::polar(1.0 + 0.5 / M, theta));
  }
  outer.emplace_back(-static_cast<double>(M), 0.1);
  std::vector<cplx> all = outer;
  for (const cplx& z : outer) all.push_back(1.0 / (A * z) * std::polar(1.0, 0.37 / M));
  return all;
}

void polish_root(const ModelParams& p, cplx& phi) {
  for (int it = 0; it < 3; ++it) {
    const CharfnValue f = f_of_phi_scaled(p, phi);
    if (f.value == cplx(0.0, 0.0)) return;
    const cplx step = f.value / f.derivative;
    if (!finite(step) || std::abs(step) > 1e-8 * (1.0 + std::abs(phi))) return;
    phi -= step;
  }
}

FRoots find_once(const ModelParams& p, double offset) {
  const int M = p.M();
  const double A = p.A();
  FRoots out;

  auto ratio = [&](cplx z) { return deflated_ratio(p, z); };
  auto res = aberth<double>(initial_guesses(p, offset), ratio, 1000, 1e-13);
  out.iterations = res.iterations;
  std::vector<cplx> roots = res.roots;
  for (auto& r : roots) polish_root(p, r);

  // Pair each root with the unused root nearest its image 1/(A phi), visiting
  // roots in order of decreasing modulus so that the outer root leads.
  const std::size_t n = roots.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(roots[a]);
    const double mb = std::abs(roots[b]);
    if (ma != mb) return ma > mb;
    return roots[a].imag() > roots[b].imag();
  });
  std::vector<bool> used(n, false);
  double worst_pairing = 0.0;

  RootRecord zero;
  zero.phi = 1.0;
  zero.partner = 1.0 / A;
  zero.lambda = 0.0;
  zero.residual = 0.0;
  zero.simple = true;
  zero.spurious = false;
  out.representatives.push_back(zero);

  for (std::size_t oi : order) {
    if (used[oi]) continue;
    used[oi] = true;
    const cplx target = 1.0 / (A * roots[oi]);
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(roots[j] - target);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == n) break;
    used[best] = true;
    worst_pairing = std::max(worst_pairing, best_d / (1.0 + std::abs(target)));

    RootRecord rec;
    rec.phi = roots[oi];
    rec.partner = roots[best];
    rec.lambda = lambda_of_phi(p, rec.phi);
    const CharfnValue f = f_of_phi_scaled(p, rec.phi);
    rec.residual = f.term_scale > 0.0 ? std::abs(f.value) / f.term_scale : 0.0;
    rec.spurious = is_spurious_phi(p, rec.phi);
    // A pair that collapses onto +-A^{-1/2} is the degenerate case, where F'
    // vanishes by construction; simplicity is not claimed there.
    const bool degenerate = std::abs(rec.phi - rec.partner) <= 1e-6 * (1.0 + std::abs(rec.phi));
    rec.simple = !degenerate && std::abs(f.derivative) > 1e-6 * f.derivative_scale;
    out.representatives.push_back(rec);
  }

  const std::size_t expected = static_cast<std::size_t>(M);
  if (!res.all_converged) {
    out.complete = false;
    out.warning = "Aberth iteration did not converge for all roots";
  } else if (worst_pairing > 1e-6) {
    out.complete = false;
    out.warning = "root pairing mismatch " + std::to_string(worst_pairing);
  } else if (out.representatives.size() != expected) {
    out.complete = false;
    out.warning = "recovered " + std::to_string(out.representatives.size()) + " of " +
                  std::to_string(expected) + " eigenvalues";
  }
  return out;
}

}  // namespace

FRoots f_roots(const ModelParams& p) {
  FRoots first = find_once(p, 0.3);
  if (first.complete) return first;
  FRoots second = find_once(p, 0.77);
  if (second.complete) return second;
  second.warning = "incomplete spectrum after retry: " + second.warning;
  return second;
}

SpectrumResult spectrum_via_F(const ModelParams& p) {
  const FRoots roots = f_roots(p);
  SpectrumResult out;
  out.complete = roots.complete;
  out.warning = roots.warning;
  for (const auto& r : roots.representatives) {
    SpectrumEntry e;
    e.lambda = r.lambda;
    e.phi = r.phi;
    e.simple = r.simple;
    out.eigenvalues.push_back(e);
  }
  classify(out);
  return out;
}

int count_unstable_pairs(const ModelParams& p) { return spectrum_via_F(p).unstable_pairs; }

}  // namespace bubbelator
