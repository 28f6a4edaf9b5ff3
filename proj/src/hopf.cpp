#include "bubbelator/hopf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "bubbelator/errors.hpp"
#include "bubbelator/roots.hpp"

namespace bubbelator {

namespace {

using Vec3 = Eigen::Vector3d;

// Residual of the crossing system in the rescaled variables:
// (Re, Im) of K^-3 F(1 + z/M) and Re of M lambda / K.
Vec3 crossing_residual(int M, const Vec3& x) {
  const ModelParams p = ModelParams::from_kappa(M, x(2));
  const cplx z(x(0), x(1));
  const cplx q = qeps_of_z(p, z);
  const cplx big_lambda = rescaled_lambda_of_z(p, z);
  return {q.real(), q.imag(), big_lambda.real()};
}

bool near_spurious_z(int M, double kappa, cplx z) {
  const ModelParams p = ModelParams::from_kappa(M, kappa);
  // phi = 1 is a double root for every kappa and satisfies Re lambda = 0
  // trivially; the tolerance is in z, i.e. relative to the 1/M root spacing.
  return std::abs(z) < 1e-3 || is_spurious_phi(p, 1.0 + z / static_cast<double>(M), 1e-6);
}

struct NewtonOutcome {
  Vec3 x;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

NewtonOutcome crossing_newton(int M, Vec3 x, int max_iter = 60) {
  NewtonOutcome out;
  Vec3 r = crossing_residual(M, x);
  double rn = r.norm();
  out.x = x;
  out.residual = rn;
  for (int it = 1; it <= max_iter; ++it) {
    out.iterations = it;
    Eigen::Matrix3d J;
    for (int c = 0; c < 3; ++c) {
      Vec3 xh = x;
      const double h = 1e-7 * (1.0 + std::abs(x(c)));
      xh(c) += h;
      J.col(c) = (crossing_residual(M, xh) - r) / h;
    }
    const Vec3 step = J.fullPivLu().solve(-r);
    if (!step.allFinite()) break;
    // Damping: halve until the residual decreases and kappa stays positive.
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      Vec3 xt = x + t * step;
      if (xt(2) <= 0.0) continue;
      Vec3 rt;
      try {
        rt = crossing_residual(M, xt);
      } catch (const DomainError&) {
        continue;
      }
      if (rt.allFinite() && rt.norm() < rn) {
        x = xt;
        r = rt;
        rn = rt.norm();
        accepted = true;
        break;
      }
    }
    out.x = x;
    out.residual = rn;
    if (!accepted || (t * step).norm() <= 1e-14 * (1.0 + x.norm()) || rn < 1e-15) {
      out.converged = rn < 1e-11;
      break;
    }
  }
  out.converged = out.converged || out.residual < 1e-11;
  return out;
}

HopfPoint finish(int M, int j, const NewtonOutcome& n) {
  HopfPoint h;
  h.M = M;
  h.j = j;
  h.kappa = n.x(2);
  const ModelParams p = ModelParams::from_kappa(M, h.kappa);
  h.K = p.K();
  h.z = cplx(n.x(0), std::abs(n.x(1)));
  h.phi = 1.0 + h.z / static_cast<double>(M);
  h.lambda = lambda_of_z(p, h.z);
  h.omega = h.lambda.imag();
  const CharfnValue f = f_of_z(p, h.z);
  h.residual_F = std::abs(f.value) / f.term_scale;
  h.residual_re_lambda = std::abs(h.lambda.real()) / std::abs(h.lambda);
  h.simple = std::abs(f.derivative) > 1e-6 * f.derivative_scale;
  h.iterations = n.iterations;
  return h;
}

bool acceptable(int M, const NewtonOutcome& n) {
  return n.converged && n.x(2) > 0.0 && std::abs(n.x(1)) > 0.0 &&
         !near_spurious_z(M, n.x(2), cplx(n.x(0), n.x(1)));
}

// Root of K^-3 F(1 + z/M) in z at fixed kappa, Newton from z0.
cplx refine_qeps_root(const ModelParams& p, cplx z0, int max_iter = 60) {
  cplx z = z0;
  for (int it = 0; it < max_iter; ++it) {
    const CharfnValue v = qeps_with_derivative(p, z);
    const cplx step = v.value / v.derivative;
    if (!std::isfinite(std::abs(step))) break;
    z -= step;
    if (std::abs(step) <= 1e-14 * (1.0 + std::abs(z))) return z;
  }
  const CharfnValue v = qeps_with_derivative(p, z);
  if (std::abs(v.value) <= 1e-11 * v.term_scale) return z;
  throw NumericError("Newton on K^-3 F(1 + z/M) did not converge");
}

cplx kappa_derivative(int M, double kappa, cplx z) {
  const double h = 1e-6 * kappa;
  const ModelParams p0 = ModelParams::from_kappa(M, kappa);
  const ModelParams p1 = ModelParams::from_kappa(M, kappa + h);
  const CharfnValue v = qeps_with_derivative(p0, z);
  const cplx dq_dkappa = (qeps_of_z(p1, z) - v.value) / h;
  return -dq_dkappa / v.derivative;
}

// Continues a branch from (kappa0, z0) to kappa1 in sub-steps of at most 0.05.
cplx continue_branch(int M, double kappa0, cplx z0, double kappa1) {
  double kappa = kappa0;
  cplx z = z0;
  double h_max = 0.05;
  while (kappa != kappa1) {
    double h = std::clamp(kappa1 - kappa, -h_max, h_max);
    for (;;) {
      const cplx pred_step = kappa_derivative(M, kappa, z) * h;
      const ModelParams p = ModelParams::from_kappa(M, kappa + h);
      cplx zn;
      bool ok = true;
      try {
        zn = refine_qeps_root(p, z + pred_step);
      } catch (const NumericError&) {
        ok = false;
      }
      if (ok && std::abs(zn - z) <= 10.0 * std::abs(pred_step) + 1e-12 * (1.0 + std::abs(z)) &&
          !near_spurious_z(M, kappa + h, zn)) {
        kappa = (std::abs(kappa1 - (kappa + h)) < 1e-15 * kappa1) ? kappa1 : kappa + h;
        z = zn;
        break;
      }
      h *= 0.5;
      if (std::abs(h) < 1e-6) throw ContinuationError("eigenvalue branch jumped or was lost", kappa, z);
    }
  }
  return z;
}

// Anchor for branch j: the root near i t_j at kappa_j0, which for moderate M
// may be displaced from i t_j; it is reached by continuing the Q root in the
// homotopy between Q and K^-3 F.
cplx branch_anchor(int M, int j) {
  const double kappa0 = kappa_j0(j);
  const double t = tan_eq_t_roots(j).back();
  const ModelParams p = ModelParams::from_kappa(M, kappa0);
  return refine_qeps_root(p, cplx(0.0, t));
}

}  // namespace

LambdaBranch lambda_branch(int M, int j, std::span<const double> kappa_grid) {
  if (M < 3 || j < 1) throw UsageError("lambda_branch requires M >= 3 and j >= 1");
  if (!std::is_sorted(kappa_grid.begin(), kappa_grid.end()))
    throw UsageError("kappa grid must be sorted ascending");
  if (!kappa_grid.empty() && kappa_grid.front() < 0.5) throw UsageError("kappa grid must lie in [0.5, inf)");

  LambdaBranch out;
  out.M = M;
  out.j = j;
  const double kappa0 = kappa_j0(j);
  const cplx z0 = branch_anchor(M, j);
  std::vector<BranchPoint> pts(kappa_grid.size());

  // Upward from the anchor, then downward, so each grid point is reached by
  // a continuation path that does not cross the anchor.
  double k = kappa0;
  cplx z = z0;
  for (std::size_t i = 0; i < kappa_grid.size(); ++i) {
    if (kappa_grid[i] < kappa0) continue;
    z = continue_branch(M, k, z, kappa_grid[i]);
    k = kappa_grid[i];
    pts[i] = {k, z, lambda_of_z(ModelParams::from_kappa(M, k), z)};
  }
  k = kappa0;
  z = z0;
  for (std::size_t i = kappa_grid.size(); i-- > 0;) {
    if (kappa_grid[i] >= kappa0) continue;
    z = continue_branch(M, k, z, kappa_grid[i]);
    k = kappa_grid[i];
    pts[i] = {k, z, lambda_of_z(ModelParams::from_kappa(M, k), z)};
  }
  out.points = std::move(pts);
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (!(out.points[i].lambda.imag() > 0.0)) out.im_positive = false;
    if (i > 0 && out.points[i - 1].lambda.real() >= 0.0) {
      const cplx d = out.points[i].lambda - out.points[i - 1].lambda;
      if (!(d.real() > 0.0 && d.imag() > 0.0)) out.increasing_after_crossing = false;
    }
  }
  return out;
}

HopfPoint find_hopf(int M, int j, std::optional<HopfSeed> seed) {
  if (M < 25) throw UsageError("find_hopf requires M >= 25");
  if (j < 1) throw UsageError("find_hopf requires j >= 1");

  Vec3 x0;
  if (seed) {
    x0 = {seed->z.real(), seed->z.imag(), seed->kappa};
  } else {
    x0 = {0.0, tan_eq_t_roots(j).back(), kappa_j0(j)};
  }
  NewtonOutcome best = crossing_newton(M, x0);
  if (acceptable(M, best)) return finish(M, j, best);

  // Reseed once: march along the branch until Re lambda changes sign and
  // start Newton from the linearly interpolated crossing.
  const double kappa0 = kappa_j0(j);
  double k_prev = kappa0;
  cplx z_prev;
  try {
    z_prev = branch_anchor(M, j);
    double re_prev = lambda_of_z(ModelParams::from_kappa(M, k_prev), z_prev).real();
    const double dk = 0.1;
    const double direction = re_prev < 0.0 ? 1.0 : -1.0;
    for (int s = 1; s <= 400; ++s) {
      const double k = kappa0 + direction * dk * s;
      if (k < 0.5) break;
      const cplx z = continue_branch(M, k_prev, z_prev, k);
      const double re = lambda_of_z(ModelParams::from_kappa(M, k), z).real();
      if ((re < 0.0) != (re_prev < 0.0)) {
        const double w = re_prev / (re_prev - re);
        const cplx zs = z_prev + w * (z - z_prev);
        const NewtonOutcome n = crossing_newton(M, {zs.real(), zs.imag(), k_prev + w * (k - k_prev)});
        if (acceptable(M, n)) return finish(M, j, n);
        if (n.residual < best.residual) best = n;
        break;
      }
      k_prev = k;
      z_prev = z;
      re_prev = re;
    }
  } catch (const NumericError&) {
    // fall through to the error below with the best iterate so far
  }
  throw HopfError("Hopf point not found for M=" + std::to_string(M) + ", j=" + std::to_string(j),
                  cplx(best.x(0), best.x(1)), best.x(2), best.residual);
}

WindowCheck unstable_window_check(int M, std::span<const double> kappa_probes) {
  if (!std::is_sorted(kappa_probes.begin(), kappa_probes.end()))
    throw UsageError("kappa probes must be sorted ascending");
  WindowCheck out;
  for (double k : kappa_probes) {
    out.probes.push_back({k, count_unstable_pairs(ModelParams::from_kappa(M, k))});
  }
  if (out.probes.empty()) return out;

  const int max_pairs = out.probes.back().pairs;
  if (M >= 25) {
    for (int j = 1; j <= max_pairs; ++j) {
      try {
        const double kc = find_hopf(M, j).kappa;
        if (kc >= kappa_probes.front() && kc <= kappa_probes.back()) out.crossings.push_back(kc);
      } catch (const NumericError& e) {
        out.consistent = false;
        out.detail += std::string("crossing ") + std::to_string(j) + " not located: " + e.what() + "; ";
      }
    }
    std::sort(out.crossings.begin(), out.crossings.end());
  }
  for (std::size_t i = 1; i < out.probes.size(); ++i) {
    const auto& a = out.probes[i - 1];
    const auto& b = out.probes[i];
    if (b.pairs < a.pairs) {
      out.consistent = false;
      out.detail += "count decreases between kappa=" + std::to_string(a.kappa) + " and " +
                    std::to_string(b.kappa) + "; ";
    }
    if (M >= 25) {
      const auto between = std::count_if(out.crossings.begin(), out.crossings.end(),
                                         [&](double c) { return c > a.kappa && c <= b.kappa; });
      if (b.pairs - a.pairs != between) {
        out.consistent = false;
        out.detail += "rise of " + std::to_string(b.pairs - a.pairs) + " with " + std::to_string(between) +
                      " crossings between kappa=" + std::to_string(a.kappa) + " and " +
                      std::to_string(b.kappa) + "; ";
      }
    }
  }
  return out;
}

unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BUBBELATOR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

std::vector<Table1Row> table1(std::span<const int> M_list, unsigned threads) {
  std::vector<Table1Row> rows(M_list.size());
  auto solve = [&](std::size_t i) {
    rows[i].M = M_list[i];
    try {
      rows[i].point = find_hopf(M_list[i], 1);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  };
  unsigned n = threads == 0 ? thread_cap() : std::min(threads, thread_cap());
  n = std::max(1u, std::min<unsigned>(n, static_cast<unsigned>(rows.size())));
  if (n <= 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) solve(i);
    return rows;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < rows.size(); i += n) solve(i);
    });
  }
  for (auto& t : pool) t.join();
  return rows;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string table1_csv(std::span<const Table1Row> rows) {
  const bool any_error = std::any_of(rows.begin(), rows.end(), [](const Table1Row& r) { return !r.point; });
  std::ostringstream os;
  os << "M,K,kappa,omega,residual_F,residual_ReLambda" << (any_error ? ",error" : "") << '\n';
  for (const auto& r : rows) {
    os << r.M;
    if (r.point) {
      os << ',' << num(r.point->K) << ',' << num(r.point->kappa) << ',' << num(r.point->omega) << ','
         << num(r.point->residual_F) << ',' << num(r.point->residual_re_lambda);
    } else {
      os << ",,,,,";
    }
    if (any_error) os << ',' << (r.error.empty() ? "" : csv_quote(r.error));
    os << '\n';
  }
  return os.str();
}

std::string table1_text(std::span<const Table1Row> rows) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%9s  %10s  %8s  %12s\n", "M", "K", "kappa_1", "Im lambda");
  os << buf;
  for (const auto& r : rows) {
    if (r.point) {
      std::snprintf(buf, sizeof buf, "%9d  %10.5g  %8.5g  %12.5g\n", r.M, r.point->K, r.point->kappa,
                    r.point->omega);
    } else {
      std::snprintf(buf, sizeof buf, "%9d  failed: %s\n", r.M, r.error.c_str());
    }
    os << buf;
  }
  return os.str();
}

}  // namespace bubbelator
