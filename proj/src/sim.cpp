#include "bubbelator/sim.hpp"

#include <algorithm>
#include <cmath>

#include "bubbelator/linalg.hpp"
#include "bubbelator/roots.hpp"

namespace bubbelator {

namespace {

// Dormand-Prince 5(4) tableau; the system is autonomous, so the nodes c_i
// are not needed.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Stepper {
  const ModelParams& p;
  std::size_t M;
  std::vector<double> k1, k2, k3, k4, k5, k6, k7, tmp, y5;

  explicit Stepper(const ModelParams& params)
      : p(params), M(params.M()), k1(M), k2(M), k3(M), k4(M), k5(M), k6(M), k7(M), tmp(M), y5(M) {}

  void f(const std::vector<double>& y, std::vector<double>& out) { rhs_into(p, y, out); }

  // One step from y with k1 = f(y) already set; fills y5 and k7 = f(y5) and
  // returns the RMS error estimate scaled by atol + rtol |y|.
  double step(const std::vector<double>& y, double h, double atol, double rtol) {
    for (std::size_t i = 0; i < M; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    f(tmp, k2);
    for (std::size_t i = 0; i < M; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(tmp, k3);
    for (std::size_t i = 0; i < M; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(tmp, k4);
    for (std::size_t i = 0; i < M; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(tmp, k5);
    for (std::size_t i = 0; i < M; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(tmp, k6);
    for (std::size_t i = 0; i < M; ++i)
      y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(y5, k7);
    double err = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err += (e / sc) * (e / sc);
    }
    return std::sqrt(err / static_cast<double>(M));
  }
};

bool all_finite(const std::vector<double>& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

Trajectory integrate(const ModelParams& p, const StateVector& s0, double t_end, const IntegratorOptions& opts) {
  const std::size_t M = static_cast<std::size_t>(p.M());
  if (s0.n.size() != M) throw UsageError("initial state must have M densities");
  if (!(t_end > s0.t)) throw UsageError("t_end must exceed the initial time");
  if (!all_finite(s0.n)) throw UsageError("initial state must be finite");
  if (!(opts.atol > 0.0 && opts.rtol >= 0.0)) throw UsageError("tolerances must be positive");
  if (opts.state_stride < 1) throw UsageError("state stride must be at least 1");
  if (opts.fixed_dt && !(*opts.fixed_dt > 0.0)) throw UsageError("fixed step must be positive");

  Trajectory tr;
  Stepper st(p);
  std::vector<double> y = s0.n;
  double t = s0.t;
  const double mass0 = total_mass(p, y);
  const double span = t_end - s0.t;

  auto record = [&](bool snapshot) {
    const double drift = std::abs(total_mass(p, y) - mass0) / std::abs(mass0);
    tr.times.push_back(t);
    tr.n1.push_back(y[0]);
    tr.mass_drift.push_back(drift);
    tr.max_mass_drift = std::max(tr.max_mass_drift, drift);
    const double lo = *std::min_element(y.begin(), y.end());
    tr.min_density = std::min(tr.min_density, lo);
    if (lo <= 0.0) tr.positive = false;
    if (snapshot) tr.states.push_back({y, t});
    if (drift > opts.mass_drift_bound)
      throw NumericError("relative mass drift " + std::to_string(drift) + " exceeds bound at t=" +
                         std::to_string(t));
  };
  record(true);

  st.f(y, st.k1);
  if (!all_finite(st.k1)) throw BlowUpError("right-hand side not finite at the initial state", t);
  double h;
  if (opts.fixed_dt) {
    h = *opts.fixed_dt;
  } else if (opts.first_dt > 0.0) {
    h = opts.first_dt;
  } else {
    // Max norms: squares would overflow for tiny absolute tolerances.
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double sc = opts.atol + opts.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(st.k1[i]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    if (!(h > 0.0 && std::isfinite(h))) h = 1e-6;
    h = std::min(h, 0.1 * span);
  }
  h = std::min(h, opts.max_dt);

  while (t < t_end) {
    if (tr.step_stats.accepted + tr.step_stats.rejected >= opts.max_steps)
      throw NumericError("step limit reached at t=" + std::to_string(t));
    bool last = false;
    double hs = h;
    if (t + hs >= t_end) {
      hs = t_end - t;
      last = true;
    }
    if (!opts.fixed_dt && !last && hs < 1e-14 * span)
      throw StiffnessError("step size underflow at t=" + std::to_string(t) +
                               "; the problem is too stiff for these tolerances (try loosening them)",
                           t);
    const double err = st.step(y, hs, opts.atol, opts.rtol);
    if (!all_finite(st.y5)) {
      if (opts.fixed_dt) throw BlowUpError("state became non-finite", t);
      ++tr.step_stats.rejected;
      h = 0.25 * hs;
      if (h < 1e-14 * span) throw BlowUpError("state became non-finite", t);
      continue;
    }
    if (opts.fixed_dt || err <= 1.0) {
      t = last ? t_end : t + hs;
      y.swap(st.y5);
      st.k1.swap(st.k7);
      ++tr.step_stats.accepted;
      tr.step_stats.min_dt = std::min(tr.step_stats.min_dt, hs);
      tr.step_stats.max_dt = std::max(tr.step_stats.max_dt, hs);
      record(last || tr.step_stats.accepted % static_cast<std::size_t>(opts.state_stride) == 0);
      if (!opts.fixed_dt) {
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = std::min(hs * fac, opts.max_dt);
        if (last) h = hs;
      }
    } else {
      ++tr.step_stats.rejected;
      h = hs * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
  }
  return tr;
}

OscillationMetrics oscillation_metrics(const Trajectory& traj, double window, double noise_floor) {
  if (traj.times.empty()) throw UsageError("empty trajectory");
  if (!(window > 0.0 && window <= 1.0)) throw UsageError("window must be in (0, 1]");
  OscillationMetrics m;
  const double t0 = traj.times.front();
  const double t1 = traj.times.back();
  const double start = t1 - window * (t1 - t0);
  const auto first = std::lower_bound(traj.times.begin(), traj.times.end(), start);
  const std::size_t i0 = static_cast<std::size_t>(first - traj.times.begin());
  const std::size_t n = traj.times.size();

  double lo = traj.n1[i0], hi = traj.n1[i0];
  for (std::size_t i = i0; i < n; ++i) {
    lo = std::min(lo, traj.n1[i]);
    hi = std::max(hi, traj.n1[i]);
  }
  // Time-weighted mean (steps are not uniform).
  double acc = 0.0, dur = 0.0;
  for (std::size_t i = i0 + 1; i < n; ++i) {
    const double dt = traj.times[i] - traj.times[i - 1];
    acc += 0.5 * (traj.n1[i] + traj.n1[i - 1]) * dt;
    dur += dt;
  }
  m.mean = dur > 0.0 ? acc / dur : traj.n1[i0];
  m.amplitude = hi - lo;

  const double band = std::max(0.05 * m.amplitude, noise_floor * std::abs(m.mean));
  std::vector<double> ups;
  bool armed = false;
  for (std::size_t i = i0; i < n; ++i) {
    const double v = traj.n1[i] - m.mean;
    if (v < -band) armed = true;
    if (armed && v > band) {
      // Interpolate the mean crossing between the last sample at or below the
      // mean and the next one.
      std::size_t k = i;
      while (k > i0 && traj.n1[k - 1] - m.mean > 0.0) --k;
      if (k > i0) {
        const double va = traj.n1[k - 1] - m.mean, vb = traj.n1[k] - m.mean;
        const double w = va / (va - vb);
        ups.push_back(traj.times[k - 1] + w * (traj.times[k] - traj.times[k - 1]));
      }
      armed = false;
    }
  }
  m.crossings = static_cast<int>(ups.size());
  if (ups.size() >= 2) m.period = (ups.back() - ups.front()) / static_cast<double>(ups.size() - 1);
  return m;
}

StateVector perturbed_equilibrium(const ModelParams& p, double delta, const std::optional<Eigen::VectorXcd>& mode) {
  const int M = p.M();
  StateVector s{constant_equilibrium(p), 0.0};
  if (delta == 0.0) return s;

  Eigen::VectorXcd v;
  if (mode) {
    if (mode->size() != M) throw UsageError("mode must have M components");
    v = *mode;
  } else {
    const SpectrumResult spec = spectrum_via_F(p);
    const SpectrumEntry* top = nullptr;
    for (const auto& e : spec.eigenvalues) {
      if (e.lambda.imag() > 0.0 && (!top || e.lambda.real() > top->lambda.real())) top = &e;
    }
    if (!top) throw NumericError("no oscillatory eigenvalue to perturb along");
    v = eigenvector(assemble_B(p), top->lambda);
  }
  Eigen::VectorXd r = v.real();
  Eigen::VectorXd w(M);
  for (int l = 0; l < M; ++l) w(l) = l + 1.0;
  r -= (w.dot(r) / w.squaredNorm()) * w;
  for (int l = 0; l < M; ++l) s.n[l] += delta * r(l);
  return s;
}

StateVector step_initial_data(const ModelParams& p, double n1, double fill) {
  StateVector s{std::vector<double>(static_cast<std::size_t>(p.M()), fill), 0.0};
  s.n[0] = n1;
  return s;
}

}  // namespace bubbelator
