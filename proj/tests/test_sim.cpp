#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bubbelator/linalg.hpp"
#include "bubbelator/roots.hpp"
#include "bubbelator/sim.hpp"

using namespace bubbelator;

namespace {

std::vector<double> diff(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

double sup(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Linear interpolation of the stored full states at time t.
std::vector<double> state_at(const Trajectory& tr, double t) {
  std::size_t i = 0;
  while (i + 2 < tr.states.size() && tr.states[i + 1].t <= t) ++i;
  const auto& a = tr.states[i];
  const auto& b = tr.states[i + 1];
  const double w = (t - a.t) / (b.t - a.t);
  std::vector<double> n(a.n.size());
  for (std::size_t l = 0; l < n.size(); ++l) n[l] = a.n[l] + w * (b.n[l] - a.n[l]);
  return n;
}

}  // namespace

TEST_CASE("equilibrium stays put") {
  const ModelParams p(25, 3.0);
  const StateVector s0{constant_equilibrium(p), 0.0};
  const Trajectory tr = integrate(p, s0, 10.0);
  for (const auto& s : tr.states) CHECK(sup(diff(s.n, s0.n)) <= 1e-6);
  CHECK(tr.states.back().t == 10.0);
}

TEST_CASE("oscillation from step initial data") {
  const ModelParams p(25, 3.0);
  const StateVector s0 = step_initial_data(p, 4.2, 4.0);
  CHECK(total_mass(p, s0.n) == doctest::Approx(1300.2));
  const Trajectory tr = integrate(p, s0, 200.0);
  CHECK(tr.max_mass_drift <= 1e-8);
  CHECK(tr.positive);
  for (std::size_t i = 1; i < tr.times.size(); ++i) REQUIRE(tr.times[i] > tr.times[i - 1]);
  CHECK(tr.states.front().t == 0.0);
  CHECK(tr.states.back().t == 200.0);
  CHECK(tr.times.size() == tr.n1.size());
  CHECK(tr.step_stats.accepted + 1 == tr.times.size());

  const OscillationMetrics late = oscillation_metrics(tr);
  REQUIRE(late.period);
  // The oscillation grows at the rate of the unstable pair 0.0214 +- 0.741i.
  CHECK(*late.period == doctest::Approx(2.0 * std::numbers::pi / 0.741).epsilon(0.02));
  CHECK(late.amplitude > 0.05 * late.mean);
  const OscillationMetrics early = oscillation_metrics(integrate(p, s0, 100.0));
  CHECK(late.amplitude > 2.0 * early.amplitude);

  // Saturated oscillation later on.
  const OscillationMetrics sat = oscillation_metrics(integrate(p, s0, 600.0), 1.0 / 6.0);
  CHECK(sat.amplitude >= 0.1 * sat.mean);
  REQUIRE(sat.period);
}

TEST_CASE("stable regime shows no oscillation") {
  const ModelParams p(25, 0.1);
  const Trajectory tr = integrate(p, {constant_equilibrium(p), 0.0}, 200.0);
  const OscillationMetrics m = oscillation_metrics(tr);
  CHECK_FALSE(m.period);
  CHECK(m.amplitude < 1e-6);

  // A perturbation decays.
  const Trajectory tp = integrate(p, step_initial_data(p, 1.3, 1.1), 400.0);
  CHECK(oscillation_metrics(tp, 0.25).amplitude < 1e-3 * oscillation_metrics(tp, 1.0).amplitude);
}

TEST_CASE("perturbed equilibrium") {
  const ModelParams p(100, 3.0);
  const StateVector e0 = perturbed_equilibrium(p, 0.0);
  CHECK(e0.n == constant_equilibrium(p));
  const double m0 = total_mass(p, e0.n);
  for (double d : {1e-3, -0.2, 0.5}) {
    CHECK(std::abs(total_mass(p, perturbed_equilibrium(p, d).n) - m0) <= 1e-12 * m0);
  }
  Eigen::VectorXcd mode = Eigen::VectorXcd::Ones(100);
  CHECK(std::abs(total_mass(p, perturbed_equilibrium(p, 0.1, mode).n) - m0) <= 1e-12 * m0);
  CHECK_THROWS_AS(perturbed_equilibrium(p, 0.1, Eigen::VectorXcd::Ones(3)), UsageError);
}

TEST_CASE("growth along the leading mode") {
  const ModelParams p(100, 3.0);
  const auto spec = spectrum_via_F(p);
  const cplx lam = spec.eigenvalues.front().lambda;
  CHECK(lam.real() == doctest::Approx(0.05836).epsilon(1e-3));
  const StateVector s0 = perturbed_equilibrium(p, 1e-3);
  const auto eq = constant_equilibrium(p);
  IntegratorOptions o;
  o.state_stride = 1;
  const Trajectory tr = integrate(p, s0, 45.0, o);
  // Compare one full period apart so the rotating phase drops out.
  const double T = 2.0 * std::numbers::pi / lam.imag();
  const double n0 = norm2(diff(s0.n, eq));
  for (int k = 1; k * T <= 40.0; ++k) {
    const double ratio = norm2(diff(state_at(tr, k * T), eq)) / n0;
    const double predicted = std::exp(lam.real() * k * T);
    CHECK(ratio >= predicted / 2.0);
    CHECK(ratio <= predicted * 2.0);
  }
}

TEST_CASE("period near the first Hopf point") {
  const ModelParams p(100, 0.40);
  const Trajectory tr = integrate(p, perturbed_equilibrium(p, 1e-3), 3000.0);
  const OscillationMetrics m = oscillation_metrics(tr);
  REQUIRE(m.period);
  CHECK(*m.period == doctest::Approx(2.0 * std::numbers::pi / 0.021740).epsilon(0.15));
}

TEST_CASE("order of the method") {
  const ModelParams p(25, 3.0);
  const StateVector s0 = step_initial_data(p, 4.2, 4.0);
  IntegratorOptions tight;
  tight.atol = 1e-14;
  tight.rtol = 1e-14;
  const auto ref = integrate(p, s0, 5.0, tight).states.back().n;
  std::vector<double> lh, le;
  for (double dt : {0.01, 0.005, 0.0025}) {
    IntegratorOptions o;
    o.fixed_dt = dt;
    const auto y = integrate(p, s0, 5.0, o).states.back().n;
    lh.push_back(std::log(dt));
    le.push_back(std::log(sup(diff(y, ref))));
  }
  // Least-squares slope of log error against log step.
  const double mh = (lh[0] + lh[1] + lh[2]) / 3, me = (le[0] + le[1] + le[2]) / 3;
  double num = 0, den = 0;
  for (int i = 0; i < 3; ++i) {
    num += (lh[i] - mh) * (le[i] - me);
    den += (lh[i] - mh) * (lh[i] - mh);
  }
  CHECK(num / den >= 3.5);

  // Tighter tolerances reduce the adaptive error.
  double prev = 1e300;
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    IntegratorOptions o;
    o.atol = tol;
    o.rtol = tol;
    const double e = sup(diff(integrate(p, s0, 5.0, o).states.back().n, ref));
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("failure modes") {
  const ModelParams p(10, 1.0);
  IntegratorOptions o;
  o.atol = 1e-300;
  o.rtol = 0.0;
  CHECK_THROWS_AS(integrate(p, step_initial_data(p, 2.5, 2.0), 1.0, o), StiffnessError);
  CHECK_THROWS_AS(integrate(p, step_initial_data(p, 1e200, 2.0), 1.0), BlowUpError);
  CHECK_THROWS_AS(integrate(p, step_initial_data(p, 2.0, 2.0), 0.0), UsageError);
  CHECK_THROWS_AS(integrate(p, {std::vector<double>(3, 1.0), 0.0}, 1.0), UsageError);
  Trajectory empty;
  CHECK_THROWS_AS(oscillation_metrics(empty), UsageError);
}
