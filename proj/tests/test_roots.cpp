#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bubbelator/charfn.hpp"
#include "bubbelator/errors.hpp"
#include "bubbelator/roots.hpp"

using namespace bubbelator;

namespace {

constexpr double pi = std::numbers::pi;

bool has_near(const std::vector<cplx>& v, cplx x, double tol) {
  for (auto y : v)
    if (std::abs(y - x) <= tol) return true;
  return false;
}

}  // namespace

TEST_CASE("roots of tan t = t") {
  const auto t = tan_eq_t_roots(10);
  REQUIRE(t.size() == 10);
  CHECK(t[0] == doctest::Approx(4.4934095).epsilon(1e-6 / 4.49));
  CHECK(t[0] < 1.5 * pi);
  for (int j = 0; j < 10; ++j) {
    CHECK(std::abs(std::sin(t[j]) - t[j] * std::cos(t[j])) <= 1e-12);
    CHECK(std::cos(t[j]) < 0.0);
    CHECK(t[j] > (2 * j + 1) * pi);
    CHECK(t[j] < (2 * j + 1.5) * pi);
  }
  CHECK_THROWS_AS(tan_eq_t_roots(0), UsageError);
}

TEST_CASE("crossing values of kappa for the limit function") {
  CHECK(kappa_j0(1) == doctest::Approx(1.89825).epsilon(1e-4 / 1.9));
  const auto t = tan_eq_t_roots(5);
  double prev = 0.0;
  for (int j = 1; j <= 5; ++j) {
    const double k = kappa_j0(j);
    CHECK(k > prev);
    prev = k;
    CHECK(std::abs(q_of_z(cplx(0.0, t[j - 1]), k).value) <= 1e-10);
  }
}

TEST_CASE("root curves of the limit function") {
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.5 + 0.1 * i);
  const QRootCurve c = q_root_curve(1, grid);
  REQUIRE(c.samples.size() == grid.size());
  CHECK(c.t_j == doctest::Approx(4.4934095).epsilon(1e-7));
  CHECK(c.monotone_after_crossing);
  for (const auto& s : c.samples) {
    CHECK(s.z.imag() > 0.0);
    CHECK(std::abs(q_of_z(s.z, s.kappa).value) <= 1e-10 * (1.0 + q_of_z(s.z, s.kappa).term_scale));
    if (std::abs(s.kappa - 1.5) < 1e-12) CHECK(s.z.real() < 0.0);
    if (std::abs(s.kappa - 2.2) < 1e-12) CHECK(s.z.real() > 0.0);
    if (s.kappa > c.kappa_j0) {
      const cplx k2 = s.kappa * s.kappa;
      CHECK(std::abs((k2 + s.z * s.z) / (k2 * (1.0 + s.z))) < 1.0);
    }
  }
  // The anchor itself.
  const std::vector<double> at{kappa_j0(1)};
  const QRootCurve a = q_root_curve(1, at);
  CHECK(std::abs(a.samples[0].z - cplx(0.0, 4.4934095)) < 1e-6);

  const QRootCurve c2 = q_root_curve(2, grid);
  CHECK(c2.monotone_after_crossing);
  for (std::size_t i = 0; i < c2.samples.size(); ++i) CHECK(c2.samples[i].z.imag() > c.samples[i].z.imag());

  const std::vector<double> unsorted{2.0, 1.0};
  CHECK_THROWS_AS(q_root_curve(1, unsorted), UsageError);
}

TEST_CASE("spectrum for M = 100, K = 3") {
  const ModelParams p(100, 3.0);
  const FRoots fr = f_roots(p);
  CHECK(fr.complete);
  const SpectrumResult s = spectrum_via_F(p);
  REQUIRE(s.complete);
  const auto l = s.lambdas();
  REQUIRE(l.size() == 100);
  CHECK(s.unstable_pairs == 2);
  CHECK(has_near(l, {0.05836, 0.2014}, 1e-3));
  CHECK(has_near(l, {0.05836, -0.2014}, 1e-3));
  CHECK(has_near(l, {0.02585, 0.3618}, 1e-3));
  CHECK(has_near(l, {0.02585, -0.3618}, 1e-3));
  CHECK(has_near(l, {0.0, 0.0}, 1e-9));
  CHECK(has_near(l, {-410.94, 0.0}, 0.5));
  CHECK(s.complex_pairs == 49);
  CHECK(s.zero_count == 1);
  for (const auto& e : s.eigenvalues) CHECK(e.simple);
}

TEST_CASE("root records") {
  for (auto [M, K] : {std::pair{5, 0.3}, {12, 3.0}, {40, 0.05}, {100, 3.0}, {300, 0.2}}) {
    const ModelParams p(M, K);
    const FRoots fr = f_roots(p);
    REQUIRE(fr.representatives.size() == static_cast<std::size_t>(M));
    CHECK(std::abs(fr.representatives.front().lambda) == 0.0);
    std::vector<cplx> lams;
    for (const auto& r : fr.representatives) lams.push_back(r.lambda);
    for (std::size_t i = 1; i < fr.representatives.size(); ++i) {
      const auto& r = fr.representatives[i];
      CHECK(r.residual <= 1e-9);
      CHECK_FALSE(r.spurious);
      CHECK(std::abs(r.phi) >= 1.0 / std::sqrt(p.A()) - 1e-12);
      // The partner is a root mapping to the same eigenvalue.
      const CharfnValue f = f_of_phi_scaled(p, r.partner);
      CHECK(std::abs(f.value) <= 1e-8 * f.term_scale);
      CHECK(std::abs(lambda_of_phi(p, r.partner) - r.lambda) <= 1e-10 * (1.0 + std::abs(r.lambda)));
      CHECK(std::abs(r.partner - partner_phi(p, r.phi)) <= 1e-7 * (1.0 + std::abs(r.phi)));
      // Conjugation closure.
      CHECK(has_near(lams, std::conj(r.lambda), 1e-10 * (1.0 + std::abs(r.lambda))));
      // Unstable roots lie just outside phi = 1.
      if (r.lambda.real() >= 0.0) {
        CHECK(r.phi.real() >= 1.0 - 1e-9);
        CHECK(std::abs(r.phi - 1.0) * M <= 50.0);
      }
    }
  }
}

TEST_CASE("zero counts by the argument principle") {
  // phi^M F(phi) / S(phi) has 2M zeros: for every eigenvalue the root phi and
  // its partner 1/(A phi), with phi = 1 and 1/A for lambda = 0.
  for (auto [M, K] : {std::pair{5, 0.3}, {10, 1.0}, {16, 3.0}, {20, 0.5}}) {
    const ModelParams p(M, K);
    const FRoots fr = f_roots(p);
    double radius = 2.0;
    auto near_circle = [&](double r) {
      for (const auto& x : fr.representatives)
        if (std::abs(std::abs(x.phi) - r) < 1e-2 || std::abs(std::abs(x.partner) - r) < 1e-2) return true;
      return false;
    };
    while (near_circle(radius)) radius += 0.037;
    int outside = 0;
    for (const auto& x : fr.representatives) {
      if (std::abs(x.phi) > radius) ++outside;
      if (std::abs(x.partner) > radius) ++outside;
    }
    auto g = [&](cplx phi) { return std::pow(phi, M) * f_of_phi(p, phi).value / s_of_phi(p, phi); };
    const int n = 20000;
    double turns = 0.0;
    cplx prev = g(radius);
    for (int k = 1; k <= n; ++k) {
      const cplx cur = g(std::polar(radius, 2.0 * pi * k / n));
      turns += std::arg(cur / prev);
      prev = cur;
    }
    CHECK(std::lround(turns / (2.0 * pi)) == 2 * M - outside);
  }
}

TEST_CASE("oracle agreement") {
  const ModelParams p(12, 0.5);
  const auto a = spectrum_via_F(p).lambdas();
  const auto b = charpoly_oracle_spectrum(assemble_B(p)).lambdas();
  CHECK(matched_distance(a, b) <= 1e-8);
  for (int M : {3, 4, 7, 20, 55}) {
    for (double K : {0.02, 0.7, 5.0}) {
      const auto s = spectrum_via_F(ModelParams(M, K));
      CHECK(s.complete);
      CHECK(s.lambdas().size() == static_cast<std::size_t>(M));
      CHECK(s.zero_count == 1);
    }
  }
}

TEST_CASE("unstable pair counts") {
  CHECK(count_unstable_pairs(ModelParams(100, 3.0)) == 2);
  CHECK(count_unstable_pairs(ModelParams::from_kappa(1000, 1.0)) == 0);
  CHECK(count_unstable_pairs(ModelParams::from_kappa(1000, 3.0)) >= 1);
  CHECK(count_unstable_pairs(ModelParams(25, 0.1)) == 0);
}

TEST_CASE("spurious roots") {
  const ModelParams p(10, 1.0);
  CHECK(is_spurious_phi(p, 1.0));
  CHECK(is_spurious_phi(p, 0.5 + 1e-9));
  CHECK(is_spurious_phi(p, -1.0 / std::sqrt(2.0)));
  CHECK_FALSE(is_spurious_phi(p, cplx(1.0, 0.01)));
}
