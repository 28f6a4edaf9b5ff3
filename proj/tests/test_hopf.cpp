#include <doctest.h>

#include <cmath>

#include "bubbelator/hopf.hpp"
#include "bubbelator/roots.hpp"

using namespace bubbelator;

TEST_CASE("first Hopf points") {
  struct Row {
    int M;
    double K, kappa, omega;
  };
  // Reference critical values, to five significant digits.
  const Row rows[] = {{100, 0.39349, 3.9349, 0.021740},
                      {1000, 0.075016, 2.3722, 3.6176e-4},
                      {10000, 0.020376, 2.0376, 9.3596e-6}};
  for (const auto& r : rows) {
    const HopfPoint h = find_hopf(r.M, 1);
    CHECK(std::abs(h.K - r.K) <= (r.M == 100 ? 1e-4 : 1e-5));
    CHECK(std::abs(h.kappa - r.kappa) <= 1e-3);
    CHECK(std::abs(h.omega - r.omega) <= 1e-3 * r.omega);
    CHECK(h.residual_F <= 1e-10);
    CHECK(h.residual_re_lambda <= 1e-12);
    CHECK(h.simple);
    CHECK(h.omega > 0.0);
    CHECK(h.j == 1);
    CHECK(std::abs(h.kappa - h.K * std::sqrt(double(r.M))) <= 1e-12 * h.kappa);
  }
  const HopfPoint h5 = find_hopf(100000, 1);
  CHECK(std::abs(h5.kappa - 1.9414) <= 2e-3);
}

TEST_CASE("approach to the limit") {
  const double t1 = tan_eq_t_roots(1)[0];
  double prev_kappa = 1e300, prev_scaled = 1e300;
  for (int M : {100, 1000, 10000, 100000, 1000000}) {
    const HopfPoint h = find_hopf(M, 1);
    CHECK(h.kappa < prev_kappa);
    CHECK(h.kappa > kappa_j0(1));
    prev_kappa = h.kappa;
    const double scaled = h.omega * std::pow(double(M), 1.5);
    CHECK(scaled < 50.0);
    CHECK(scaled < prev_scaled);
    prev_scaled = scaled;
    const double rel = std::abs(h.omega / (h.K * t1 / M) - 1.0);
    if (M == 1000) CHECK(rel <= 0.2);
    if (M == 100000) CHECK(rel <= 0.05);
  }
}

TEST_CASE("second branch") {
  const HopfPoint h1 = find_hopf(1000, 1);
  const HopfPoint h2 = find_hopf(1000, 2);
  CHECK(h2.kappa > h1.kappa);
  CHECK(h2.omega > h1.omega);
  CHECK(h2.residual_F <= 1e-10);
  CHECK(count_unstable_pairs(ModelParams::from_kappa(1000, h2.kappa * 0.99)) == 1);
  CHECK(count_unstable_pairs(ModelParams::from_kappa(1000, h2.kappa * 1.01)) == 2);
}

TEST_CASE("explicit seeds and input checks") {
  const HopfPoint h = find_hopf(100, 1, HopfSeed{cplx(0.7, 5.3), 3.9});
  CHECK(h.K == doctest::Approx(0.39349).epsilon(1e-4));
  // A seed right next to the spurious root phi = 1 must not be accepted there.
  try {
    const HopfPoint s = find_hopf(100, 1, HopfSeed{cplx(0.0, 1e-4), 2.0});
    CHECK(std::abs(s.z) > 1e-3);
  } catch (const HopfError& e) {
    CHECK(std::isfinite(e.best_kappa));
  }
  CHECK_THROWS_AS(find_hopf(24, 1), UsageError);
  CHECK_THROWS_AS(find_hopf(100, 0), UsageError);
}

TEST_CASE("eigenvalue branch") {
  std::vector<double> grid;
  for (int i = 0; i <= 16; ++i) grid.push_back(2.0 + 0.05 * i);
  const LambdaBranch b = lambda_branch(1000, 1, grid);
  REQUIRE(b.points.size() == grid.size());
  CHECK(b.im_positive);
  CHECK(b.increasing_after_crossing);
  const double kc = find_hopf(1000, 1).kappa;
  int brackets = 0;
  for (std::size_t i = 1; i < b.points.size(); ++i) {
    const auto& a = b.points[i - 1];
    const auto& c = b.points[i];
    if (a.lambda.real() < 0.0 && c.lambda.real() >= 0.0) {
      ++brackets;
      CHECK(kc >= a.kappa);
      CHECK(kc <= c.kappa);
    }
  }
  CHECK(brackets == 1);
  // Branch points are eigenvalues.
  for (const auto& pt : b.points) {
    const CharfnValue f = f_of_z(ModelParams::from_kappa(1000, pt.kappa), pt.z);
    CHECK(std::abs(f.value) <= 1e-9 * f.term_scale);
  }
  const std::vector<double> low{0.4, 1.0};
  CHECK_THROWS_AS(lambda_branch(1000, 1, low), UsageError);
}

TEST_CASE("unstable window") {
  const std::vector<double> probes1{2.0, 2.5};
  const WindowCheck w1 = unstable_window_check(1000, probes1);
  CHECK(w1.probes[0].pairs == 0);
  CHECK(w1.probes[1].pairs == 1);
  CHECK(w1.consistent);
  REQUIRE(w1.crossings.size() == 1);
  CHECK(w1.crossings[0] == doctest::Approx(2.3722).epsilon(1e-3));

  const std::vector<double> probes2{0.5, 3.5, 4.5};
  const WindowCheck w2 = unstable_window_check(100, probes2);
  CHECK(w2.probes[0].pairs == 0);
  CHECK(w2.probes[1].pairs == 0);
  CHECK(w2.probes[2].pairs == 1);
  CHECK(w2.consistent);
}

TEST_CASE("table output") {
  const std::vector<int> Ms{100, 1000};
  const auto rows = table1(Ms, 1);
  const auto rows2 = table1(Ms, 2);
  CHECK(table1_csv(rows) == table1_csv(rows2));
  const std::string csv = table1_csv(rows);
  CHECK(csv.rfind("M,K,kappa,omega,residual_F,residual_ReLambda\n", 0) == 0);
  CHECK(csv.find("error") == std::string::npos);
  CHECK(csv.find("\n100,0.3934") != std::string::npos);
  CHECK(table1_text(rows).find("0.075016") != std::string::npos);

  const std::vector<int> bad{100, 20};
  const auto mixed = table1(bad, 1);
  CHECK(mixed[0].point.has_value());
  CHECK_FALSE(mixed[1].point.has_value());
  const std::string mcsv = table1_csv(mixed);
  CHECK(mcsv.rfind("M,K,kappa,omega,residual_F,residual_ReLambda,error\n", 0) == 0);
  CHECK(mcsv.find("\n20,,,,,,\"") != std::string::npos);
  CHECK(thread_cap() >= 1);
}
