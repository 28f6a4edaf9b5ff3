#include <doctest.h>

#include <cmath>
#include <random>

#include "bubbelator/errors.hpp"
#include "bubbelator/linalg.hpp"
#include "bubbelator/roots.hpp"

using namespace bubbelator;

namespace {

double inf_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

TEST_CASE("small matrix by hand") {
  const auto B = assemble_B(ModelParams(3, 1.0));
  Eigen::Matrix3d expected;
  expected << -10, 0, 4, 2, -3, 1, 2, 2, -2;
  CHECK((B.entries - expected).cwiseAbs().maxCoeff() == 0.0);

  const auto c = faddeev_leverrier(B.entries, 1.0);
  REQUIRE(c.size() == 4);
  CHECK(std::abs(static_cast<double>(c[0])) < 1e-12);
  CHECK(static_cast<double>(c[1]) == doctest::Approx(46.0));
  CHECK(static_cast<double>(c[2]) == doctest::Approx(15.0));
  CHECK(static_cast<double>(c[3]) == 1.0);
}

TEST_CASE("structure of B") {
  const ModelParams p(8, 0.5);
  const auto& B = assemble_B(p).entries;
  const double A = p.A();
  CHECK(B(0, 0) == doctest::Approx(-A * 10));
  CHECK(B(0, 1) == doctest::Approx(1 - 0.5));
  for (int c = 2; c < 7; ++c) CHECK(B(0, c) == doctest::Approx(-0.5));
  CHECK(B(0, 7) == doctest::Approx(8 * 0.5 + 1));
  CHECK(B(1, 0) == doctest::Approx(A));
  for (int r = 2; r < 7; ++r) CHECK(B(r, 0) == 0.0);
  for (int r = 1; r < 7; ++r) {
    CHECK(B(r, r - 1) == doctest::Approx(A));
    CHECK(B(r, r) == doctest::Approx(-A - 1));
    CHECK(B(r, r + 1) == doctest::Approx(1.0));
  }
  CHECK(B(7, 0) == doctest::Approx(A));
  CHECK(B(7, 6) == doctest::Approx(A));
  CHECK(B(7, 7) == doctest::Approx(-A));
}

TEST_CASE("null vectors") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uk(0.01, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int M = 3 + static_cast<int>(rng() % 198);
    const ModelParams p(M, uk(rng));
    const auto B = assemble_B(p);
    const double nb = inf_norm(B.entries);
    Eigen::RowVectorXd w(M);
    for (int l = 0; l < M; ++l) w(l) = l + 1.0;
    CHECK((w * B.entries).cwiseAbs().maxCoeff() <= 1e-12 * nb * M);
    const Eigen::VectorXd v = right_null_vector(p);
    CHECK((B.entries * v).cwiseAbs().maxCoeff() <= 1e-10 * nb * v.cwiseAbs().maxCoeff());
    CHECK(v.minCoeff() >= 1.0 - 1e-12);
  }
}

TEST_CASE("finite-difference Jacobian") {
  for (auto [M, K] : {std::pair{3, 1.0}, {25, 3.0}, {60, 0.2}}) {
    const ModelParams p(M, K);
    const auto eq = constant_equilibrium(p);
    const auto B = assemble_B(p);
    const auto J5 = jacobian_fd(p, eq, 1e-5);
    const auto J4 = jacobian_fd(p, eq, 1e-4);
    CHECK((J5 - B.entries).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((J5 - J4).cwiseAbs().maxCoeff() <= 1e-6);
  }
  CHECK_THROWS_AS(jacobian_fd(ModelParams(3, 1.0), std::vector<double>(3, 1.0), 0.0), UsageError);
}

TEST_CASE("zero is a simple eigenvalue") {
  CHECK(check_lambda0_simple(assemble_B(ModelParams(25, 3.0))));
  CHECK(check_lambda0_simple(assemble_B(ModelParams(3, 1.0))));
  CHECK(check_lambda0_simple(assemble_B(ModelParams(150, 0.01))));
  const Eigen::VectorXd v = right_null_vector(ModelParams(25, 3.0));
  double s = 0.0;
  for (int l = 0; l < 25; ++l) s += (l + 1) * v(l);
  CHECK(s > 0.0);
}

TEST_CASE("characteristic-polynomial oracle") {
  for (int M : {3, 5, 8, 12}) {
    for (double K : {0.05, 0.3, 1.0, 3.0}) {
      const auto s = charpoly_oracle_spectrum(assemble_B(ModelParams(M, K)));
      const auto l = s.lambdas();
      REQUIRE(l.size() == static_cast<std::size_t>(M));
      double z = 1e300;
      for (auto x : l) z = std::min(z, std::abs(x));
      CHECK(z <= 1e-8);
      for (auto x : l) {
        double best = 1e300;
        for (auto y : l) best = std::min(best, std::abs(y - std::conj(x)));
        CHECK(best <= 1e-8);
      }
    }
  }
  const ModelParams p(12, 0.5);
  const auto a = charpoly_oracle_spectrum(assemble_B(p)).lambdas();
  const auto b = spectrum_via_F(p).lambdas();
  CHECK(matched_distance(a, b) <= 1e-8);
  CHECK_THROWS_AS(charpoly_oracle_spectrum(assemble_B(ModelParams(15, 1.0))), UsageError);
}

TEST_CASE("eigenvector") {
  const ModelParams p(25, 3.0);
  const auto B = assemble_B(p);
  const auto s = spectrum_via_F(p);
  const cplx lam = s.eigenvalues.front().lambda;
  REQUIRE(lam.real() > 0.0);
  const Eigen::VectorXcd v = eigenvector(B, lam);
  CHECK(v.norm() == doctest::Approx(1.0));
  CHECK((B.entries.cast<cplx>() * v - lam * v).norm() <= 1e-8 * inf_norm(B.entries));
}

TEST_CASE("classification and distances") {
  SpectrumResult s;
  for (cplx l : {cplx(0.1, 0.5), cplx(0.1, -0.5), cplx(0, 0), cplx(-3, 0), cplx(-1, 2), cplx(-1, -2)})
    s.eigenvalues.push_back({l, std::nullopt, true, EigenClass::ComplexStable});
  classify(s);
  CHECK(s.unstable_pairs == 1);
  CHECK(s.zero_count == 1);
  CHECK(s.real_negative == 1);
  CHECK(s.complex_pairs == 2);
  CHECK(s.eigenvalues.front().lambda == cplx(0.1, 0.5));
  CHECK(s.eigenvalues.front().kind == EigenClass::Unstable);

  const std::vector<cplx> a{{0, 0}, {1, 1}}, b{{1, 1}, {0, 0.5}};
  CHECK(hausdorff_distance(a, b) == doctest::Approx(0.5));
  CHECK(matched_distance(a, b) == doctest::Approx(0.5));
  const std::vector<cplx> c{{0, 0}, {0, 0}}, d{{0, 0}, {1, 0}};
  CHECK(hausdorff_distance(c, d) == doctest::Approx(1.0));
  CHECK(matched_distance(c, d) == doctest::Approx(1.0));
}
