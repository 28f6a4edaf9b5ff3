#include "bubbelator/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bubbelator/errors.hpp"
#include "bubbelator/polyroots.hpp"

namespace bubbelator {

std::vector<cplx> SpectrumResult::lambdas() const {
  std::vector<cplx> out;
  out.reserve(eigenvalues.size());
  for (const auto& e : eigenvalues) out.push_back(e.lambda);
  return out;
}

void classify(SpectrumResult& s, double zero_tol, double imag_tol) {
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](const auto& a, const auto& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
    return a.lambda.imag() > b.lambda.imag();
  });
  s.unstable_pairs = 0;
  s.zero_count = 0;
  s.real_negative = 0;
  s.complex_pairs = 0;
  for (auto& e : s.eigenvalues) {
    const cplx l = e.lambda;
    const bool real = std::abs(l.imag()) <= imag_tol;
    if (std::abs(l) <= zero_tol) {
      e.kind = EigenClass::Zero;
      ++s.zero_count;
    } else if (real) {
      e.kind = l.real() < 0.0 ? EigenClass::RealNegative : EigenClass::RealPositive;
      if (l.real() < 0.0) ++s.real_negative;
    } else if (l.real() > zero_tol) {
      e.kind = EigenClass::Unstable;
      if (l.imag() > 0.0) ++s.unstable_pairs;
    } else {
      e.kind = EigenClass::ComplexStable;
    }
    if (!real && l.imag() > 0.0 && std::abs(l) > zero_tol) ++s.complex_pairs;
  }
}

LinearizationMatrix assemble_B(const ModelParams& p) {
  const int M = p.M();
  const double K = p.K();
  const double A = p.A();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(M, M);

  B(0, 0) = -A * (M + 2);
  B(0, 1) = 1.0 - K;
  for (int c = 2; c < M - 1; ++c) B(0, c) = -K;
  B(0, M - 1) = M * K + 1.0;

  for (int r = 1; r < M - 1; ++r) {
    B(r, r - 1) = A;
    B(r, r) = -A - 1.0;
    B(r, r + 1) = 1.0;
  }

  B(M - 1, 0) += A;
  B(M - 1, M - 2) += A;
  B(M - 1, M - 1) = -A;
  return {std::move(B), p};
}

Eigen::VectorXd right_null_vector(const ModelParams& p) {
  const int M = p.M();
  const double K = p.K();
  const double log_a = std::log1p(K);
  Eigen::VectorXd v(M);
  for (int l = 1; l <= M; ++l) {
    // (A^l - A)/(K A^N) = (A^{l-N} - A^{1-N})/K, evaluated without forming A^N.
    const double a = std::exp((l - p.N()) * log_a);
    const double b = std::exp((1 - p.N()) * log_a);
    v(l - 1) = 1.0 + (a - b) / K;
  }
  return v;
}

Eigen::MatrixXd jacobian_fd(const ModelParams& p, std::span<const double> n, double h) {
  if (!(h > 0.0)) throw UsageError("finite-difference step must be positive");
  const int M = p.M();
  if (n.size() != static_cast<std::size_t>(M)) throw UsageError("state length must equal M");
  Eigen::MatrixXd J(M, M);
  std::vector<double> x(n.begin(), n.end());
  std::vector<double> fp(M), fm(M);
  for (int c = 0; c < M; ++c) {
    const double saved = x[c];
    x[c] = saved + h;
    rhs_into(p, x, fp);
    x[c] = saved - h;
    rhs_into(p, x, fm);
    x[c] = saved;
    for (int r = 0; r < M; ++r) J(r, c) = (fp[r] - fm[r]) / (2.0 * h);
  }
  return J;
}

std::vector<long double> faddeev_leverrier(const Eigen::MatrixXd& B, double scale) {
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const int n = static_cast<int>(B.rows());
  const MatL Bs = B.cast<long double>() / static_cast<long double>(scale);
  std::vector<long double> c(n + 1, 0.0L);
  c[n] = 1.0L;
  MatL Mk = MatL::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    MatL next = Bs * Mk;
    next.diagonal().array() += c[n - k + 1];
    Mk = std::move(next);
    c[n - k] = -(Bs * Mk).trace() / static_cast<long double>(k);
  }
  return c;
}

SpectrumResult charpoly_oracle_spectrum(const LinearizationMatrix& B) {
  const int M = static_cast<int>(B.entries.rows());
  if (M > 14) throw UsageError("characteristic-polynomial oracle is limited to M <= 14");
  // Power-of-two scaling keeps the recurrence exact in its first step.
  const double norm = B.entries.cwiseAbs().rowwise().sum().maxCoeff();
  const double scale = std::exp2(std::ceil(std::log2(norm)));
  const auto coeffs = faddeev_leverrier(B.entries, scale);
  const auto roots = polynomial_roots<long double>(coeffs);
  if (!roots.all_converged) throw NumericError("characteristic polynomial roots did not converge");

  // The recurrence loses a few digits to cancellation; polish each root with
  // Newton on det(B - lambda I), whose logarithmic derivative is -tr((B - lambda I)^-1).
  const Eigen::MatrixXcd Bc = B.entries.cast<cplx>();
  auto polish = [&](cplx lam) {
    double last = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 6; ++it) {
      Eigen::MatrixXcd C = Bc;
      C.diagonal().array() -= lam;
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(C);
      const cplx tr = lu.inverse().trace();
      const cplx step = 1.0 / tr;
      const double size = std::abs(step);
      if (!std::isfinite(size) || size >= last || size > 1e-4 * (1.0 + std::abs(lam))) break;
      lam += step;
      last = size;
      if (size <= 1e-16 * (1.0 + std::abs(lam))) break;
    }
    return lam;
  };

  SpectrumResult out;
  for (const auto& r : roots.roots) {
    SpectrumEntry e;
    e.lambda = polish(cplx(static_cast<double>(r.real() * scale), static_cast<double>(r.imag() * scale)));
    out.eigenvalues.push_back(e);
  }
  classify(out, 1e-8 * norm);
  return out;
}

bool check_lambda0_simple(const LinearizationMatrix& B, double rel_tol) {
  const double norm = B.entries.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B.entries);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * norm) ++rank;
  }
  const Eigen::VectorXd v = right_null_vector(B.params);
  double weighted = 0.0;
  for (Eigen::Index l = 0; l < v.size(); ++l) weighted += static_cast<double>(l + 1) * v(l);
  return rank == B.entries.rows() - 1 && weighted > 0.0;
}

Eigen::VectorXcd eigenvector(const LinearizationMatrix& B, cplx lambda) {
  const Eigen::Index M = B.entries.rows();
  const cplx shift = lambda + cplx(1e-10 * (1.0 + std::abs(lambda)), 0.0);
  Eigen::MatrixXcd C = B.entries.cast<cplx>();
  C.diagonal().array() -= shift;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(C);
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(M);
  for (int it = 0; it < 3; ++it) {
    x = lu.solve(x);
    x /= x.norm();
  }
  // Fix the phase so that the largest component is real and positive.
  Eigen::Index imax = 0;
  x.cwiseAbs().maxCoeff(&imax);
  x *= std::abs(x(imax)) / x(imax);
  return x;
}

double hausdorff_distance(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  auto directed = [](std::span<const cplx> from, std::span<const cplx> to) {
    double worst = 0.0;
    for (const auto& x : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : to) best = std::min(best, std::abs(x - y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

double matched_distance(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  struct Candidate {
    double d;
    std::size_t i, j;
  };
  std::vector<Candidate> all;
  all.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) all.push_back({std::abs(a[i] - b[j]), i, j});
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.d < y.d; });
  std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
  double worst = 0.0;
  std::size_t matched = 0;
  for (const auto& c : all) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = true;
    worst = std::max(worst, c.d);
    if (++matched == a.size()) break;
  }
  return worst;
}

}  // namespace bubbelator
