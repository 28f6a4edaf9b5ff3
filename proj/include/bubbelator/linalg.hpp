#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bubbelator/model.hpp"

namespace bubbelator {

using cplx = std::complex<double>;

/// Jacobian of the model at the constant equilibrium n_l = 1+K.
struct LinearizationMatrix {
  Eigen::MatrixXd entries;
  ModelParams params;
};

enum class EigenClass { Unstable, Zero, RealNegative, ComplexStable, RealPositive };

struct SpectrumEntry {
  cplx lambda;
  /// Root of the characteristic function that produced lambda (absent for
  /// eigenvalues computed from the characteristic polynomial).
  std::optional<cplx> phi;
  bool simple = true;
  EigenClass kind = EigenClass::ComplexStable;
};

struct SpectrumResult {
  std::vector<SpectrumEntry> eigenvalues;
  int unstable_pairs = 0;
  int zero_count = 0;
  int real_negative = 0;
  int complex_pairs = 0;
  bool complete = true;
  std::string warning;

  std::vector<cplx> lambdas() const;
};

/// Sorts by decreasing real part (ties by decreasing imaginary part) and fills
/// the classification counts. `zero_tol` decides which eigenvalues count as 0,
/// `imag_tol` which count as real (both absolute).
void classify(SpectrumResult& s, double zero_tol = 1e-12, double imag_tol = 1e-9);

LinearizationMatrix assemble_B(const ModelParams& p);

/// vbar_l = 1 + (A^l - A)/(K A^N), the right null vector of B.
Eigen::VectorXd right_null_vector(const ModelParams& p);

/// Centered finite-difference Jacobian of the model right-hand side at n.
Eigen::MatrixXd jacobian_fd(const ModelParams& p, std::span<const double> n, double h);

/// Characteristic polynomial det(x I - B) by the Faddeev-LeVerrier recurrence
/// in long double, ascending coefficients, for B / scale; eigenvalues of B are
/// scale times the roots.
std::vector<long double> faddeev_leverrier(const Eigen::MatrixXd& B, double scale);

/// Brute-force eigenvalues: characteristic polynomial plus Aberth iteration.
/// Refuses M > 14 (UsageError), where the coefficients lose too many digits;
/// throws NumericError if the root iteration stalls.
SpectrumResult charpoly_oracle_spectrum(const LinearizationMatrix& B);

/// Numerical rank of B equals M-1 and the left and right null vectors are not
/// orthogonal, so 0 is an algebraically simple eigenvalue.
bool check_lambda0_simple(const LinearizationMatrix& B, double rel_tol = 1e-10);

/// Unit-norm eigenvector of B for an (approximate) eigenvalue, by inverse
/// iteration.
Eigen::VectorXcd eigenvector(const LinearizationMatrix& B, cplx lambda);

/// Symmetric Hausdorff distance between two finite point sets.
double hausdorff_distance(std::span<const cplx> a, std::span<const cplx> b);

/// Largest pairing distance after greedily matching equal-size multisets by
/// nearest neighbours; infinity if the sizes differ.
double matched_distance(std::span<const cplx> a, std::span<const cplx> b);

}  // namespace bubbelator
