#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "bubbelator/errors.hpp"
#include "bubbelator/linalg.hpp"
#include "bubbelator/model.hpp"

namespace bubbelator {

/// Positive solutions t_1 < t_2 < ... of tan t = t with cos t < 0. The j-th
/// lies in ((2j-1)pi, (2j-1)pi + pi/2).
std::vector<double> tan_eq_t_roots(int k_max);

/// Value of kappa at which Q(.; kappa) has the imaginary root i t_j:
/// kappa^2 = sqrt(1 + t_j^2) - 1.
double kappa_j0(int j);

/// Newton on Q(.; kappa) from `z0`. Throws NumericError on divergence.
cplx refine_q_root(cplx z0, double kappa, int max_iter = 50);

/// dz/dkappa along a root of Q, from dz/dw with w = kappa^2.
cplx q_root_tangent(cplx z, double kappa);

struct QRootSample {
  double kappa = 0.0;
  cplx z;
  cplx dz_dkappa;
};

/// Root z_j(kappa) of Q sampled on a kappa grid, anchored at z = i t_j for
/// kappa = kappa_j0.
struct QRootCurve {
  int j = 0;
  double t_j = 0.0;
  double kappa_j0 = 0.0;
  std::vector<QRootSample> samples;
  /// Re and Im of dz/dkappa positive at every sample with kappa >= kappa_j0.
  bool monotone_after_crossing = true;
};

/// Predictor-corrector continuation from the anchor in both kappa
/// directions. Grid must be sorted ascending and positive. Throws
/// ContinuationError (a NumericError) with the last good sample on failure.
QRootCurve q_root_curve(int j, std::span<const double> kappa_grid);

class ContinuationError : public NumericError {
 public:
  ContinuationError(const std::string& what, double last_kappa, cplx last_z)
      : NumericError(what), last_kappa(last_kappa), last_z(last_z) {}
  double last_kappa;
  cplx last_z;
};

/// One root of the characteristic function F.
struct RootRecord {
  cplx phi;
  cplx lambda;
  /// |F(phi)| relative to the summed magnitudes of its terms.
  double residual = 0.0;
  bool simple = true;
  /// Within 1e-7 of one of 1, 1/A, +-A^{-1/2}.
  bool spurious = false;
  /// The other root 1/(A phi) found for the same eigenvalue.
  cplx partner;
};

struct FRoots {
  /// One record per eigenvalue (the root with |phi| >= A^{-1/2}), lambda = 0 first.
  std::vector<RootRecord> representatives;
  int iterations = 0;
  bool complete = true;
  std::string warning;
};

/// All roots of F through Aberth iteration on phi^M F(phi) with the known
/// factors (phi-1)^2 (A phi-1)^2 (A phi^2-1) divided out, then paired.
FRoots f_roots(const ModelParams& p);

/// Eigenvalues of B through the roots of F.
SpectrumResult spectrum_via_F(const ModelParams& p);

/// Number of conjugate pairs with Re lambda > 1e-12.
int count_unstable_pairs(const ModelParams& p);

/// True if phi is within `tol` of a zero of S(phi).
bool is_spurious_phi(const ModelParams& p, cplx phi, double tol = 1e-7);

}  // namespace bubbelator
