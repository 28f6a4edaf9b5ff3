#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bubbelator/charfn.hpp"
#include "bubbelator/errors.hpp"
#include "bubbelator/model.hpp"

namespace bubbelator {

/// A parameter value at which an eigenvalue pair of B crosses the imaginary
/// axis.
struct HopfPoint {
  int M = 0;
  int j = 0;
  double K = 0.0;
  double kappa = 0.0;
  /// Im lambda at the crossing (positive member of the pair).
  double omega = 0.0;
  cplx z;
  cplx phi;
  cplx lambda;
  /// |F(phi)| relative to the magnitude of its terms.
  double residual_F = 0.0;
  /// |Re lambda| / |lambda|.
  double residual_re_lambda = 0.0;
  bool simple = true;
  int iterations = 0;
};

/// Initial guess for find_hopf, in the rescaled variable z = M (phi - 1).
struct HopfSeed {
  cplx z;
  double kappa = 0.0;
};

class HopfError : public NumericError {
 public:
  HopfError(const std::string& what, cplx best_z, double best_kappa, double best_residual)
      : NumericError(what), best_z(best_z), best_kappa(best_kappa), best_residual(best_residual) {}
  cplx best_z;
  double best_kappa;
  double best_residual;
};

/// Solves Re F = Im F = Re lambda = 0 for (phi, K) at fixed M by damped Newton
/// with a forward-difference Jacobian. Default seed: z = i t_j at
/// kappa = kappa_j0. If that run fails or lands on the spurious root phi = 1,
/// the crossing is bracketed along lambda_branch and Newton is restarted there.
/// Requires M >= 25 and j >= 1 (UsageError); throws HopfError otherwise.
HopfPoint find_hopf(int M, int j, std::optional<HopfSeed> seed = std::nullopt);

/// A point on an eigenvalue branch lambda_j(kappa) at fixed M.
struct BranchPoint {
  double kappa = 0.0;
  cplx z;
  cplx lambda;
};

struct LambdaBranch {
  int M = 0;
  int j = 0;
  std::vector<BranchPoint> points;
  /// Im lambda > 0 at every grid point.
  bool im_positive = true;
  /// Finite-difference d lambda/d kappa has positive real and imaginary parts
  /// between consecutive grid points where Re lambda >= 0.
  bool increasing_after_crossing = true;
};

/// Continues the j-th branch over a sorted kappa grid in [0.5, inf), starting
/// from the root of K^-3 F(1 + z/M) nearest i t_j at kappa_j0. Internal
/// sub-steps are at most 0.05 in kappa. Throws ContinuationError on a branch
/// jump.
LambdaBranch lambda_branch(int M, int j, std::span<const double> kappa_grid);

struct WindowProbe {
  double kappa = 0.0;
  int pairs = 0;
};

struct WindowCheck {
  std::vector<WindowProbe> probes;
  /// Critical values kappa_j(M) located inside the probed range.
  std::vector<double> crossings;
  /// Counts are nondecreasing and each rise equals the number of crossings
  /// between the two probes.
  bool consistent = true;
  std::string detail;
};

/// Counts unstable pairs at each probe (sorted ascending) and compares the
/// pattern against the crossings found by find_hopf.
WindowCheck unstable_window_check(int M, std::span<const double> kappa_probes);

struct Table1Row {
  int M = 0;
  std::optional<HopfPoint> point;
  std::string error;
};

/// First crossings for each M. Rows are computed independently, on up to
/// `threads` worker threads (0: hardware concurrency capped by the
/// BUBBELATOR_THREADS environment variable); the order of the input is kept.
std::vector<Table1Row> table1(std::span<const int> M_list, unsigned threads = 1);

/// CSV with header M,K,kappa,omega,residual_F,residual_ReLambda (plus an
/// error column if any row failed).
std::string table1_csv(std::span<const Table1Row> rows);

/// Human-readable aligned version of the same table.
std::string table1_text(std::span<const Table1Row> rows);

/// Number of worker threads allowed by BUBBELATOR_THREADS (default: hardware
/// concurrency, at least 1).
unsigned thread_cap();

}  // namespace bubbelator
