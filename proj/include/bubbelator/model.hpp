#pragma once

#include <span>
#include <vector>

namespace bubbelator {

/// Parameters of the finite Becker-Doring system with linear atomization.
///
/// The system has clusters of size 1..M; clusters of the largest size M
/// atomize into M monomers at rate K. All other quantities are derived:
/// N = M-1, A = 1+K, kappa = K*sqrt(M), eps = 1/sqrt(M).
class ModelParams {
 public:
  /// Throws UsageError unless M >= 3 and K > 0 (finite).
  ModelParams(int M, double K);

  static ModelParams from_kappa(int M, double kappa);

  int M() const { return M_; }
  int N() const { return M_ - 1; }
  double K() const { return K_; }
  double A() const { return 1.0 + K_; }
  double kappa() const;
  double eps() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  int M_;
  double K_;
};

/// Number densities n_1..n_M (stored 0-based) at time t.
struct StateVector {
  std::vector<double> n;
  double t = 0.0;
};

/// Net fluxes J_1..J_N (stored 0-based).
using FluxVector = std::vector<double>;

/// J_l = n_l n_1 - n_{l+1}, l = 1..N.
FluxVector fluxes(const ModelParams& p, std::span<const double> n);

/// Time derivative of all densities. The monomer equation is evaluated through
/// its explicit flux sum, so mass conservation is not built in.
std::vector<double> rhs(const ModelParams& p, std::span<const double> n);

/// In-place variant used by the integrator; `out` must have length M.
void rhs_into(const ModelParams& p, std::span<const double> n, std::span<double> out);

/// sum_l l * n_l
double total_mass(const ModelParams& p, std::span<const double> n);

/// True if every density is finite and nonnegative.
bool is_physical(std::span<const double> n);

/// n_l = 1+K for all l.
std::vector<double> constant_equilibrium(const ModelParams& p);

}  // namespace bubbelator
