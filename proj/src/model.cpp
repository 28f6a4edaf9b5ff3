#include "bubbelator/model.hpp"

#include <cmath>
#include <string>

#include "bubbelator/errors.hpp"

namespace bubbelator {

namespace {

void check_size(const ModelParams& p, std::size_t size) {
  if (size != static_cast<std::size_t>(p.M())) {
    throw UsageError("state has length " + std::to_string(size) + ", expected M = " +
                     std::to_string(p.M()));
  }
}

}  // namespace

ModelParams::ModelParams(int M, double K) : M_(M), K_(K) {
  if (M < 3) throw UsageError("M must be at least 3");
  if (!(K > 0.0) || !std::isfinite(K)) throw UsageError("K must be positive and finite");
}

ModelParams ModelParams::from_kappa(int M, double kappa) {
  if (M < 3) throw UsageError("M must be at least 3");
  return ModelParams(M, kappa / std::sqrt(static_cast<double>(M)));
}

double ModelParams::kappa() const { return K_ * std::sqrt(static_cast<double>(M_)); }

double ModelParams::eps() const { return 1.0 / std::sqrt(static_cast<double>(M_)); }

FluxVector fluxes(const ModelParams& p, std::span<const double> n) {
  check_size(p, n.size());
  const int N = p.N();
  FluxVector J(N);
  for (int l = 0; l < N; ++l) J[l] = n[l] * n[0] - n[l + 1];
  return J;
}

void rhs_into(const ModelParams& p, std::span<const double> n, std::span<double> out) {
  check_size(p, n.size());
  check_size(p, out.size());
  const int M = p.M();
  const int N = p.N();
  const double K = p.K();
  const double n1 = n[0];

  // J_l is recomputed on the fly; out[l] for 2 <= l <= N takes J_{l-1} - J_l.
  double flux_sum = 0.0;
  double prev = n[0] * n1 - n[1];  // J_1
  flux_sum += prev;
  for (int l = 1; l < N; ++l) {
    const double J = n[l] * n1 - n[l + 1];
    out[l] = prev - J;
    flux_sum += J;
    prev = J;
  }
  out[M - 1] = prev - K * n[M - 1];
  const double J1 = n[0] * n1 - n[1];
  out[0] = -J1 - flux_sum + static_cast<double>(M) * K * n[M - 1];
}

std::vector<double> rhs(const ModelParams& p, std::span<const double> n) {
  std::vector<double> out(n.size());
  rhs_into(p, n, out);
  return out;
}

double total_mass(const ModelParams& p, std::span<const double> n) {
  check_size(p, n.size());
  double m = 0.0;
  for (std::size_t l = 0; l < n.size(); ++l) m += static_cast<double>(l + 1) * n[l];
  return m;
}

bool is_physical(std::span<const double> n) {
  for (double v : n) {
    if (!std::isfinite(v) || v < 0.0) return false;
  }
  return true;
}

std::vector<double> constant_equilibrium(const ModelParams& p) {
  return std::vector<double>(p.M(), p.A());
}

}  // namespace bubbelator
