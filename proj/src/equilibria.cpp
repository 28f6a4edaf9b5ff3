#include "bubbelator/equilibria.hpp"

#include <cmath>
#include <limits>

#include "bubbelator/errors.hpp"

namespace bubbelator {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log of the geometric sum 1 + z + ... + z^{n-1} = (z^n - 1)/(z - 1).
double log_geometric_sum(double z, int n) {
  if (n <= 0) return kNegInf;
  const double h = z - 1.0;
  if (h == 0.0) return std::log(static_cast<double>(n));
  const double x = static_cast<double>(n) * std::log1p(h);
  if (x > 0.0) return x + std::log(-std::expm1(-x)) - std::log(h);
  return std::log(-std::expm1(x)) - std::log(-h);
}

// log(K * geo(z, n) + 1)
double log_shifted(double K, double z, int n) {
  return log_add_exp(std::log(K) + log_geometric_sum(z, n), 0.0);
}

void check_z(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("equilibrium requires finite z > 0");
}

// Closed form m = alpha mu_M(z) + (1 - alpha) z mu_M(1), with the z^M growth
// factored into the denominator so that large M does not overflow.
double closed_form_mass(const ModelParams& p, double z) {
  const int M = p.M();
  const double K = p.K();
  const double h = z - 1.0;
  const double c = z - 1.0 - K;
  const double log_d = log_shifted(K, z, p.N());
  const double alpha = c / h * std::exp(-log_d);
  const double Md = static_cast<double>(M);
  const double z_pow_over_d = std::exp(Md * std::log(z) - log_d);
  const double alpha_mu = c * z / (h * h * h) * (std::exp(-log_d) + (Md * h - 1.0) * z_pow_over_d);
  return alpha_mu + (1.0 - alpha) * z * Md * (Md + 1.0) / 2.0;
}

}  // namespace

double mu_M(int M, double z) {
  const double h = z - 1.0;
  const double Md = static_cast<double>(M);
  if (std::abs(h) < 0.1) {
    double s = 0.0;
    double zl = 1.0;
    for (int l = 1; l <= M; ++l) {
      zl *= z;
      s += static_cast<double>(l) * zl;
    }
    return s;
  }
  const double zM = std::pow(z, Md);
  return (z - zM * z) / (h * h) + Md * zM * z / h;
}

EquilibriumProfile general_equilibrium(const ModelParams& p, double z) {
  check_z(z);
  const int M = p.M();
  const double K = p.K();
  const double log_z = std::log(z);
  const double log_den = log_shifted(K, z, p.N());

  EquilibriumProfile eq;
  eq.z = z;
  eq.densities.resize(M);
  for (int l = 1; l <= M; ++l) {
    const double log_num = log_shifted(K, z, M - l);
    eq.densities[l - 1] = std::exp(static_cast<double>(l) * log_z + log_num - log_den);
  }
  // Pin n_1 = z exactly; the log route reproduces it only to rounding.
  eq.densities[0] = z;
  if (z != 1.0) eq.alpha = (z - 1.0 - K) / (z - 1.0) * std::exp(-log_den);
  eq.flux = K * eq.densities[M - 1];
  eq.mass = total_mass(p, eq.densities);
  // For z < 1 and large M the tail is like z^l and may underflow to 0.
  for (double v : eq.densities) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw NumericError("equilibrium density negative or not finite");
    }
  }
  return eq;
}

double mass_of_equilibrium(const ModelParams& p, double z) {
  check_z(z);
  if (std::abs(z - 1.0) < 0.1) return general_equilibrium(p, z).mass;
  return closed_form_mass(p, z);
}

double find_z_for_mass(const ModelParams& p, double target_mass) {
  if (!(target_mass > 0.0) || !std::isfinite(target_mass)) {
    throw DomainError("target mass must be positive and finite");
  }
  auto mass = [&](double z) { return mass_of_equilibrium(p, z); };

  double lo = 1.0;
  double hi = 1.0;
  double m_lo = mass(lo);
  double m_hi = m_lo;
  while (m_hi < target_mass) {
    const double next = hi * 2.0;
    if (next > 1e300) throw NotFoundError("target mass too large to bracket");
    const double m_next = mass(next);
    if (!(m_next > m_hi)) throw NotFoundError("equilibrium mass is not increasing in z");
    lo = hi;
    m_lo = m_hi;
    hi = next;
    m_hi = m_next;
  }
  while (m_lo > target_mass) {
    const double next = lo / 2.0;
    if (next < 1e-300) throw NotFoundError("target mass too small to bracket");
    const double m_next = mass(next);
    if (!(m_next < m_lo)) throw NotFoundError("equilibrium mass is not increasing in z");
    hi = lo;
    m_hi = m_lo;
    lo = next;
    m_lo = m_next;
  }
  if (m_lo == target_mass) return lo;
  if (m_hi == target_mass) return hi;

  // Geometric bisection keeps relative resolution for brackets spanning decades.
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double m_mid = mass(mid);
    if (m_mid < target_mass) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  // Newton polish with a secant slope; stays inside the bracket.
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    const double f = mass(z) - target_mass;
    if (std::abs(f) <= 1e-14 * target_mass) break;
    const double dz = 1e-7 * z;
    const double slope = (mass(z + dz) - mass(z - dz)) / (2.0 * dz);
    if (!(slope > 0.0)) break;
    const double next = z - f / slope;
    if (!(next > lo && next < hi)) break;
    z = next;
  }
  if (std::abs(mass(z) - target_mass) > 1e-10 * target_mass) {
    throw NotFoundError("mass inversion did not reach tolerance");
  }
  return z;
}

}  // namespace bubbelator
