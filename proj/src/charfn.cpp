#include "bubbelator/charfn.hpp"

#include <algorithm>
#include <cmath>

#include "bubbelator/errors.hpp"

namespace bubbelator {

namespace {

// log(1 + d) without losing digits of small d.
cplx log1p_complex(cplx d) {
  if (std::abs(d) >= 0.5) return std::log(1.0 + d);
  const double x = d.real();
  const double y = d.imag();
  return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
}

struct GH {
  cplx G1, G2, H1, H2;
  cplx dG1, dG2, dH1, dH2;
};

GH gh_terms(const ModelParams& p, cplx phi, cplx d) {
  const double K = p.K();
  const double A = p.A();
  const double M = p.M();
  const double KM1 = K * M + 1.0;
  const cplx u = -(K + A * d);  // 1 - A phi

  GH t;
  const cplx g1 = K * phi + KM1 * d;
  t.G1 = phi * u * g1;
  t.dG1 = u * g1 - A * phi * g1 + phi * u * (K + KM1);

  const cplx g2 = A * M * d + K * phi + A * phi * d;
  const cplx dg2 = A * M + K + A * d + A * phi;
  t.G2 = u * g2;
  t.dG2 = -A * g2 + u * dg2;

  const cplx h1 = K + KM1 * u;
  t.H1 = d * h1;
  t.dH1 = h1 - A * KM1 * d;

  const cplx h2 = (A + M * A * A * phi) * u + K * A * phi;
  const cplx dh2 = M * A * A * u - A * (A + M * A * A * phi) + K * A;
  t.H2 = d * h2;
  t.dH2 = h2 + d * dh2;
  return t;
}

void fill_r_terms(const ModelParams& p, cplx phi, cplx d, const GH& t, SortedTerms& s) {
  const double A = p.A();
  const double A2 = A * A;
  s.R1 = -A * t.H2 + A2 * phi * t.G2;
  s.dR1 = -A * t.dH2 + A2 * t.G2 + A2 * phi * t.dG2;
  s.R2 = -d * t.H2 - A2 * phi * t.G1;
  s.dR2 = -t.H2 - d * t.dH2 - A2 * t.G1 - A2 * phi * t.dG1;
  s.R1_mag = std::abs(A * t.H2) + std::abs(A2 * phi * t.G2);
  s.R2_mag = std::abs(d * t.H2) + std::abs(A2 * phi * t.G1);
}

void check_phi(cplx phi) {
  if (phi == cplx(0.0, 0.0)) throw DomainError("characteristic function has a pole at phi = 0");
  if (!std::isfinite(phi.real()) || !std::isfinite(phi.imag())) {
    throw DomainError("phi must be finite");
  }
}

CharfnValue evaluate(const ModelParams& p, cplx phi, cplx d, bool with_small_terms) {
  check_phi(phi);
  const SortedTerms s =
      std::abs(d) < 0.1 ? sorted_terms_expanded(p, phi, d) : sorted_terms(p, phi, d);
  const double M = p.M();
  const double log_a_pow = -M * std::log1p(p.K());  // log A^{-M}
  const cplx w = M * log1p_complex(d);              // log phi^M

  double scale = std::max(0.0, w.real());
  if (with_small_terms) scale = std::max(scale, log_a_pow - w.real());

  const double e0 = std::exp(-scale);
  const cplx e1 = std::exp(w - scale);
  const cplx m_over_phi = M / phi;

  CharfnValue out;
  out.which = with_small_terms ? CharfnKind::F : CharfnKind::F0;
  out.log_scale = scale;
  out.value = -s.P1 * e0 + e1 * s.P2;
  out.derivative = -s.dP1 * e0 + e1 * (s.dP2 + m_over_phi * s.P2);
  out.term_scale = s.P1_mag * e0 + std::abs(e1) * s.P2_mag;
  out.derivative_scale = std::abs(s.dP1) * e0 + std::abs(e1 * (s.dP2 + m_over_phi * s.P2));
  if (with_small_terms) {
    // Both exponentials underflow to exact zeros when negligible.
    const double ea = std::exp(log_a_pow - scale);
    const cplx e2 = std::exp(log_a_pow - w - scale);
    out.value += ea * s.R1 + e2 * s.R2;
    out.derivative += ea * s.dR1 + e2 * (s.dR2 - m_over_phi * s.R2);
    out.term_scale += ea * s.R1_mag + std::abs(e2) * s.R2_mag;
    out.derivative_scale += std::abs(ea * s.dR1) + std::abs(e2 * (s.dR2 - m_over_phi * s.R2));
  }
  return out;
}

CharfnValue unscale(CharfnValue v) {
  if (v.log_scale != 0.0) {
    const double f = std::exp(v.log_scale);
    v.value *= f;
    v.derivative *= f;
    v.term_scale *= f;
    v.derivative_scale *= f;
    v.log_scale = 0.0;
  }
  return v;
}

}  // namespace

cplx lambda_of_phi(const ModelParams& p, cplx phi) {
  check_phi(phi);
  return (p.A() - 1.0 / phi) * (phi - 1.0);
}

cplx partner_phi(const ModelParams& p, cplx phi) {
  check_phi(phi);
  return 1.0 / (p.A() * phi);
}

cplx s_of_phi(const ModelParams& p, cplx phi) {
  const double A = p.A();
  return (phi - 1.0) * (A * phi - 1.0) * (A * phi * phi - 1.0);
}

SortedTerms sorted_terms(const ModelParams& p, cplx phi, cplx d) {
  const double A = p.A();
  const GH t = gh_terms(p, phi, d);
  const cplx u = -(p.K() + A * d);
  SortedTerms s;
  // -P1 = det[[phi-1, 1-A phi], [G1, H1]]
  s.P1 = u * t.G1 - d * t.H1;
  s.dP1 = -A * t.G1 + u * t.dG1 - t.H1 - d * t.dH1;
  // P2 = det[[A, 1-A phi], [-G2, H1]]
  s.P2 = A * t.H1 + u * t.G2;
  s.dP2 = A * t.dH1 - A * t.G2 + u * t.dG2;
  s.P1_mag = std::abs(u * t.G1) + std::abs(d * t.H1);
  s.P2_mag = std::abs(A * t.H1) + std::abs(u * t.G2);
  fill_r_terms(p, phi, d, t, s);
  return s;
}

SortedTerms sorted_terms_expanded(const ModelParams& p, cplx phi, cplx d) {
  const double K = p.K();
  const double A = p.A();
  const double A2 = A * A;
  const double M = p.M();
  const double KM1 = K * M + 1.0;
  const cplx v = K + A * d;           // A phi - 1
  const cplx q = A * phi * phi - 1.0;
  const cplx S = d * v * q;
  const cplx dS = v * q + d * A * q + d * v * (2.0 * A * phi);

  SortedTerms s;
  // P1 = K[(A phi - 1)^2 phi^2 - (phi - 1)^2] + (KM + 1) S
  const cplx T = v * v * phi * phi;
  const cplx dT = 2.0 * A * v * phi * phi + 2.0 * v * v * phi;
  s.P1 = K * (T - d * d) + KM1 * S;
  s.dP1 = K * (dT - 2.0 * d) + KM1 * dS;
  // P2 = phi (A phi - 1)^3 - A^2 (phi - 1)^2 + M (A phi - 1) A^2 (phi - 1)^2
  s.P2 = phi * v * v * v - A2 * d * d + M * v * A2 * d * d;
  s.dP2 = v * v * v + 3.0 * A * phi * v * v - 2.0 * A2 * d + M * A * A2 * d * d +
          2.0 * M * v * A2 * d;
  s.P1_mag = K * (std::abs(T) + std::abs(d * d)) + KM1 * std::abs(S);
  s.P2_mag = std::abs(phi * v * v * v) + std::abs(A2 * d * d) + std::abs(M * v * A2 * d * d);
  fill_r_terms(p, phi, d, gh_terms(p, phi, d), s);
  return s;
}

CharfnValue f_of_phi_scaled(const ModelParams& p, cplx phi) {
  return evaluate(p, phi, phi - 1.0, true);
}

CharfnValue f0_of_phi_scaled(const ModelParams& p, cplx phi) {
  return evaluate(p, phi, phi - 1.0, false);
}

CharfnValue f_of_phi(const ModelParams& p, cplx phi) { return unscale(f_of_phi_scaled(p, phi)); }

CharfnValue f0_of_phi(const ModelParams& p, cplx phi) {
  return unscale(f0_of_phi_scaled(p, phi));
}

CharfnValue f_of_z(const ModelParams& p, cplx z) {
  const cplx d = z / static_cast<double>(p.M());
  return unscale(evaluate(p, 1.0 + d, d, true));
}

CharfnValue f0_of_z(const ModelParams& p, cplx z) {
  const cplx d = z / static_cast<double>(p.M());
  return unscale(evaluate(p, 1.0 + d, d, false));
}

CharfnValue q_of_z(cplx z, cplx kappa) {
  if (kappa == cplx(0.0, 0.0)) throw DomainError("Q requires kappa != 0");
  const cplx ez = std::exp(z);
  const cplx k2 = kappa * kappa;
  CharfnValue out;
  out.which = CharfnKind::Q;
  out.value = ez * (1.0 + z * z / k2) - (1.0 + z);
  out.derivative = out.value + z + ez * (2.0 * z / k2);
  out.term_scale = std::abs(ez * (1.0 + z * z / k2)) + std::abs(1.0 + z);
  out.derivative_scale = std::abs(ez) * (std::abs(1.0 + z * z / k2) + std::abs(2.0 * z / k2)) + 1.0;
  return out;
}

CharfnValue qeps_with_derivative(const ModelParams& p, cplx z) {
  const double K = p.K();
  const double k3 = K * K * K;
  CharfnValue v = f_of_z(p, z);
  v.value /= k3;
  v.derivative /= k3 * p.M();
  v.term_scale /= k3;
  v.derivative_scale /= k3 * p.M();
  return v;
}

cplx qeps_of_z(const ModelParams& p, cplx z) {
  if (z == cplx(-static_cast<double>(p.M()), 0.0)) throw DomainError("1 + z/M must be nonzero");
  return qeps_with_derivative(p, z).value;
}

cplx lambda_of_z(const ModelParams& p, cplx z) {
  const double M = p.M();
  const cplx zm = z / M;
  if (1.0 + zm == cplx(0.0, 0.0)) throw DomainError("lambda(z) has a pole at z = -M");
  return p.K() * zm + zm * zm / (1.0 + zm);
}

cplx rescaled_lambda_of_z(const ModelParams& p, cplx z) {
  return lambda_of_z(p, z) * (static_cast<double>(p.M()) / p.K());
}

}  // namespace bubbelator
