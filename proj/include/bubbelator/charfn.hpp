#pragma once

#include <complex>

#include "bubbelator/model.hpp"

namespace bubbelator {

using cplx = std::complex<double>;

/// lambda = (A - 1/phi)(phi - 1): the eigenvalue generated by a root phi of
/// A phi^2 - (lambda + A + 1) phi + 1 = 0. Throws DomainError at phi = 0.
cplx lambda_of_phi(const ModelParams& p, cplx phi);

/// Partner root 1/(A phi) producing the same lambda.
cplx partner_phi(const ModelParams& p, cplx phi);

/// S(phi) = (phi - 1)(A phi - 1)(A phi^2 - 1); its four zeros are spurious
/// roots of F.
cplx s_of_phi(const ModelParams& p, cplx phi);

enum class CharfnKind { F, F0, Q };

/// A characteristic-function value together with its analytic derivative.
///
/// For the scaled evaluators, value and derivative are both multiplied by
/// exp(-log_scale); ratios such as value/derivative are unaffected. The
/// magnitudes term_scale and derivative_scale are the sums of the absolute
/// values of the individual products that make up the function (same
/// scaling) and serve as the reference for relative residuals.
struct CharfnValue {
  cplx value;
  cplx derivative;
  CharfnKind which = CharfnKind::F;
  double log_scale = 0.0;
  double term_scale = 0.0;
  double derivative_scale = 0.0;
};

/// Coefficients of the sorted representation
///   F = -P1 + phi^M P2 + A^{-M} R1 + (A phi)^{-M} R2
/// and their phi-derivatives.
struct SortedTerms {
  cplx P1, P2, R1, R2;
  cplx dP1, dP2, dR1, dR2;
  /// Sums of absolute values of the products combined into each coefficient;
  /// a rounding-error reference that stays meaningful near zeros of P2.
  double P1_mag = 0.0, P2_mag = 0.0, R1_mag = 0.0, R2_mag = 0.0;
};

/// Terms from the 2x2 determinant definitions. `phi_minus_one` must equal
/// phi - 1; passing it separately keeps precision when phi = 1 + z/M.
SortedTerms sorted_terms(const ModelParams& p, cplx phi, cplx phi_minus_one);

/// Same P1, P2 from their expanded forms in terms of S(phi); R1, R2 as above.
SortedTerms sorted_terms_expanded(const ModelParams& p, cplx phi, cplx phi_minus_one);

/// F(phi) and F'(phi). Throws DomainError at phi = 0 (pole of order M).
CharfnValue f_of_phi(const ModelParams& p, cplx phi);
/// F0 = -P1 + phi^M P2, i.e. F without the A^{-M} terms.
CharfnValue f0_of_phi(const ModelParams& p, cplx phi);

/// Overflow-safe variants (see CharfnValue).
CharfnValue f_of_phi_scaled(const ModelParams& p, cplx phi);
CharfnValue f0_of_phi_scaled(const ModelParams& p, cplx phi);

/// F evaluated at phi = 1 + z/M with phi - 1 = z/M held exactly. The
/// derivative is still with respect to phi.
CharfnValue f_of_z(const ModelParams& p, cplx z);
CharfnValue f0_of_z(const ModelParams& p, cplx z);

/// Q(z; kappa) = e^z (1 + z^2/kappa^2) - (1 + z) and dQ/dz.
/// Throws DomainError for kappa = 0.
CharfnValue q_of_z(cplx z, cplx kappa);

/// K^{-3} F(1 + z/M), which tends to Q(z; kappa) as M grows at fixed kappa.
cplx qeps_of_z(const ModelParams& p, cplx z);

/// K^{-3} F(1 + z/M) and its z-derivative K^{-3} F'(phi)/M.
CharfnValue qeps_with_derivative(const ModelParams& p, cplx z);

/// lambda = K z/M + (z^2/M^2)/(1 + z/M); equals lambda_of_phi(1 + z/M).
/// Throws DomainError at the pole z = -M.
cplx lambda_of_z(const ModelParams& p, cplx z);

/// M lambda / K, the rescaled eigenvalue (tends to z as M grows).
cplx rescaled_lambda_of_z(const ModelParams& p, cplx z);

}  // namespace bubbelator
