#pragma once

namespace stableop {

/// One-dimensional normalization constant
///   c_s = 2 * integral_0^inf (1 - cos t) t^{-1-2s} dt,
/// computed by adaptive quadrature (relative error <= 1e-10; in practice
/// ~1e-13).  c_{1/2} = pi.  Throws InvalidOrder unless 0 < s < 1.
double normalization_constant(double s);

/// Classical closed form cos(pi s) Gamma(2-2s) / (s (1-2s)), continued by its
/// limit pi at s = 1/2.  Used as an independent cross-check in tests; the
/// library itself uses the quadrature value.
double normalization_constant_closed_form(double s);

}  // namespace stableop
