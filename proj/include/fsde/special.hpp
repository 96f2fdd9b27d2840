#pragma once

namespace fsde {

/// 1 / Gamma(x), with zeros at the poles x = 0, -1, -2, ...
double reciprocal_gamma(double x);

/// Gauss hypergeometric function 2F1(a, b; c; z) for z <= 0.
///
/// The Pfaff transformation maps z <= 0 to w = z / (z - 1) in [0, 1). For
/// w <= 1/2 the power series in w is summed directly; for w > 1/2 the
/// connection formula to 1 - w is applied first so that every series
/// converges at least like 2^-k. Throws NumericalError when a series fails
/// to converge within the iteration cap.
double gauss_2f1(double a, double b, double c, double z);

/// Plain hypergeometric series sum for |x| < 1 (term-ratio stopping at
/// 1e-16, cap 1e5 terms).
double hypergeometric_series(double a, double b, double c, double x);

}  // namespace fsde
