#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace fsde::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

struct Tolerance {
  double relative = 1e-10;
  double absolute = 1e-14;
  std::size_t max_intervals = 2000;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of a bounded integrand.
Result integrate(const std::function<double(double)>& f, double a, double b, Tolerance tol = {});

/// Integral over [a, b] of an integrand that behaves like (x - a)^left_exponent
/// near a and like (b - x)^right_exponent near b (both exponents > -1).
/// Each half of the interval is mapped by x = a + L w^p with p chosen so
/// that the transformed integrand is a polynomial times a smooth function at
/// w = 0, then handed to `integrate`.
Result integrate_singular(const std::function<double(double)>& f, double a, double b,
                          double left_exponent, double right_exponent, Tolerance tol = {});

/// Gauss-Legendre nodes and weights on [-1, 1] (cached per order).
struct GaussRule {
  std::span<const double> nodes;
  std::span<const double> weights;
};
GaussRule gauss_legendre(std::size_t order);

/// Exponent p of the map x = a + L w^p that regularizes (x - a)^exponent.
double grading_power(double exponent);

}  // namespace fsde::quad
