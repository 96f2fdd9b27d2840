#include "fsde/special.hpp"

#include <cmath>
#include <limits>

#include "fsde/error.hpp"

namespace fsde {
namespace {

constexpr std::size_t kSeriesCap = 100000;
constexpr double kTermRatioStop = 1e-16;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

}  // namespace

double reciprocal_gamma(double x) {
  if (is_nonpositive_integer(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

double hypergeometric_series(double a, double b, double c, double x) {
  require(!is_nonpositive_integer(c), "2F1 parameter c must not be a nonpositive integer");
  double term = 1.0;
  double sum = 1.0;
  for (std::size_t k = 0; k < kSeriesCap; ++k) {
    const auto kd = static_cast<double>(k);
    term *= (a + kd) * (b + kd) / ((c + kd) * (kd + 1.0)) * x;
    sum += term;
    if (term == 0.0) return sum;
    if (std::abs(term) <= kTermRatioStop * std::abs(sum)) {
      // Guard against a transient small term while the ratio is still > 1.
      const double ratio = std::abs((a + kd + 1.0) * (b + kd + 1.0) / ((c + kd + 1.0) * (kd + 2.0)) * x);
      if (ratio < 1.0) return sum;
    }
  }
  throw NumericalError("hypergeometric series did not converge within the iteration cap");
}

double gauss_2f1(double a, double b, double c, double z) {
  require(!is_nonpositive_integer(c), "2F1 parameter c must not be a nonpositive integer");
  require(z <= 0.0 && std::isfinite(z), "gauss_2f1 is implemented for finite z <= 0");
  if (z == 0.0 || a == 0.0 || b == 0.0) return 1.0;
  if (is_nonpositive_integer(a) || is_nonpositive_integer(b)) return hypergeometric_series(a, b, c, z);

  // Pfaff: 2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1)).
  const double w = z / (z - 1.0);
  const double prefactor = std::pow(1.0 - z, -a);
  const double A = a;
  const double B = c - b;
  const double C = c;
  if (w <= 0.5 || is_nonpositive_integer(B)) return prefactor * hypergeometric_series(A, B, C, w);

  const double s = C - A - B;
  if (std::abs(s - std::round(s)) < 1e-9) {
    // Integer c-a-b needs the logarithmic connection formula; the direct
    // series still converges for w < 1.
    return prefactor * hypergeometric_series(A, B, C, w);
  }
  const double one_minus_w = 1.0 / (1.0 - z);
  const double gc = std::tgamma(C);
  const double first = gc * std::tgamma(s) * reciprocal_gamma(C - A) * reciprocal_gamma(C - B) *
                       hypergeometric_series(A, B, A + B - C + 1.0, one_minus_w);
  const double second = std::pow(one_minus_w, s) * gc * std::tgamma(-s) * reciprocal_gamma(A) *
                        reciprocal_gamma(B) * hypergeometric_series(C - A, C - B, s + 1.0, one_minus_w);
  const double value = prefactor * (first + second);
  if (!std::isfinite(value)) throw NumericalError("gauss_2f1 produced a non-finite value");
  return value;
}

}  // namespace fsde
