#include <doctest.h>

#include <cmath>
#include <random>

#include "fsde/error.hpp"
#include "fsde/quadrature.hpp"
#include "fsde/special.hpp"
#include "oracles.hpp"

using namespace fsde;

TEST_CASE("gauss_2f1 at z = 0 is one") {
  CHECK(gauss_2f1(0.3, -0.7, 1.4, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gauss_2f1(2.5, 1.5, 3.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gauss_2f1(1,1;2;-1) equals ln 2") {
  CHECK(gauss_2f1(1.0, 1.0, 2.0, -1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  for (double z : {-0.2, -3.0, -40.0})
    CHECK(gauss_2f1(1.0, 1.0, 2.0, z) == doctest::Approx(-std::log1p(-z) / z).epsilon(1e-12));
}

TEST_CASE("gauss_2f1 with b = 0 terminates at one") {
  for (double z : {-0.5, -2.0, -100.0}) CHECK(gauss_2f1(0.7, 0.0, 1.3, z) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gauss_2f1 matches Boost on the kernel parameter family") {
  for (double H : {0.55, 0.6, 0.7, 0.75, 0.9, 0.99})
    for (double z : {-1e-3, -0.1, -0.9, -1.0, -1.5, -7.0, -99.0, -1e4}) {
      const double ours = gauss_2f1(H - 0.5, 0.5 - H, H + 0.5, z);
      const double ref = oracle::hyp2f1(H - 0.5, 0.5 - H, H + 0.5, z);
      CHECK(ours == doctest::Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("gauss_2f1 matches Boost on random parameters") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ua(-1.5, 1.5), ub(0.2, 1.5), ugap(0.2, 2.0), uz(-20.0, 0.0);
  for (int i = 0; i < 200; ++i) {
    const double a = ua(rng), b = ub(rng), c = b + ugap(rng), z = uz(rng);
    const double ref = oracle::hyp2f1(a, b, c, z);
    CHECK(gauss_2f1(a, b, c, z) == doctest::Approx(ref).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("gauss_2f1 rejects positive z and nonpositive integer c") {
  CHECK_THROWS(gauss_2f1(1.0, 1.0, 2.0, 0.5));
  CHECK_THROWS(gauss_2f1(1.0, 1.0, -2.0, -0.5));
}

TEST_CASE("reciprocal_gamma agrees with 1/tgamma and vanishes at poles") {
  for (double x : {0.3, 1.0, 2.5, 7.25, -0.5, -1.5, -2.7}) CHECK(reciprocal_gamma(x) == doctest::Approx(1.0 / std::tgamma(x)).epsilon(1e-13));
  for (double x : {0.0, -1.0, -2.0, -5.0}) CHECK(reciprocal_gamma(x) == 0.0);
}

TEST_CASE("adaptive quadrature on smooth and singular integrands") {
  CHECK(quad::integrate([](double x) { return std::sin(x); }, 0.0, M_PI).value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(quad::integrate_singular([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, -0.5, 0.0).value ==
        doctest::Approx(2.0).epsilon(1e-11));
  CHECK(quad::integrate_singular([](double x) { return std::pow(1.0 - x, -0.7); }, 0.0, 1.0, 0.0, -0.7).value ==
        doctest::Approx(1.0 / 0.3).epsilon(1e-10));
  // Beta function with both endpoints singular.
  const double B = std::tgamma(0.3) * std::tgamma(0.45) / std::tgamma(0.75);
  CHECK(quad::integrate_singular([](double x) { return std::pow(x, -0.7) * std::pow(1 - x, -0.55); }, 0.0, 1.0, -0.7,
                                 -0.55)
            .value == doctest::Approx(B).epsilon(1e-9));
}

TEST_CASE("Gauss-Legendre rules integrate polynomials of degree 2n-1 exactly") {
  for (std::size_t n : {2u, 4u, 8u, 16u}) {
    const auto rule = quad::gauss_legendre(n);
    double wsum = 0.0, moment = 0.0;
    const int deg = static_cast<int>(2 * n - 2);
    for (std::size_t i = 0; i < n; ++i) {
      wsum += rule.weights[i];
      moment += rule.weights[i] * std::pow(rule.nodes[i], deg);
    }
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(moment == doctest::Approx(2.0 / (deg + 1)).epsilon(1e-13));
  }
}
