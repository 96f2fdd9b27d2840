#include <doctest.h>

#include <cmath>
#include <random>

#include "fsde/error.hpp"
#include "fsde/fraccalc.hpp"
#include "fsde/sde.hpp"
#include "oracles.hpp"

using namespace fsde;
using namespace fsde::sde;
using fsde::volterra::Hurst;

namespace {

Vector vec(double x) { return Vector::Constant(1, x); }

double sup_error_geometric(std::size_t n, std::uint64_t seed, Scheme scheme) {
  // Refine one circulant path by sampling on the finest grid and subsampling.
  const std::size_t fine = 2048;
  const auto Bf = fbm::fbm_circulant(fine, 1.0, 1, Hurst(0.75), seed);
  GridFunction coarse(0.0, 1.0, n, 1);
  for (std::size_t i = 0; i <= n; ++i) coarse(i) = Bf.path(i * (fine / n));
  const fbm::FbmPath B{coarse, 0.75, fbm::FbmMethod::circulant, seed, std::nullopt};
  const auto c = library("geometric");
  const auto X = scheme == Scheme::euler ? euler_solve(c, vec(1.0), B) : young_picard_solve(c, vec(1.0), B);
  double err = 0.0;
  for (std::size_t i = 0; i <= n; ++i) err = std::max(err, std::abs(X.X(i) - std::exp(coarse(i))));
  return err;
}

}  // namespace

TEST_CASE("library entries are admissible where declared and certify") {
  CHECK(library_keys().size() >= 8);
  for (const auto& key : library_keys()) {
    CAPTURE(key);
    const auto c = library(key);
    CHECK(c.meta.name == key);
    CHECK(c.meta.admissible_for(c.meta.default_H));
    const auto cert = certify(c, 2000, 3);
    CHECK(cert.checked_pairs == 2000);
    CHECK(cert.ok());
  }
  CHECK(library("holder_bounded_sign").meta.admissible_for(0.75));
  CHECK_FALSE(library("holder_bounded_sign").meta.admissible_for(0.55));
  CHECK_THROWS(library("nope"));
}

TEST_CASE("certification detects understated constants") {
  auto c = library("lipschitz_bounded_drift");
  c.meta.growth_const = 0.1;
  c.meta.holder_const = 0.05;
  const auto cert = certify(c, 2000, 3);
  CHECK(cert.growth_violations > 0);
  CHECK(cert.holder_violations > 0);
  CHECK_FALSE(cert.ok());
  auto d = library("constant");
  d.meta.nondegeneracy = 2.0;
  CHECK(certify(d, 100, 1).nondegeneracy_violations > 0);
}

TEST_CASE("catalog metadata round trips through JSON") {
  const auto cat = library_catalog();
  CHECK(cat.size() == library_keys().size());
  for (const auto& j : cat) {
    const auto m = j.get<CoefficientMetadata>();
    const auto ref = library(m.name).meta;
    CHECK(m.dim == ref.dim);
    CHECK(m.holder_order == ref.holder_order);
    CHECK(m.sigma_sup_bound == ref.sigma_sup_bound);
    CHECK(m.nondegeneracy == ref.nondegeneracy);
    CHECK(nlohmann::json(m) == j);
  }
}

TEST_CASE("Euler is exact for constant coefficients") {
  const auto c = library("constant");
  const auto B = fbm::fbm_cholesky(50, 2.0, 1, Hurst(0.7), 4);
  const auto X = euler_solve(c, vec(0.3), B);
  for (std::size_t i = 0; i <= 50; ++i)
    CHECK(X.X(i) == doctest::Approx(0.3 + 0.5 * B.path.time(i) + 0.8 * B.path(i)).epsilon(1e-13));
  const auto P = young_picard_solve(c, vec(0.3), B);
  for (std::size_t i = 0; i <= 50; ++i) CHECK(P.X(i) == doctest::Approx(X.X(i)).epsilon(1e-12));
  const auto Z = young_picard_solve(c, vec(0.3), B, {.iterations = 0});
  for (std::size_t i = 0; i <= 50; ++i) CHECK(Z.X(i) == 0.3);
}

TEST_CASE("Euler converges to exp(B^H) for sigma(x) = x and Picard is more accurate") {
  std::vector<double> errs;
  for (std::size_t n : {256u, 512u, 1024u, 2048u}) {
    std::vector<double> e;
    for (std::uint64_t s = 0; s < 20; ++s) e.push_back(sup_error_geometric(n, s, Scheme::euler));
    errs.push_back(oracle::median(e));
  }
  for (std::size_t k = 1; k < errs.size(); ++k) CHECK(errs[k - 1] / errs[k] >= 1.3);
  std::vector<double> pe, ee;
  for (std::uint64_t s = 0; s < 20; ++s) {
    pe.push_back(sup_error_geometric(256, s, Scheme::young_picard));
    ee.push_back(sup_error_geometric(256, s, Scheme::euler));
  }
  CHECK(oracle::median(pe) < oracle::median(ee));
}

TEST_CASE("Euler steps with sign drift obey the coefficient bounds") {
  const auto c = library("holder_bounded_sign");
  const fbm::FbmGenerator gen(fbm::FbmMethod::circulant, 256, 1.0, 1, Hurst(0.75));
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto B = gen.sample(s);
    const auto X = euler_solve(c, vec(0.0), B);
    // |b| <= 1 and |sigma| <= 1.5 bound each Euler step
    double tv = 0.0;
    for (std::size_t i = 0; i < 256; ++i) tv += 1.5 * std::abs(B.path(i + 1) - B.path(i));
    CHECK(std::abs(X.X(256)) <= 1.0 + tv + 1e-12);
  }
}

TEST_CASE("non-finite states raise a numerical error with the step index") {
  CoefficientSpec c;
  c.meta.name = "blowup";
  c.drift = [](const Vector& x) { return Vector(x.array().square()); };
  c.diffusion = [](const Vector&) { return Matrix::Zero(1, 1).eval(); };
  const auto B = fbm::fbm_cholesky(16, 1.0, 1, Hurst(0.7), 1);
  try {
    euler_solve(c, vec(10.0), B);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    REQUIRE(e.index().has_value());
    CHECK(*e.index() >= 10);
    CHECK(*e.index() <= 16);
  }
  CHECK_THROWS_AS(euler_solve(library("constant"), Vector::Zero(2), B), std::invalid_argument);
}

TEST_CASE("path statistics and the pathwise ratio match brute-force definitions") {
  const auto B = fbm::fbm_cholesky(200, 1.0, 1, Hurst(0.75), 9);
  const auto X = euler_solve(library("lipschitz_bounded_drift"), vec(0.5), B);
  std::vector<double> t, xv, bv;
  for (std::size_t i = 0; i <= 200; ++i) t.push_back(X.X.time(i)), xv.push_back(X.X(i)), bv.push_back(B.path(i));
  const auto st = path_statistics(X, 0.5, 0.75);
  CHECK(st.holder_seminorm == doctest::Approx(oracle::holder_brute(t, xv, 0.5)));
  double sup = 0.0;
  for (double v : xv) sup = std::max(sup, std::abs(v));
  CHECK(st.sup_norm == sup);
  const double ratio = oracle::holder_brute(t, xv, 0.6) /
                       (1.0 + 0.5 + std::pow(oracle::holder_brute(t, bv, 0.6), 1.0 / 0.6));
  CHECK(pathwise_bound_check(X, B, 0.6) == doctest::Approx(ratio));
  CHECK_THROWS(path_statistics(X, 0.8, 0.75));
}

TEST_CASE("operator norm is the largest singular value") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 20; ++rep) {
    Matrix A(2, 2);
    A << g(rng), g(rng), g(rng), g(rng);
    // closed form for 2x2: s_max^2 = (|A|_F^2 + sqrt(|A|_F^4 - 4 det^2)) / 2
    const double f2 = A.squaredNorm(), det = A.determinant();
    const double smax = std::sqrt(0.5 * (f2 + std::sqrt(f2 * f2 - 4.0 * det * det)));
    CHECK(operator_norm(A) == doctest::Approx(smax).epsilon(1e-12));
  }
  CHECK(operator_norm(Matrix::Identity(3, 3) * 2.5) == doctest::Approx(2.5));
}

TEST_CASE("moment study reproduces the Gaussian moments of B^H") {
  MomentStudyConfig cfg;
  cfg.H = 0.75;
  cfg.T = 1.5;
  cfg.n = 64;
  cfg.N = 4000;
  cfg.seed = 12;
  cfg.beta = 0.6;
  cfg.p_list = {2.0, 4.0};
  const auto r = moment_study(library("bm_unit"), vec(0.0), cfg);
  auto within = [](const Estimate& e, double target) {
    return std::abs(e.value - target) <= 3.0 * e.standard_error;
  };
  CHECK(within(r.at("terminal_p2"), std::pow(1.5, 1.5)));
  CHECK(within(r.at("terminal_p4"), 3.0 * std::pow(1.5, 3.0)));
  CHECK(r.diagnostics.at("blowups") == 0.0);
  CHECK(r.estimates.count("exp_holder") == 1);
  CHECK(r.diagnostics.count("ratio_max") == 1);

  const auto again = moment_study(library("bm_unit"), vec(0.0), cfg, Exec::serial);
  CHECK(again.to_json() == r.to_json());
  // unbounded sigma: no exponential moment
  const auto g = moment_study(library("geometric"), vec(1.0), cfg);
  CHECK(g.estimates.count("exp_holder") == 0);
}
