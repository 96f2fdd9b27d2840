#include <doctest.h>

#include <cmath>

#include "fsde/ensemble.hpp"
#include "fsde/girsanov.hpp"
#include "oracles.hpp"

using namespace fsde;
using namespace fsde::girsanov;

namespace {

// K_H^{-1}(t -> t)(s) = c_H s^{1/2-H} with c_H = Gamma(3/2-H) / (Gamma(2-2H) kappa_H).
double linear_inverse_coeff(double H) {
  return std::tgamma(1.5 - H) / (std::tgamma(2.0 - 2.0 * H) * oracle::kappa(H));
}

sde::SolutionPath euler_path(const std::string& key, double x0, const fbm::FbmPath& B) {
  return sde::euler_solve(sde::library(key), Vector::Constant(1, x0), B);
}

bool within(const Estimate& e, double target, double k = 3.0) {
  return std::abs(e.value - target) <= k * e.standard_error + 1e-12;
}

}  // namespace

TEST_CASE("closed-form inverse of the linear path solves the kernel equation") {
  // int_0^t K_H(t, s) c_H s^{1/2-H} ds = t, checked by quadrature of the hypergeometric kernel.
  for (double H : {0.6, 0.75, 0.9}) {
    const double c = linear_inverse_coeff(H);
    for (double t : {0.3, 1.0, 2.0}) {
      const double lhs = oracle::integrate(
          [&](double s) { return s <= 0.0 ? 0.0 : oracle::kernel_hyp(t, s, H) * c * std::pow(s, 0.5 - H); }, 0.0,
          t, 1e-10);
      CHECK(lhs == doctest::Approx(t).epsilon(1e-7));
    }
  }
  CHECK(oracle::kappa(0.75) * linear_inverse_coeff(0.75) == doctest::Approx(0.69137).epsilon(1e-5));
}

TEST_CASE("decomposition for constant h matches the closed form and has no increment term") {
  const double H = 0.75, mu = 1.0;
  const std::size_t n = 128;
  const auto X = GridFunction::sample(0.0, 1.0, n, [](double t) { return std::sin(3 * t); });
  const auto h = drift_functional("constant", mu);
  const auto D = kh_inverse_decomposed(X, h.h, volterra::Hurst(H));
  CHECK(D.u.undefined_node == std::optional<std::size_t>(0));
  for (std::size_t i = 1; i <= n; ++i) {
    CHECK(D.I3(i) == doctest::Approx(0.0).epsilon(1e-14));
    const double s = X.time(i);
    CHECK(D.u.values(i) == doctest::Approx(mu * linear_inverse_coeff(H) * std::pow(s, 0.5 - H)).epsilon(1e-10));
    // I2 = -C0 s^{1/2-H} h
    CHECK(D.I2(i) < 0.0);
  }
  // agreement with the generic inverse operator applied to int_0^t h = mu t
  const auto Kinv = volterra::operator_KH_inverse(GridFunction::sample(0.0, 1.0, n, [&](double t) { return mu * t; }),
                                                  volterra::Hurst(H));
  for (std::size_t i = n / 4; i <= n; ++i)
    CHECK(Kinv.values(i) == doctest::Approx(D.u.values(i)).epsilon(2e-2));
}

TEST_CASE("decomposition inverts the kernel operator for a nonconstant h") {
  const double H = 0.7;
  const std::size_t n = 256;
  const volterra::Hurst hp(H);
  const auto X = GridFunction::sample(0.0, 1.0, n, [](double t) { return 1.0 + std::sin(4 * t); });
  const auto h = drift_functional("tanh", 0.8);
  const DecompositionPlan plan(1.0, n, hp);
  const auto D = kh_inverse_decomposed(X, h.h, plan);
  const auto kg = volterra::KernelGrid::build(1.0, n, hp);
  GridFunction u(0.0, 1.0, n, 1);
  for (std::size_t i = 0; i < n; ++i) u(i) = D.cell_integrand[i];
  u(n) = D.u.values(n);
  const auto back = volterra::operator_KH(u, kg);
  double target = 0.0, worst = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    target += 0.5 * X.step() * (h.h(Vector::Constant(1, X(i - 1)))[0] + h.h(Vector::Constant(1, X(i)))[0]);
    worst = std::max(worst, std::abs(back(i) - target));
  }
  CHECK(worst < 1e-2);
}

TEST_CASE("zero drift gives the unit weight and R(0) = 1") {
  const DecompositionPlan plan(1.0, 64, volterra::Hurst(0.7));
  const fbm::FbmGenerator gen(fbm::FbmMethod::kernel, 64, 1.0, 1, volterra::Hurst(0.7));
  const auto B = gen.sample(3);
  const auto X = euler_path("lipschitz_bounded_drift", 0.2, B);
  const auto w0 = radon_nikodym(X, B, drift_functional("zero", 0.0).h, plan);
  for (std::size_t i = 0; i <= 64; ++i) CHECK(w0.R(i) == 1.0);
  CHECK(w0.energy == 0.0);
  const auto w = radon_nikodym(X, B, drift_functional("sine", 0.7).h, plan);
  CHECK(w.R(0) == 1.0);
  CHECK(w.log_R(0) == 0.0);
  for (std::size_t i = 0; i <= 64; ++i) CHECK(w.R(i) > 0.0);
}

TEST_CASE("non-kernel generators are rejected") {
  const DecompositionPlan plan(1.0, 32, volterra::Hurst(0.7));
  const auto B = fbm::fbm_circulant(32, 1.0, 1, volterra::Hurst(0.7), 1);
  const auto X = euler_path("bm_unit", 0.0, B);
  CHECK_THROWS(radon_nikodym(X, B, drift_functional("tanh", 1.0).h, plan));
  CHECK_THROWS(drift_functional("cubic", 1.0));
}

TEST_CASE("constant h gives a lognormal weight with the closed-form energy") {
  const double H = 0.75, mu = 0.6, T = 1.5;
  const double energy = mu * mu * std::pow(linear_inverse_coeff(H), 2) * std::pow(T, 2 - 2 * H) / (2 - 2 * H);
  CHECK(constant_h_energy(mu, T, volterra::Hurst(H)) == doctest::Approx(energy).epsilon(1e-12));

  const DecompositionPlan plan(T, 64, volterra::Hurst(H));
  const fbm::FbmGenerator gen(fbm::FbmMethod::kernel, 64, T, 1, volterra::Hurst(H));
  const auto h = drift_functional("constant", mu);
  const auto res = run_ensemble(10000, 5, [&](std::size_t, std::uint64_t s) {
    const auto B = gen.sample(s);
    const auto w = radon_nikodym(euler_path("bm_unit", 0.0, B), B, h.h, plan);
    return std::vector<double>{w.log_R(64), w.energy};
  });
  const auto logR = column(res, 0), en = column(res, 1);
  for (double e : en) CHECK(e == doctest::Approx(energy).epsilon(1e-9));
  // log R_T ~ N(-E/2, E)
  CHECK(oracle::within_se(oracle::mean_se(logR), -0.5 * energy));
  std::vector<double> dev;
  for (double v : logR) dev.push_back((v + 0.5 * energy) * (v + 0.5 * energy));
  CHECK(oracle::within_se(oracle::mean_se(dev), energy));

  GirsanovConfig cfg;
  cfg.H = H;
  cfg.T = T;
  cfg.n = 64;
  cfg.N = 10000;
  cfg.seed = 8;
  const auto r = martingale_check(sde::library("bm_unit"), h, Vector::Zero(1), cfg);
  CHECK(within(r.at("R_T"), 1.0));
  CHECK(within(r.at("R_log_R"), 0.5 * energy));
  CHECK(r.diagnostics.at("min_R") > 0.0);
  CHECK(r.diagnostics.at("flag.mean_deviation") == 0.0);

  const auto ee = exp_energy_check(sde::library("bm_unit"), h, Vector::Zero(1), cfg);
  CHECK(ee.at("exp_energy").value == doctest::Approx(std::exp(cfg.c_exp * energy)).epsilon(1e-9));
  CHECK(ee.diagnostics.at("stability.exp_energy") < 1e-9);
}

TEST_CASE("bounded Lipschitz drift: martingale property and the reweighted fBm law") {
  GirsanovConfig cfg;
  cfg.H = 0.7;
  cfg.n = 64;
  cfg.N = 10000;
  cfg.seed = 2;
  const auto c = sde::library("lipschitz_bounded_drift");
  const auto h = drift_functional("tanh", 0.8);
  const auto m = martingale_check(c, h, Vector::Constant(1, 0.5), cfg);
  CHECK(within(m.at("R_T"), 1.0));
  CHECK(m.diagnostics.at("min_R") > 0.0);
  CHECK(m.diagnostics.at("shape_violations") == 0.0);
  const auto mc = measure_change_check(c, h, Vector::Constant(1, 0.5), cfg);
  CHECK(mc.diagnostics.at("max_abs_z.mean") <= 3.0);
  CHECK(mc.diagnostics.at("max_abs_z.cov") <= 3.0);
  CHECK(mc.diagnostics.at("time[0]") == doctest::Approx(0.25));
  const auto ee = exp_energy_check(c, h, Vector::Constant(1, 0.5), cfg);
  CHECK(std::isfinite(ee.at("exp_energy").value));
  CHECK(ee.diagnostics.at("stability.exp_energy") < 0.1);
}

TEST_CASE("shape certification flags an understated Lipschitz constant") {
  auto h = drift_functional("sine", 2.0);
  CHECK(certify_shape(h, 1, 2000, 1) == 0);
  h.K = 0.5;
  CHECK(certify_shape(h, 1, 2000, 1) > 0);
  CHECK(certify_shape(drift_functional("tanh", 1.0, 3), 3, 500, 2) == 0);
}

TEST_CASE("weight CSV has one row per node") {
  const DecompositionPlan plan(1.0, 16, volterra::Hurst(0.7));
  const fbm::FbmGenerator gen(fbm::FbmMethod::kernel, 16, 1.0, 1, volterra::Hurst(0.7));
  const auto B = gen.sample(1);
  const auto w = radon_nikodym(euler_path("bm_unit", 0.0, B), B, drift_functional("tanh", 1.0).h, plan);
  const auto dir = oracle::temp_dir("weight");
  write_weight_csv(w, dir / "w.csv");
  const auto text = oracle::read_file(dir / "w.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 18);
  std::filesystem::remove_all(dir);
}
