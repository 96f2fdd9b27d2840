#include "fsde/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "fsde/ensemble.hpp"
#include "fsde/error.hpp"
#include "fsde/quadrature.hpp"
#include "fsde/rng.hpp"

namespace fsde::girsanov {
namespace {

constexpr std::size_t kGaussOrder = 8;

bool same_grid_as_plan(const GridFunction& X, const DecompositionPlan& plan) {
  return X.t_start() == 0.0 && X.n_intervals() == plan.n_intervals() &&
         std::abs(X.t_end() - plan.horizon()) <= 1e-12 * plan.horizon();
}

Vector node_vector(const GridFunction& f, std::size_t i) {
  Vector v(f.dim());
  for (std::size_t k = 0; k < f.dim(); ++k) v[k] = f(i, k);
  return v;
}

std::vector<double> times_or_default(const GirsanovConfig& cfg) {
  if (!cfg.times.empty()) return cfg.times;
  return {0.25 * cfg.T, 0.5 * cfg.T, 0.75 * cfg.T, cfg.T};
}

std::string indexed(const std::string& key, std::size_t k) { return key + "[" + std::to_string(k) + "]"; }

}  // namespace

DriftFunctional drift_functional(const std::string& key, double mu, std::size_t dim) {
  require(dim >= 1, "dimension must be positive");
  require(std::isfinite(mu), "drift functional amplitude must be finite");
  DriftFunctional f;
  f.name = key;
  const auto d = static_cast<Eigen::Index>(dim);
  if (key == "zero") {
    f.h = [d](const Vector&) { return Vector::Zero(d); };
    f.bounded = true;
  } else if (key == "constant") {
    f.h = [d, mu](const Vector&) { return Vector::Constant(d, mu); };
    f.bounded = true;
  } else if (key == "tanh") {
    f.h = [mu](const Vector& x) { return Vector(mu * x.array().tanh()); };
    f.K = std::abs(mu);
    f.bounded = true;
  } else if (key == "sine") {
    f.h = [mu](const Vector& x) { return Vector(mu * x.array().sin()); };
    f.K = std::abs(mu);
    f.bounded = true;
  } else {
    throw std::invalid_argument("unknown drift functional '" + key + "' (expected zero, constant, tanh or sine)");
  }
  return f;
}

std::size_t certify_shape(const DriftFunctional& h, std::size_t dim, std::size_t pairs, std::uint64_t seed,
                          double radius) {
  Stream stream(seed, {static_cast<std::uint64_t>(StreamTag::certification), 1});
  const auto d = static_cast<Eigen::Index>(dim);
  std::size_t violations = 0;
  for (std::size_t p = 0; p < pairs; ++p) {
    Vector x(d), y(d);
    for (Eigen::Index k = 0; k < d; ++k) x[k] = stream.uniform(-radius, radius);
    const double scale = p % 2 == 0 ? radius : radius * std::pow(10.0, -stream.uniform(1.0, 5.0));
    for (Eigen::Index k = 0; k < d; ++k) y[k] = x[k] + stream.uniform(-scale, scale);
    const double lhs = (h.h(x) - h.h(y)).norm();
    const double rhs =
        h.K * std::pow((x - y).norm(), h.lambda) * (1.0 + std::pow(x.norm(), h.p) + std::pow(y.norm(), h.p));
    if (lhs > rhs * (1.0 + 1e-12) + 1e-14) ++violations;
  }
  return violations;
}

DecompositionPlan::DecompositionPlan(double T, std::size_t n, Hurst H)
    : T_(T), n_(n), H_(H), c0_(volterra::c0_constant(H)) {
  require(T > 0.0 && n >= 2, "DecompositionPlan needs T > 0 and n >= 2");
  const double h = T / static_cast<double>(n);
  const double mu = 0.5 - H_;
  const double nu = -0.5 - H_;
  prefactor_ = (H_ - 0.5) / std::tgamma(1.5 - H_) / volterra::kernel_normalization(H);
  cell_power_rms_.resize(n);
  const double e = 2.0 * mu + 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto jd = static_cast<double>(j);
    cell_power_rms_[j] = std::pow(h, mu) * std::sqrt((std::pow(jd + 1.0, e) - std::pow(jd, e)) / e);
  }
  // Weights on the unit grid; the substitution r = h x contributes h^{1-2H}.
  const double scale = std::pow(h, 1.0 - 2.0 * H_);
  const std::size_t total = offset(n + 1);
  left_.assign(total, 0.0);
  right_.assign(total, 0.0);
  const auto rule = quad::gauss_legendre(kGaussOrder);
  const quad::Tolerance tol{1e-11, 1e-15, 2000};
  for_each_index(n, [&](std::size_t im1) {
    const std::size_t i = im1 + 1;
    const auto id = static_cast<double>(i);
    auto w = [&](double x) { return std::pow(id - x, nu) * std::pow(x, mu); };
    for (std::size_t j = 0; j < i; ++j) {
      const auto jd = static_cast<double>(j);
      auto phiL = [&](double x) { return (jd + 1.0 - x) * w(x); };
      auto phiR = [&](double x) { return (x - jd) * w(x); };
      double P, Q;
      if (j == 0 || j + 1 == i) {
        const double le = j == 0 ? mu : 0.0;
        P = quad::integrate_singular(phiL, jd, jd + 1.0, le, j + 1 == i ? nu + 1.0 : 0.0, tol).value;
        Q = j + 1 == i ? 0.0 : quad::integrate_singular(phiR, jd, jd + 1.0, le + 1.0, 0.0, tol).value;
      } else {
        P = Q = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
          const double x = jd + 0.5 * (1.0 + rule.nodes[k]);
          P += 0.5 * rule.weights[k] * phiL(x);
          Q += 0.5 * rule.weights[k] * phiR(x);
        }
      }
      left_[offset(i) + j] = scale * P;
      right_[offset(i) + j] = scale * Q;
    }
  });
}

double DecompositionPlan::increment_integral(std::size_t i, const double* g, std::size_t stride) const {
  if (i == 0) return 0.0;
  const double gi = g[i * stride];
  const double* P = left_.data() + offset(i);
  const double* Q = right_.data() + offset(i);
  double acc = 0.0;
  for (std::size_t j = 0; j < i; ++j) acc += (gi - g[j * stride]) * P[j] + (gi - g[(j + 1) * stride]) * Q[j];
  return acc;
}

Decomposition kh_inverse_decomposed(const GridFunction& X, const VectorField& h, const DecompositionPlan& plan) {
  require(same_grid_as_plan(X, plan), "kh_inverse_decomposed: path grid differs from the plan");
  const std::size_t n = X.n_intervals();
  const std::size_t d = X.dim();
  const double H = plan.hurst();
  const double mu = 0.5 - H;

  GridFunction hv(0.0, X.t_end(), n, d);
  for (std::size_t i = 0; i <= n; ++i) {
    const Vector v = h(node_vector(X, i));
    if (static_cast<std::size_t>(v.size()) != d) throw std::invalid_argument("drift functional has wrong dimension");
    if (!v.allFinite()) throw NumericalError("drift functional is non-finite at a grid state", i);
    for (std::size_t k = 0; k < d; ++k) hv(i, k) = v[k];
  }

  Decomposition out{{GridFunction(0.0, X.t_end(), n, d), std::size_t{0}},
                    GridFunction(0.0, X.t_end(), n, d),
                    GridFunction(0.0, X.t_end(), n, d),
                    GridFunction(0.0, X.t_end(), n, d),
                    std::vector<double>(n * d, 0.0)};
  const double a1 = 1.0 / (H - 0.5);
  const double c0 = plan.c0();
  const double pre = plan.prefactor();
  const double* hdata = hv.values().data();
  for (std::size_t i = 1; i <= n; ++i) {
    const double s = X.time(i);
    const double sp = std::pow(s, mu);
    const double sq = std::pow(s, -mu);
    for (std::size_t k = 0; k < d; ++k) {
      out.I1(i, k) = a1 * sp * hv(i, k);
      out.I2(i, k) = -c0 * sp * hv(i, k);
      out.I3(i, k) = sq * plan.increment_integral(i, hdata + k, d);
      out.u.values(i, k) = pre * (out.I1(i, k) + out.I2(i, k) + out.I3(i, k));
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < d; ++k)
      out.cell_integrand[j * d + k] = pre * ((a1 - c0) * plan.cell_power_rms(j) * hv(j, k) + out.I3(j, k));
  return out;
}

Decomposition kh_inverse_decomposed(const GridFunction& X, const VectorField& h, Hurst H) {
  require(X.t_start() == 0.0, "kh_inverse_decomposed requires a grid starting at 0");
  return kh_inverse_decomposed(X, h, DecompositionPlan(X.t_end(), X.n_intervals(), H));
}

WeightPath radon_nikodym(const sde::SolutionPath& X, const fbm::BrownianPath& W, const VectorField& h,
                         const DecompositionPlan& plan) {
  require(X.X.same_grid(W.path) && X.X.dim() == W.path.dim(), "radon_nikodym: path and Wiener grids differ");
  Decomposition dec = kh_inverse_decomposed(X.X, h, plan);
  const std::size_t n = X.X.n_intervals();
  const std::size_t d = X.X.dim();
  const double dt = X.X.step();
  WeightPath w{GridFunction(0.0, X.X.t_end(), n, 1), GridFunction(0.0, X.X.t_end(), n, 1), std::move(dec.u),
               std::move(dec.cell_integrand), 0.0};
  double log_r = 0.0;
  double energy = 0.0;
  w.R(0) = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    double dot = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double u = w.cell_integrand[j * d + k];
      dot += u * (W.path(j + 1, k) - W.path(j, k));
      sq += u * u;
    }
    log_r += dot - 0.5 * sq * dt;
    energy += sq * dt;
    w.log_R(j + 1) = log_r;
    w.R(j + 1) = std::exp(log_r);
  }
  w.energy = energy;
  return w;
}

WeightPath radon_nikodym(const sde::SolutionPath& X, const fbm::FbmPath& B, const VectorField& h,
                         const DecompositionPlan& plan) {
  require(B.wiener.has_value(), "radon_nikodym needs the Wiener path; use the kernel fBm generator");
  return radon_nikodym(X, *B.wiener, h, plan);
}

void write_weight_csv(const WeightPath& w, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const GridFunction& u = w.u.values;
  const std::size_t n = u.n_intervals();
  const std::size_t d = u.dim();
  out << "t";
  for (std::size_t k = 0; k < d; ++k) out << ",u_" << k + 1;
  out << ",log_R\n" << std::setprecision(17);
  for (std::size_t i = 0; i <= n; ++i) {
    out << u.time(i);
    for (std::size_t k = 0; k < d; ++k) out << ',' << (i < n ? w.cell_integrand[i * d + k] : u(i, k));
    out << ',' << w.log_R(i) << '\n';
  }
}

double constant_h_energy(double mu, double T, Hurst H) {
  const double h = H;
  const double g = std::tgamma(1.5 - h) / std::tgamma(2.0 - 2.0 * h);
  const double kappa = volterra::kernel_normalization(H);
  return mu * mu * g * g * std::pow(T, 2.0 - 2.0 * h) / ((2.0 - 2.0 * h) * kappa * kappa);
}

namespace {

struct Setup {
  fbm::FbmGenerator gen;
  DecompositionPlan plan;
};

Setup make_setup(const sde::CoefficientSpec& c, const Vector& x0, const GirsanovConfig& cfg) {
  require(static_cast<std::size_t>(x0.size()) == c.meta.dim, "initial value dimension differs from coefficients");
  require(cfg.N >= 2, "ensemble needs N >= 2");
  return {fbm::FbmGenerator(fbm::FbmMethod::kernel, cfg.n, cfg.T, c.meta.dim, Hurst(cfg.H)),
          DecompositionPlan(cfg.T, cfg.n, Hurst(cfg.H))};
}

MonteCarloReport base_report(const std::string& study, const GirsanovConfig& cfg,
                             const std::vector<ReplicaResult>& results) {
  MonteCarloReport r;
  r.study = study;
  r.N = cfg.N;
  r.seed = cfg.seed;
  r.failures = failed_indices(results);
  return r;
}

double z_score(double deviation, double se) { return se > 0.0 ? deviation / se : (deviation == 0.0 ? 0.0 : 1e300); }

}  // namespace

MonteCarloReport martingale_check(const sde::CoefficientSpec& c, const DriftFunctional& h, const Vector& x0,
                                  const GirsanovConfig& cfg, Exec exec) {
  const Setup setup = make_setup(c, x0, cfg);
  auto results = run_ensemble(
      cfg.N, cfg.seed,
      [&](std::size_t, std::uint64_t seed) {
        const fbm::FbmPath B = setup.gen.sample(seed);
        const sde::SolutionPath X = sde::euler_solve(c, x0, B);
        const WeightPath w = radon_nikodym(X, B, h.h, setup.plan);
        const double RT = w.R(cfg.n);
        const double min_R = *std::min_element(w.R.values().begin(), w.R.values().end());
        return std::vector<double>{RT, RT * w.log_R(cfg.n), w.energy, min_R};
      },
      exec);
  MonteCarloReport r = base_report("girsanov.martingale", cfg, results);
  r.estimates["R_T"] = mean_estimate(column(results, 0));
  r.estimates["R_log_R"] = mean_estimate(column(results, 1));
  r.estimates["energy"] = mean_estimate(column(results, 2));
  const std::vector<double> mins = column(results, 3);
  r.diagnostics["min_R"] = mins.empty() ? 0.0 : *std::min_element(mins.begin(), mins.end());
  const Estimate& e = r.estimates["R_T"];
  const double z = z_score(e.value - 1.0, e.standard_error);
  r.diagnostics["z.R_T"] = z;
  r.diagnostics["flag.mean_deviation"] = std::abs(z) > 3.0 ? 1.0 : 0.0;
  r.diagnostics["shape_violations"] = static_cast<double>(certify_shape(h, c.meta.dim, 1000, cfg.seed));
  return r;
}

MonteCarloReport measure_change_check(const sde::CoefficientSpec& c, const DriftFunctional& h, const Vector& x0,
                                      const GirsanovConfig& cfg, Exec exec) {
  const Setup setup = make_setup(c, x0, cfg);
  const std::vector<double> times = times_or_default(cfg);
  std::vector<std::size_t> nodes;
  for (double t : times) {
    require(t > 0.0 && t <= cfg.T, "comparison times must lie in (0, T]");
    nodes.push_back(static_cast<std::size_t>(std::llround(t / cfg.T * static_cast<double>(cfg.n))));
  }
  const std::size_t m = nodes.size();
  // Columns: R_T, then R_T * Bt_k, then R_T * Bt_k * Bt_l for k <= l.
  auto results = run_ensemble(
      cfg.N, cfg.seed,
      [&](std::size_t, std::uint64_t seed) {
        const fbm::FbmPath B = setup.gen.sample(seed);
        const sde::SolutionPath X = sde::euler_solve(c, x0, B);
        const WeightPath w = radon_nikodym(X, B, h.h, setup.plan);
        const double dt = X.X.step();
        std::vector<double> tilde(cfg.n + 1, 0.0);
        double integral = 0.0;
        double prev = h.h(node_vector(X.X, 0))[0];
        for (std::size_t i = 1; i <= cfg.n; ++i) {
          const double cur = h.h(node_vector(X.X, i))[0];
          integral += 0.5 * (prev + cur) * dt;
          prev = cur;
          tilde[i] = B.path(i, 0) - integral;
        }
        const double RT = w.R(cfg.n);
        std::vector<double> out{RT};
        for (std::size_t k = 0; k < m; ++k) out.push_back(RT * tilde[nodes[k]]);
        for (std::size_t k = 0; k < m; ++k)
          for (std::size_t l = k; l < m; ++l) out.push_back(RT * tilde[nodes[k]] * tilde[nodes[l]]);
        return out;
      },
      exec);
  MonteCarloReport r = base_report("girsanov.measure_change", cfg, results);
  r.estimates["R_T"] = mean_estimate(column(results, 0));
  double max_z_mean = 0.0, max_z_cov = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const Estimate e = mean_estimate(column(results, 1 + k));
    r.estimates[indexed("mean", k)] = e;
    const double z = z_score(e.value, e.standard_error);
    r.diagnostics[indexed("z.mean", k)] = z;
    max_z_mean = std::max(max_z_mean, std::abs(z));
  }
  std::size_t col = 1 + m;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = k; l < m; ++l, ++col) {
      const Estimate e = mean_estimate(column(results, col));
      const std::string key = "cov[" + std::to_string(k) + "," + std::to_string(l) + "]";
      r.estimates[key] = e;
      const double target = volterra::fbm_covariance(times[k], times[l], Hurst(cfg.H));
      const double z = z_score(e.value - target, e.standard_error);
      r.diagnostics["z." + key] = z;
      max_z_cov = std::max(max_z_cov, std::abs(z));
    }
  }
  for (std::size_t k = 0; k < m; ++k) r.diagnostics[indexed("time", k)] = times[k];
  r.diagnostics["max_abs_z.mean"] = max_z_mean;
  r.diagnostics["max_abs_z.cov"] = max_z_cov;
  return r;
}

MonteCarloReport exp_energy_check(const sde::CoefficientSpec& c, const DriftFunctional& h, const Vector& x0,
                                  const GirsanovConfig& cfg, Exec exec) {
  const Setup setup = make_setup(c, x0, cfg);
  auto results = run_ensemble(
      cfg.N, cfg.seed,
      [&](std::size_t, std::uint64_t seed) {
        const fbm::FbmPath B = setup.gen.sample(seed);
        const sde::SolutionPath X = sde::euler_solve(c, x0, B);
        const WeightPath w = radon_nikodym(X, B, h.h, setup.plan);
        return std::vector<double>{std::exp(cfg.c_exp * w.energy), w.energy};
      },
      exec);
  MonteCarloReport r = base_report("girsanov.exp_energy", cfg, results);
  const Estimate full = mean_estimate(column(results, 0));
  const Estimate half = mean_estimate(column(results, 0, 0, cfg.N / 2));
  r.estimates["exp_energy"] = full;
  r.estimates["energy"] = mean_estimate(column(results, 1));
  r.diagnostics["stability.exp_energy"] = relative_change(half.value, full.value);
  r.diagnostics["c_exp"] = cfg.c_exp;
  return r;
}

}  // namespace fsde::girsanov
