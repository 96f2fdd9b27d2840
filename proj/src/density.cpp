#include "fsde/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>

#include "fsde/ensemble.hpp"
#include "fsde/error.hpp"
#include "fsde/rng.hpp"

namespace fsde::density {
namespace {

Vector node_vector(const GridFunction& f, std::size_t i) {
  Vector v(f.dim());
  for (std::size_t k = 0; k < f.dim(); ++k) v[k] = f(i, k);
  return v;
}

std::size_t steps_for(double eps, double h, std::size_t n) {
  const double ratio = eps / h;
  const auto m = static_cast<std::size_t>(std::llround(ratio));
  require(eps > 0.0 && m >= 1 && m <= n && std::abs(ratio - static_cast<double>(m)) <= 1e-9 * ratio,
          "eps must be a positive multiple of the grid step not larger than T");
  return m;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

OneStepGaussian one_step_euler(const sde::SolutionPath& X, const fbm::FbmPath& B, double eps,
                               const sde::CoefficientSpec& c, const volterra::KernelGrid& kg) {
  require(B.wiener.has_value(), "one_step_euler needs the Wiener path; use the kernel fBm generator");
  require(kg.matches(X.X) && X.X.same_grid(B.path), "one_step_euler: grids differ");
  const GridFunction& W = B.wiener->path;
  const std::size_t n = X.X.n_intervals();
  const std::size_t m = steps_for(eps, kg.step(), n);
  const std::size_t anchor = n - m;
  OneStepGaussian g;
  g.eta = node_vector(X.X, anchor);
  const sde::Matrix sigma = c.diffusion(g.eta);
  Vector past = Vector::Zero(static_cast<Eigen::Index>(X.X.dim()));
  for (std::size_t j = 0; j < anchor; ++j) {
    const double w = kg.weight(n, j) - kg.weight(anchor, j);
    for (std::size_t k = 0; k < X.X.dim(); ++k) past[k] += w * (W(j + 1, k) - W(j, k));
  }
  g.xi = g.eta + sigma * past;
  g.v_eps = volterra::kernel_tail_energy(kg.horizon(), eps, volterra::Hurst(kg.hurst()));
  g.cov = g.v_eps * sigma * sigma.transpose();
  return g;
}

Vector sample_Y(const OneStepGaussian& g, std::uint64_t seed) {
  const Eigen::Index d = g.xi.size();
  require(g.cov.rows() == d && g.cov.cols() == d, "sample_Y: covariance shape mismatch");
  const Matrix sym = 0.5 * (g.cov + g.cov.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  Vector lam = eig.eigenvalues();
  const double top = std::max(lam.maxCoeff(), 0.0);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (lam[k] < -1e-12 * std::max(top, 1.0)) throw NumericalError("covariance is not positive semidefinite");
    lam[k] = std::sqrt(std::max(lam[k], 0.0));
  }
  const Matrix root = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
  Stream stream(seed, {static_cast<std::uint64_t>(StreamTag::gaussian)});
  Vector z(d);
  for (Eigen::Index k = 0; k < d; ++k) z[k] = stream.normal();
  return g.xi + root * z;
}

MonteCarloReport approx_error_study(const sde::CoefficientSpec& c, const Vector& x0, const ApproxStudyConfig& cfg,
                                    Exec exec) {
  const double gamma = c.meta.holder_order;
  const double beta = cfg.beta.value_or(0.5 * (1.0 / (1.0 + gamma) + cfg.H));
  require(beta >= 1.0 / (1.0 + gamma) && beta < cfg.H, "beta must lie in [1/(1+gamma), H)");
  require(cfg.eps_fractions.size() >= 2, "approx_error_study needs at least two eps values");
  const double h = cfg.T / static_cast<double>(cfg.n);
  std::vector<std::size_t> steps;
  for (double f : cfg.eps_fractions) {
    require(f > 0.0 && f <= 0.5, "eps fractions must lie in (0, 1/2]");
    steps.push_back(steps_for(f * cfg.T, h, cfg.n));
  }
  const fbm::FbmGenerator gen(fbm::FbmMethod::kernel, cfg.n, cfg.T, c.meta.dim, Hurst(cfg.H));
  auto results = run_ensemble(
      cfg.N, cfg.seed,
      [&](std::size_t, std::uint64_t seed) {
        const fbm::FbmPath B = gen.sample(seed);
        const sde::SolutionPath X = sde::euler_solve(c, x0, B);
        std::vector<double> out;
        for (std::size_t m : steps) {
          const std::size_t anchor = cfg.n - m;
          const Matrix s_eta = c.diffusion(node_vector(X.X, anchor));
          Vector diff = Vector::Zero(x0.size());
          for (std::size_t i = anchor; i < cfg.n; ++i) {
            const Vector xi = node_vector(X.X, i);
            const Vector dB = node_vector(B.path, i + 1) - node_vector(B.path, i);
            diff += c.drift(xi) * h + (c.diffusion(xi) - s_eta) * dB;
          }
          out.push_back(diff.norm());
        }
        return out;
      },
      exec);
  MonteCarloReport r;
  r.study = "density.approx_error";
  r.N = cfg.N;
  r.seed = cfg.seed;
  r.failures = failed_indices(results);
  std::vector<double> lx, ly;
  bool all_zero = true, any_zero = false;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const Estimate e = mean_estimate(column(results, k));
    r.estimates["error[" + std::to_string(k) + "]"] = e;
    r.diagnostics["eps[" + std::to_string(k) + "]"] = cfg.eps_fractions[k] * cfg.T;
    all_zero = all_zero && e.value == 0.0;
    any_zero = any_zero || e.value == 0.0;
    lx.push_back(std::log(cfg.eps_fractions[k] * cfg.T));
    ly.push_back(std::log(e.value));
  }
  r.diagnostics["all_zero"] = all_zero ? 1.0 : 0.0;
  if (!any_zero) r.diagnostics["slope"] = least_squares_slope(lx, ly);
  r.diagnostics["beta"] = beta;
  r.diagnostics["predicted_slope"] = std::min(1.0, (gamma + 1.0) * beta);
  return r;
}

MonteCarloReport characteristic_function_check(const sde::CoefficientSpec& c, const Vector& x0, double H, double T,
                                               std::size_t n, std::size_t N, std::uint64_t seed, double eps,
                                               const std::vector<double>& u_grid, Exec exec) {
  require(c.meta.dim == 1, "characteristic_function_check supports scalar problems");
  require(!u_grid.empty(), "u grid must be nonempty");
  const fbm::FbmGenerator gen(fbm::FbmMethod::kernel, n, T, 1, Hurst(H));
  const volterra::KernelGrid& kg = *gen.kernel_grid();
  const std::size_t m = steps_for(eps, kg.step(), n);
  const double v_eps = volterra::kernel_tail_energy(T, eps, Hurst(H));
  auto results = run_ensemble(
      N, seed,
      [&](std::size_t, std::uint64_t s) {
        const fbm::FbmPath B = gen.sample(s);
        const sde::SolutionPath X = sde::euler_solve(c, x0, B);
        const OneStepGaussian g = one_step_euler(X, B, eps, c, kg);
        const double sig = c.diffusion(g.eta)(0, 0);
        const double Y = g.eta[0] + sig * (B.path(n) - B.path(n - m));
        std::vector<double> out;
        for (double u : u_grid) {
          const double damp = std::exp(-0.5 * u * u * sig * sig * v_eps);
          const double dre = std::cos(u * Y), dim = std::sin(u * Y);
          const double cre = damp * std::cos(u * g.xi[0]), cim = damp * std::sin(u * g.xi[0]);
          out.insert(out.end(), {dre, dim, cre, cim, dre - cre, dim - cim});
        }
        return out;
      },
      exec);
  MonteCarloReport r;
  r.study = "density.characteristic_function";
  r.N = N;
  r.seed = seed;
  r.failures = failed_indices(results);
  const char* names[6] = {"direct.re", "direct.im", "conditional.re", "conditional.im", "diff.re", "diff.im"};
  double max_z = 0.0;
  for (std::size_t k = 0; k < u_grid.size(); ++k) {
    for (std::size_t q = 0; q < 6; ++q) {
      const Estimate e = mean_estimate(column(results, 6 * k + q));
      r.estimates[std::string(names[q]) + "[" + std::to_string(k) + "]"] = e;
      if (q >= 4) {
        const double z = e.standard_error > 0.0 ? e.value / e.standard_error : 0.0;
        r.diagnostics["z." + std::string(names[q]) + "[" + std::to_string(k) + "]"] = z;
        max_z = std::max(max_z, std::abs(z));
      }
    }
    r.diagnostics["u[" + std::to_string(k) + "]"] = u_grid[k];
  }
  r.diagnostics["max_abs_z"] = max_z;
  r.diagnostics["v_eps"] = v_eps;
  return r;
}

ComplexFunction difference_operator(ComplexFunction phi, Vector h, int m) {
  require(m >= 1, "difference order must be at least 1");
  return [phi = std::move(phi), h = std::move(h), m](const Vector& x) {
    std::complex<double> acc = 0.0;
    double binom = 1.0;
    for (int k = 0; k <= m; ++k) {
      const double sign = (m - k) % 2 == 0 ? 1.0 : -1.0;
      acc += sign * binom * phi(x + static_cast<double>(k) * h);
      binom = binom * static_cast<double>(m - k) / static_cast<double>(k + 1);
    }
    return acc;
  };
}

nlohmann::json BesovProbeReport::to_json() const {
  return {{"m", m},
          {"alpha_test", alpha_test},
          {"levels", levels},
          {"h_values", h_values},
          {"sup_stats", sup_stats},
          {"ci_low", ci_low},
          {"ci_high", ci_high},
          {"fitted_slope", fitted_slope},
          {"slope_ci_low", slope_ci_low},
          {"slope_ci_high", slope_ci_high}};
}

BesovProbeReport besov_probe(const std::vector<Vector>& samples, const BesovProbeOptions& options) {
  require(samples.size() >= 100, "besov_probe needs at least 100 samples");
  require(options.m >= 1, "difference order must be at least 1");
  require(options.alpha_test > 0.0 && options.alpha_test < 1.0 && options.alpha_test < options.m,
          "alpha_test must lie in (0, 1) and below m");
  require(options.h_grid.size() >= 2, "h grid needs at least two values");
  for (double h : options.h_grid) require(h > 0.0 && h <= 1.0, "h values must lie in (0, 1]");
  const auto d = samples.front().size();
  Vector dir = options.direction.value_or(Vector::Unit(d, 0));
  require(dir.size() == d && dir.norm() > 0.0, "direction must be a nonzero vector of the sample dimension");
  dir /= dir.norm();

  const double h_min = *std::min_element(options.h_grid.begin(), options.h_grid.end());
  const int J = options.levels.value_or(static_cast<int>(std::ceil(std::log2(1.0 / h_min))) + 1);
  require(J >= 0 && J < 40, "frequency levels out of range");
  const std::size_t K = static_cast<std::size_t>(J) + 1;
  const std::size_t N = samples.size();

  std::vector<double> proj(N);
  for (std::size_t i = 0; i < N; ++i) {
    require(samples[i].size() == d && samples[i].allFinite(), "samples must be finite and of equal dimension");
    proj[i] = dir.dot(samples[i]);
  }
  std::vector<double> freq(K);
  for (std::size_t k = 0; k < K; ++k) freq[k] = std::ldexp(1.0, static_cast<int>(k));

  // For phi(x) = k^-alpha cos(k p + theta):
  // mean_i Delta^m phi(x_i) = k^-alpha Re[e^{i theta} (e^{i k h} - 1)^m mean_i e^{i k p_i}],
  // whose sup over theta is the modulus.
  auto statistic = [&](const std::vector<std::complex<double>>& mean_phase, double h) {
    double best = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const std::complex<double> shift = std::pow(std::polar(1.0, freq[k] * h) - 1.0, options.m);
      best = std::max(best, std::pow(freq[k], -options.alpha_test) * std::abs(shift * mean_phase[k]));
    }
    return best;
  };
  auto phases = [&](const std::vector<std::size_t>* index) {
    std::vector<std::complex<double>> out(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double p = proj[index ? (*index)[i] : i];
        re += std::cos(freq[k] * p);
        im += std::sin(freq[k] * p);
      }
      out[k] = {re / static_cast<double>(N), im / static_cast<double>(N)};
    }
    return out;
  };
  std::vector<double> log_h;
  for (double h : options.h_grid) log_h.push_back(std::log(h));
  auto slope_of = [&](const std::vector<double>& stats) {
    std::vector<double> ly;
    for (double s : stats) ly.push_back(std::log(std::max(s, std::numeric_limits<double>::min())));
    return least_squares_slope(log_h, ly);
  };

  BesovProbeReport rep;
  rep.m = options.m;
  rep.alpha_test = options.alpha_test;
  rep.levels = J;
  rep.h_values = options.h_grid;
  const auto base = phases(nullptr);
  for (double h : options.h_grid) rep.sup_stats.push_back(statistic(base, h));
  rep.fitted_slope = slope_of(rep.sup_stats);

  const std::size_t B = options.bootstrap;
  if (B >= 2) {
    std::vector<std::vector<double>> boot_stats(options.h_grid.size(), std::vector<double>(B));
    std::vector<double> boot_slopes(B);
    for_each_index(B, [&](std::size_t b) {
      Stream stream(options.seed, {static_cast<std::uint64_t>(StreamTag::bootstrap), b});
      std::vector<std::size_t> idx(N);
      for (auto& v : idx) v = static_cast<std::size_t>(stream.uniform() * static_cast<double>(N));
      const auto ph = phases(&idx);
      std::vector<double> stats;
      for (std::size_t q = 0; q < options.h_grid.size(); ++q) {
        stats.push_back(statistic(ph, options.h_grid[q]));
        boot_stats[q][b] = stats.back();
      }
      boot_slopes[b] = slope_of(stats);
    });
    for (const auto& s : boot_stats) {
      rep.ci_low.push_back(percentile(s, 0.025));
      rep.ci_high.push_back(percentile(s, 0.975));
    }
    rep.slope_ci_low = percentile(boot_slopes, 0.025);
    rep.slope_ci_high = percentile(boot_slopes, 0.975);
  } else {
    rep.ci_low = rep.ci_high = rep.sup_stats;
    rep.slope_ci_low = rep.slope_ci_high = rep.fitted_slope;
  }
  return rep;
}

double min_eigen_rho(const Matrix& sigma) {
  require(sigma.rows() == sigma.cols() && sigma.allFinite(), "sigma must be a finite square matrix");
  const Matrix prod = sigma * sigma.transpose();
  const Matrix sym = 0.5 * (prod + prod.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(eig.eigenvalues()(0), 0.0));
}

LocalizationWeight::LocalizationWeight(std::function<double(const Vector&)> rho, double delta,
                                       std::vector<Vector> sample, double resolution)
    : delta_(delta), resolution_(resolution) {
  require(delta > 0.0, "delta must be positive");
  for (auto& x : sample)
    if (rho(x) <= delta) level_set_.push_back(std::move(x));
}

LocalizationWeight LocalizationWeight::on_lattice(std::function<double(const Vector&)> rho, double delta,
                                                  std::size_t dim, double lo, double hi, std::size_t per_axis) {
  require(dim >= 1 && per_axis >= 2 && hi > lo, "lattice needs dim >= 1, per_axis >= 2 and hi > lo");
  const double step = (hi - lo) / static_cast<double>(per_axis - 1);
  std::size_t total = 1;
  for (std::size_t k = 0; k < dim; ++k) total *= per_axis;
  std::vector<Vector> sample;
  sample.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vector x(static_cast<Eigen::Index>(dim));
    std::size_t rest = idx;
    for (std::size_t k = 0; k < dim; ++k) {
      x[static_cast<Eigen::Index>(k)] = lo + step * static_cast<double>(rest % per_axis);
      rest /= per_axis;
    }
    sample.push_back(std::move(x));
  }
  const double covering = 0.5 * step * std::sqrt(static_cast<double>(dim));
  return LocalizationWeight(std::move(rho), delta, std::move(sample), covering);
}

double LocalizationWeight::operator()(const Vector& x) const {
  double best = delta_;
  for (const auto& z : level_set_) {
    best = std::min(best, (x - z).norm());
    if (best == 0.0) break;
  }
  return best;
}

double localization_weight(const Vector& x, double delta, const LocalizationWeight& approx) {
  require(delta == approx.delta(), "delta differs from the one used to build the level set");
  return approx(x);
}

double DensityEstimate::integral() const {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) acc += 0.5 * (values[i] + values[i + 1]) * (x[i + 1] - x[i]);
  return acc;
}

void DensityEstimate::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "x,density\n" << std::setprecision(17);
  for (std::size_t i = 0; i < x.size(); ++i) out << x[i] << ',' << values[i] << '\n';
}

DensityEstimate kde_density(const std::vector<double>& samples, std::optional<double> bandwidth,
                            std::size_t grid_points) {
  require(samples.size() >= 100, "kde_density needs at least 100 samples");
  require(grid_points >= 2, "kde_density needs at least two grid points");
  const Estimate e = mean_estimate(samples);
  const double sd = e.standard_error * std::sqrt(static_cast<double>(samples.size()));
  if (!(sd > 0.0) || !std::isfinite(sd)) throw NumericalError("degenerate sample variance in kde_density");
  const double bw = bandwidth.value_or(1.06 * sd * std::pow(static_cast<double>(samples.size()), -0.2));
  require(bw > 0.0, "bandwidth must be positive");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  DensityEstimate d;
  d.bandwidth = bw;
  d.x_min = *mn - 4.0 * bw;
  d.x_max = *mx + 4.0 * bw;
  d.x.resize(grid_points);
  d.values.assign(grid_points, 0.0);
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bw * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double x = d.x_min + (d.x_max - d.x_min) * static_cast<double>(g) / static_cast<double>(grid_points - 1);
    d.x[g] = x;
    double acc = 0.0;
    for (double s : samples) {
      const double z = (x - s) / bw;
      acc += std::exp(-0.5 * z * z);
    }
    d.values[g] = norm * acc;
  }
  return d;
}

std::vector<Vector> terminal_sample(const sde::CoefficientSpec& c, const Vector& x0, double H, double T,
                                    std::size_t n, std::size_t N, std::uint64_t seed, fbm::FbmMethod method,
                                    Exec exec) {
  const fbm::FbmGenerator gen(method, n, T, c.meta.dim, Hurst(H));
  auto results = run_ensemble(
      N, seed,
      [&](std::size_t, std::uint64_t s) {
        const sde::SolutionPath X = sde::euler_solve(c, x0, gen.sample(s));
        std::vector<double> out(c.meta.dim);
        for (std::size_t k = 0; k < c.meta.dim; ++k) out[k] = X.X(n, k);
        return out;
      },
      exec);
  std::vector<Vector> out;
  for (const auto& r : results) {
    if (r.failed) continue;
    out.push_back(Eigen::Map<const Vector>(r.values.data(), static_cast<Eigen::Index>(r.values.size())));
  }
  return out;
}

}  // namespace fsde::density
