#include "fsde/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "fsde/ensemble.hpp"
#include "fsde/error.hpp"
#include "fsde/fraccalc.hpp"
#include "fsde/rng.hpp"

namespace fsde::sde {
namespace {

Vector node_vector(const GridFunction& f, std::size_t i) {
  Vector v(f.dim());
  for (std::size_t k = 0; k < f.dim(); ++k) v[k] = f(i, k);
  return v;
}

void store(GridFunction& f, std::size_t i, const Vector& v) {
  for (std::size_t k = 0; k < f.dim(); ++k) f(i, k) = v[k];
}

void check_finite(const Vector& x, std::size_t i) {
  if (!x.allFinite()) throw NumericalError("solver state became non-finite", i);
}

void check_inputs(const CoefficientSpec& c, const Vector& x0, const fbm::FbmPath& B) {
  require(static_cast<std::size_t>(x0.size()) == c.meta.dim, "initial value dimension differs from coefficients");
  require(B.path.dim() == c.meta.dim, "driving path dimension differs from coefficients");
  require(x0.allFinite(), "initial value must be finite");
}

std::string format_p(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }
Vector scalar_vector(double v) { return Vector::Constant(1, v); }

}  // namespace

void to_json(nlohmann::json& j, const CoefficientMetadata& m) {
  j = nlohmann::json{{"name", m.name},
                     {"description", m.description},
                     {"dim", m.dim},
                     {"growth_const", m.growth_const},
                     {"holder_order", m.holder_order},
                     {"holder_const", m.holder_const},
                     {"sigma_sup_bound", m.sigma_sup_bound ? nlohmann::json(*m.sigma_sup_bound) : nlohmann::json()},
                     {"nondegeneracy", m.nondegeneracy ? nlohmann::json(*m.nondegeneracy) : nlohmann::json()},
                     {"smooth_sigma", m.smooth_sigma},
                     {"default_H", m.default_H}};
}

void from_json(const nlohmann::json& j, CoefficientMetadata& m) {
  m.name = j.at("name").get<std::string>();
  m.description = j.at("description").get<std::string>();
  m.dim = j.at("dim").get<std::size_t>();
  m.growth_const = j.at("growth_const").get<double>();
  m.holder_order = j.at("holder_order").get<double>();
  m.holder_const = j.at("holder_const").get<double>();
  m.sigma_sup_bound = j.at("sigma_sup_bound").is_null() ? std::nullopt
                                                        : std::optional<double>(j.at("sigma_sup_bound").get<double>());
  m.nondegeneracy =
      j.at("nondegeneracy").is_null() ? std::nullopt : std::optional<double>(j.at("nondegeneracy").get<double>());
  m.smooth_sigma = j.at("smooth_sigma").get<bool>();
  m.default_H = j.at("default_H").get<double>();
}

double operator_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

Certification certify(const CoefficientSpec& c, std::size_t pairs, std::uint64_t seed, double radius) {
  const auto d = static_cast<Eigen::Index>(c.meta.dim);
  Stream stream(seed, {static_cast<std::uint64_t>(StreamTag::certification)});
  Certification out;
  constexpr double slack = 1e-12;
  for (std::size_t p = 0; p < pairs; ++p) {
    Vector x(d), y(d);
    for (Eigen::Index k = 0; k < d; ++k) x[k] = stream.uniform(-radius, radius);
    // Half the pairs are close together to probe the Holder modulus at small scales.
    const double scale = p % 2 == 0 ? radius : radius * std::pow(10.0, -stream.uniform(1.0, 5.0));
    for (Eigen::Index k = 0; k < d; ++k) y[k] = x[k] + stream.uniform(-scale, scale);
    ++out.checked_pairs;
    for (const Vector* z : {&x, &y}) {
      if (c.drift(*z).norm() > c.meta.growth_const * (1.0 + z->norm()) * (1.0 + slack) + slack) ++out.growth_violations;
    }
    const Matrix sx = c.diffusion(x);
    const Matrix sy = c.diffusion(y);
    const double dist = (x - y).norm();
    if (dist > 0.0 &&
        operator_norm(sx - sy) > c.meta.holder_const * std::pow(dist, c.meta.holder_order) * (1.0 + slack) + slack)
      ++out.holder_violations;
    if (c.meta.sigma_sup_bound && operator_norm(sx) > *c.meta.sigma_sup_bound * (1.0 + slack)) ++out.sup_violations;
    if (c.meta.nondegeneracy) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(sx * sx.transpose());
      if (eig.eigenvalues()(0) < *c.meta.nondegeneracy * (1.0 - slack)) ++out.nondegeneracy_violations;
    }
  }
  return out;
}

std::vector<std::string> library_keys() {
  return {"bm_unit",      "constant",          "geometric", "holder_bounded_sign", "lipschitz_bounded_drift",
          "nondegenerate_step", "degenerate_halfspace", "oscillatory", "ou_linear"};
}

CoefficientSpec library(const std::string& key) {
  CoefficientSpec c;
  CoefficientMetadata& m = c.meta;
  m.name = key;
  if (key == "bm_unit") {
    m.description = "b = 0, sigma = 1: X = x0 + B^H";
    m.growth_const = 0.0;
    m.holder_order = 1.0;
    m.holder_const = 0.0;
    m.sigma_sup_bound = 1.0;
    m.nondegeneracy = 1.0;
    m.smooth_sigma = true;
    c.drift = [](const Vector&) { return scalar_vector(0.0); };
    c.diffusion = [](const Vector&) { return scalar_matrix(1.0); };
  } else if (key == "constant") {
    m.description = "b = 0.5, sigma = 0.8";
    m.growth_const = 0.5;
    m.holder_order = 1.0;
    m.holder_const = 0.0;
    m.sigma_sup_bound = 0.8;
    m.nondegeneracy = 0.64;
    m.smooth_sigma = true;
    c.drift = [](const Vector&) { return scalar_vector(0.5); };
    c.diffusion = [](const Vector&) { return scalar_matrix(0.8); };
  } else if (key == "geometric") {
    m.description = "b = 0, sigma(x) = x: X = x0 exp(B^H)";
    m.growth_const = 0.0;
    m.holder_order = 1.0;
    m.holder_const = 1.0;
    m.smooth_sigma = true;
    c.drift = [](const Vector&) { return scalar_vector(0.0); };
    c.diffusion = [](const Vector& x) { return scalar_matrix(x[0]); };
  } else if (key == "holder_bounded_sign") {
    m.description = "b(x) = -sign(x), sigma(x) = 0.5 + 0.5 min(|x|^0.7, 2)";
    m.growth_const = 1.0;
    m.holder_order = 0.7;
    m.holder_const = 0.5;
    m.sigma_sup_bound = 1.5;
    m.nondegeneracy = 0.25;
    c.drift = [](const Vector& x) { return scalar_vector(-sign(x[0])); };
    c.diffusion = [](const Vector& x) {
      return scalar_matrix(0.5 + 0.5 * std::min(std::pow(std::abs(x[0]), 0.7), 2.0));
    };
  } else if (key == "lipschitz_bounded_drift") {
    m.description = "b(x) = cos x, sigma(x) = 1 + 0.5 sin x";
    m.growth_const = 1.0;
    m.holder_order = 1.0;
    m.holder_const = 0.5;
    m.sigma_sup_bound = 1.5;
    m.nondegeneracy = 0.25;
    m.smooth_sigma = true;
    c.drift = [](const Vector& x) { return scalar_vector(std::cos(x[0])); };
    c.diffusion = [](const Vector& x) { return scalar_matrix(1.0 + 0.5 * std::sin(x[0])); };
  } else if (key == "nondegenerate_step") {
    m.description = "b(x) = 1{x > 0} - 0.5, sigma(x) = 1 + 0.3 tanh x";
    m.growth_const = 0.5;
    m.holder_order = 1.0;
    m.holder_const = 0.3;
    m.sigma_sup_bound = 1.3;
    m.nondegeneracy = 0.49;
    m.smooth_sigma = true;
    c.drift = [](const Vector& x) { return scalar_vector(x[0] > 0.0 ? 0.5 : -0.5); };
    c.diffusion = [](const Vector& x) { return scalar_matrix(1.0 + 0.3 * std::tanh(x[0])); };
  } else if (key == "degenerate_halfspace") {
    m.description = "d = 2, b(x) = -x, sigma(x) = min(max(x_1, 0), 1)^0.8 I; sigma vanishes on {x_1 <= 0}";
    m.dim = 2;
    m.growth_const = 1.0;
    m.holder_order = 0.8;
    m.holder_const = 1.0;
    m.sigma_sup_bound = 1.0;
    c.drift = [](const Vector& x) { return Vector(-x); };
    c.diffusion = [](const Vector& x) {
      const double s = std::pow(std::clamp(x[0], 0.0, 1.0), 0.8);
      return Matrix(s * Matrix::Identity(2, 2));
    };
  } else if (key == "oscillatory") {
    m.description = "b(x) = (1 + |x|) cos(1 / (|x| + 0.01)), sigma = 1";
    m.growth_const = 1.0;
    m.holder_order = 1.0;
    m.holder_const = 0.0;
    m.sigma_sup_bound = 1.0;
    m.nondegeneracy = 1.0;
    m.smooth_sigma = true;
    c.drift = [](const Vector& x) {
      const double a = std::abs(x[0]);
      return scalar_vector((1.0 + a) * std::cos(1.0 / (a + 0.01)));
    };
    c.diffusion = [](const Vector&) { return scalar_matrix(1.0); };
  } else if (key == "ou_linear") {
    m.description = "b(x) = -x, sigma = 1 (fractional Ornstein-Uhlenbeck)";
    m.growth_const = 1.0;
    m.holder_order = 1.0;
    m.holder_const = 0.0;
    m.sigma_sup_bound = 1.0;
    m.nondegeneracy = 1.0;
    m.smooth_sigma = true;
    c.drift = [](const Vector& x) { return Vector(-x); };
    c.diffusion = [](const Vector&) { return scalar_matrix(1.0); };
  } else {
    throw std::invalid_argument("unknown coefficient library key '" + key + "'");
  }
  return c;
}

nlohmann::json library_catalog() {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& key : library_keys()) out.push_back(library(key).meta);
  return out;
}

SolutionPath euler_solve(const CoefficientSpec& c, const Vector& x0, const fbm::FbmPath& B) {
  check_inputs(c, x0, B);
  const GridFunction& path = B.path;
  const std::size_t n = path.n_intervals();
  const double dt = path.step();
  GridFunction X(path.t_start(), path.t_end(), n, c.meta.dim);
  Vector x = x0;
  store(X, 0, x);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector dB = node_vector(path, i + 1) - node_vector(path, i);
    x = x + c.drift(x) * dt + c.diffusion(x) * dB;
    check_finite(x, i + 1);
    store(X, i + 1, x);
  }
  return {std::move(X), Scheme::euler, x0};
}

SolutionPath young_picard_solve(const CoefficientSpec& c, const Vector& x0, const fbm::FbmPath& B,
                                PicardOptions options) {
  check_inputs(c, x0, B);
  require(options.window_steps >= 1, "Picard window must contain at least one step");
  const GridFunction& path = B.path;
  const std::size_t n = path.n_intervals();
  const double dt = path.step();
  GridFunction X(path.t_start(), path.t_end(), n, c.meta.dim);
  for (std::size_t i = 0; i <= n; ++i) store(X, i, x0);
  if (options.iterations == 0) return {std::move(X), Scheme::young_picard, x0};

  std::vector<Vector> dB(n);
  for (std::size_t i = 0; i < n; ++i) dB[i] = node_vector(path, i + 1) - node_vector(path, i);

  for (std::size_t w0 = 0; w0 < n; w0 += options.window_steps) {
    const std::size_t w1 = std::min(n, w0 + options.window_steps);
    const Vector start = node_vector(X, w0);
    std::vector<Vector> cur(w1 - w0 + 1, start);
    double last_dist = std::numeric_limits<double>::infinity();
    int growth = 0;
    for (std::size_t it = 0; it < options.iterations; ++it) {
      std::vector<Vector> b(cur.size());
      std::vector<Matrix> s(cur.size());
      for (std::size_t k = 0; k < cur.size(); ++k) {
        b[k] = c.drift(cur[k]);
        s[k] = c.diffusion(cur[k]);
      }
      std::vector<Vector> next(cur.size());
      next[0] = start;
      double dist = 0.0;
      double scale = start.norm();
      for (std::size_t k = 0; k + 1 < cur.size(); ++k) {
        next[k + 1] = next[k] + (0.5 * (b[k] + b[k + 1])) * dt + (0.5 * (s[k] + s[k + 1])) * dB[w0 + k];
        check_finite(next[k + 1], w0 + k + 1);
        dist = std::max(dist, (next[k + 1] - cur[k + 1]).norm());
        scale = std::max(scale, next[k + 1].norm());
      }
      cur = std::move(next);
      if (dist > last_dist) {
        if (++growth >= 2) throw NumericalError("Picard iteration does not contract", w0);
      } else {
        growth = 0;
      }
      last_dist = dist;
      if (dist <= options.tolerance * (1.0 + scale)) break;
    }
    for (std::size_t k = 1; k < cur.size(); ++k) store(X, w0 + k, cur[k]);
  }
  return {std::move(X), Scheme::young_picard, x0};
}

PathStatistics path_statistics(const SolutionPath& X, double beta, double H) {
  require(beta > 0.0 && beta < H, "path_statistics requires 0 < beta < H");
  return {fraccalc::sup_norm(X.X), fraccalc::holder_seminorm(X.X, beta)};
}

double pathwise_bound_check(const SolutionPath& X, const fbm::FbmPath& B, double beta) {
  require(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1]");
  const double xb = fraccalc::holder_seminorm(X.X, beta);
  const double bb = fraccalc::holder_seminorm(B.path, beta);
  return xb / (1.0 + X.x0.norm() + std::pow(bb, 1.0 / beta));
}

MonteCarloReport moment_study(const CoefficientSpec& c, const Vector& x0, const MomentStudyConfig& cfg, Exec exec) {
  require(cfg.beta > 0.0 && cfg.beta < cfg.H, "moment_study requires 0 < beta < H");
  require(cfg.delta > 0.0 && cfg.delta < 2.0 * cfg.H, "moment_study requires 0 < delta < 2H");
  require(cfg.N >= 2, "moment_study needs N >= 2");
  require(!cfg.p_list.empty(), "moment_study needs at least one moment order");
  const fbm::FbmGenerator gen(cfg.method, cfg.n, cfg.T, c.meta.dim, volterra::Hurst(cfg.H));
  const bool bounded = c.meta.sigma_sup_bound.has_value();

  // Columns: holder, sup, |X(T)|, pathwise ratio.
  auto results = run_ensemble(
      cfg.N, cfg.seed,
      [&](std::size_t, std::uint64_t seed) {
        const fbm::FbmPath B = gen.sample(seed);
        const SolutionPath X = euler_solve(c, x0, B);
        const PathStatistics st = path_statistics(X, cfg.beta, cfg.H);
        const double terminal = euclidean_norm(X.X.node(cfg.n));
        const double ratio = pathwise_bound_check(X, B, cfg.beta);
        return std::vector<double>{st.holder_seminorm, st.sup_norm, terminal, ratio};
      },
      exec);

  MonteCarloReport report;
  report.study = "moments";
  report.N = cfg.N;
  report.seed = cfg.seed;
  report.failures = failed_indices(results);
  report.diagnostics["blowups"] = static_cast<double>(report.failures.size());
  const std::size_t half = cfg.N / 2;

  auto add = [&](const std::string& key, std::size_t col, const std::function<double(double)>& f) {
    std::vector<double> full = column(results, col);
    std::vector<double> first = column(results, col, 0, half);
    for (double& v : full) v = f(v);
    for (double& v : first) v = f(v);
    const Estimate e_full = mean_estimate(full);
    report.estimates[key] = e_full;
    report.diagnostics["stability." + key] = relative_change(mean_estimate(first).value, e_full.value);
  };
  for (double p : cfg.p_list) {
    const std::string ps = format_p(p);
    add("holder_p" + ps, 0, [p](double v) { return std::pow(v, p); });
    add("sup_p" + ps, 1, [p](double v) { return std::pow(v, p); });
    add("terminal_p" + ps, 2, [p](double v) { return std::pow(v, p); });
  }
  if (bounded) {
    add("exp_holder", 0, [&](double v) { return std::exp(cfg.c_exp * std::pow(v, cfg.delta)); });
    const std::vector<double> ratio = column(results, 3);
    const std::vector<double> ratio_half = column(results, 3, 0, half);
    const double mx = ratio.empty() ? 0.0 : *std::max_element(ratio.begin(), ratio.end());
    const double mx_half = ratio_half.empty() ? 0.0 : *std::max_element(ratio_half.begin(), ratio_half.end());
    report.diagnostics["ratio_max"] = mx;
    report.diagnostics["ratio_max_half"] = mx_half;
    report.diagnostics["stability.ratio_max"] = relative_change(mx_half, mx);
  }
  report.diagnostics["beta"] = cfg.beta;
  return report;
}

}  // namespace fsde::sde
