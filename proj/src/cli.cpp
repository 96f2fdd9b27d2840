#include "fsde/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <concepts>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "fsde/density.hpp"
#include "fsde/ensemble.hpp"
#include "fsde/error.hpp"
#include "fsde/fbm.hpp"
#include "fsde/girsanov.hpp"
#include "fsde/io.hpp"
#include "fsde/report.hpp"
#include "fsde/rng.hpp"
#include "fsde/sde.hpp"
#include "fsde/volterra.hpp"

namespace fsde::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::map<std::string, Command> kCommands = {
    {"fbm-gen", Command::fbm_gen},           {"sde-solve", Command::sde_solve},
    {"moments", Command::moments},           {"girsanov", Command::girsanov},
    {"density-rate", Command::density_rate}, {"besov-probe", Command::besov_probe},
    {"kernel-validate", Command::kernel_validate},
};

// Strict typed readers. Each returns false on a type mismatch.
bool read(const json& v, double& out) {
  if (!v.is_number()) return false;
  out = v.get<double>();
  return true;
}
template <std::unsigned_integral U>
bool read(const json& v, U& out) {
  if (v.is_number_unsigned()) {
    out = v.get<U>();
    return true;
  }
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) return false;
  out = static_cast<U>(v.get<std::int64_t>());
  return true;
}
bool read(const json& v, int& out) {
  if (!v.is_number_integer()) return false;
  const auto x = v.get<std::int64_t>();
  if (x < -1000000 || x > 1000000) return false;
  out = static_cast<int>(x);
  return true;
}
bool read(const json& v, bool& out) {
  if (!v.is_boolean()) return false;
  out = v.get<bool>();
  return true;
}
bool read(const json& v, std::string& out) {
  if (!v.is_string()) return false;
  out = v.get<std::string>();
  return true;
}
bool read(const json& v, std::vector<double>& out) {
  if (!v.is_array()) return false;
  std::vector<double> tmp;
  for (const auto& x : v) {
    if (!x.is_number()) return false;
    tmp.push_back(x.get<double>());
  }
  out = std::move(tmp);
  return true;
}
template <class T>
bool read(const json& v, std::optional<T>& out) {
  if (v.is_null()) {
    out.reset();
    return true;
  }
  T tmp{};
  if (!read(v, tmp)) return false;
  out = std::move(tmp);
  return true;
}

struct Field {
  std::function<bool(const json&, RunConfig&)> read;
  std::function<json(const RunConfig&)> write;
};

template <class T>
Field field(T RunConfig::*member) {
  return {[member](const json& v, RunConfig& c) { return read(v, c.*member); },
          [member](const RunConfig& c) -> json {
            const T& x = c.*member;
            if constexpr (requires { x.has_value(); }) return x ? json(*x) : json(nullptr);
            else return json(x);
          }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"H", field(&RunConfig::H)},
      {"T", field(&RunConfig::T)},
      {"n", field(&RunConfig::n)},
      {"N", field(&RunConfig::N)},
      {"seed", field(&RunConfig::seed)},
      {"coefficient", field(&RunConfig::coefficient)},
      {"x0", field(&RunConfig::x0)},
      {"method", field(&RunConfig::method)},
      {"scheme", field(&RunConfig::scheme)},
      {"dim", field(&RunConfig::dim)},
      {"paths", field(&RunConfig::paths)},
      {"p_list", field(&RunConfig::p_list)},
      {"beta", field(&RunConfig::beta)},
      {"c_exp", field(&RunConfig::c_exp)},
      {"delta", field(&RunConfig::delta)},
      {"eps_grid", field(&RunConfig::eps_grid)},
      {"m", field(&RunConfig::m)},
      {"alpha_test", field(&RunConfig::alpha_test)},
      {"h_grid", field(&RunConfig::h_grid)},
      {"bootstrap", field(&RunConfig::bootstrap)},
      {"functional", field(&RunConfig::functional)},
      {"mu", field(&RunConfig::mu)},
      {"times", field(&RunConfig::times)},
      {"debug_replica", field(&RunConfig::debug_replica)},
      {"eps", field(&RunConfig::eps)},
      {"u_grid", field(&RunConfig::u_grid)},
      {"export_kernel", field(&RunConfig::export_kernel)},
      {"output_dir", field(&RunConfig::output_dir)},
  };
  return table;
}

std::string join(const std::vector<std::string>& keys) {
  std::string s;
  for (const auto& k : keys) s += (s.empty() ? "" : ", ") + k;
  return s;
}

bool all_of(const std::vector<double>& v, const std::function<bool(double)>& p) {
  return std::all_of(v.begin(), v.end(), p);
}

// Domain checks; returns the offending keys.
std::vector<std::string> domain_violations(const RunConfig& c) {
  std::vector<std::string> bad;
  auto check = [&](bool ok, const char* key) {
    if (!ok) bad.emplace_back(key);
  };
  check(c.H > 0.5 && c.H < 1.0, "H");
  check(std::isfinite(c.T) && c.T > 0.0, "T");
  check(c.n >= 2 && c.n <= (std::size_t{1} << 22), "n");
  check(c.N >= 1, "N");
  const auto keys = sde::library_keys();
  check(std::find(keys.begin(), keys.end(), c.coefficient) != keys.end(), "coefficient");
  check(all_of(c.x0, [](double x) { return std::isfinite(x); }), "x0");
  check(c.method == "kernel" || c.method == "cholesky" || c.method == "circulant", "method");
  check(c.scheme == "euler" || c.scheme == "young_picard", "scheme");
  check(c.dim >= 1 && c.dim <= 64, "dim");
  check(c.paths <= c.N && c.paths <= 10000, "paths");
  check(!c.p_list.empty() && all_of(c.p_list, [](double p) { return p >= 1.0 && p <= 64.0; }), "p_list");
  check(!c.beta || (*c.beta > 0.0 && *c.beta < c.H), "beta");
  check(std::isfinite(c.c_exp) && c.c_exp > 0.0, "c_exp");
  check(c.delta > 0.0 && c.delta < 2.0 * c.H, "delta");
  // eps values must fall on the time grid for the one-step approximation
  auto on_grid = [&](double fraction) {
    const double k = fraction * static_cast<double>(c.n);
    return k >= 1.0 - 1e-9 && std::abs(k - std::round(k)) <= 1e-9 * k;
  };
  const bool density = c.command == Command::density_rate;
  check(c.eps_grid.size() >= 2 && all_of(c.eps_grid, [&](double e) {
          return e > 0.0 && e <= 0.5 && (!density || on_grid(e));
        }),
        "eps_grid");
  check(c.m >= 1 && c.m <= 16, "m");
  check(c.alpha_test > 0.0 && c.alpha_test < 1.0 && c.alpha_test < c.m, "alpha_test");
  check(c.h_grid.size() >= 2 && all_of(c.h_grid, [](double h) { return h > 0.0 && h <= 1.0; }), "h_grid");
  check(c.bootstrap >= 1, "bootstrap");
  check(c.functional == "zero" || c.functional == "constant" || c.functional == "tanh" || c.functional == "sine",
        "functional");
  check(std::isfinite(c.mu), "mu");
  check(all_of(c.times, [&](double t) { return t > 0.0 && t <= c.T; }), "times");
  check(!c.debug_replica || *c.debug_replica < c.N, "debug_replica");
  check(c.eps > 0.0 && c.eps <= c.T && (!density || on_grid(c.eps / c.T)), "eps");
  check(!c.u_grid.empty() && all_of(c.u_grid, [](double u) { return std::isfinite(u); }), "u_grid");
  return bad;
}

json with_provenance(json j, const RunConfig& c) {
  j["command"] = to_string(c.command);
  j["config_hash"] = c.hash();
  j["seed"] = c.seed;
  json cfg = c.to_json();
  cfg.erase("output_dir");
  j["config"] = cfg;
  return j;
}

json report_json(MonteCarloReport r, const RunConfig& c) {
  r.config_hash = c.hash();
  r.seed = c.seed;
  return with_provenance(r.to_json(), c);
}

struct Context {
  const RunConfig& cfg;
  fs::path out;
  std::vector<fs::path> files;

  fs::path file(const std::string& name) {
    files.push_back(out / name);
    return out / name;
  }
  void json_file(const std::string& name, const json& j) { write_json(j, file(name)); }
};

std::string indexed(const std::string& stem, std::size_t r, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", r);
  return stem + "_" + buf + ext;
}

sde::CoefficientSpec coefficient(const RunConfig& c) {
  sde::CoefficientSpec spec = sde::library(c.coefficient);
  if (!spec.meta.admissible_for(c.H))
    throw ConfigError("coefficient '" + c.coefficient + "' has Holder order too small for H", {"H", "coefficient"});
  return spec;
}

sde::Vector initial_state(const RunConfig& c, std::size_t dim) {
  if (c.x0.empty()) return sde::Vector::Zero(static_cast<Eigen::Index>(dim));
  if (c.x0.size() != dim)
    throw ConfigError("x0 has " + std::to_string(c.x0.size()) + " entries, coefficient dimension is " +
                          std::to_string(dim),
                      {"x0"});
  return Eigen::Map<const sde::Vector>(c.x0.data(), static_cast<Eigen::Index>(dim));
}

double default_beta(const RunConfig& c) { return c.beta.value_or(0.9 * c.H); }

void run_fbm_gen(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const fbm::FbmGenerator gen(fbm::parse_method(c.method), c.n, c.T, c.dim, volterra::Hurst(c.H));
  io::PathFrame frame;
  json artifacts = json::array();
  for (std::size_t r = 0; r < c.paths; ++r) {
    const std::uint64_t s = derive_seed(c.seed, {r});
    fbm::FbmPath B = gen.sample(s);
    const std::string name = indexed("path", r, ".csv");
    io::write_path_csv(B.path, ctx.file(name));
    artifacts.push_back({{"file", name}, {"replica", r}, {"seed", s}});
    frame.paths.push_back(std::move(B.path));
    frame.seeds.push_back(s);
  }
  if (!frame.paths.empty()) io::write_path_frame(frame, ctx.file("paths.bin"));
  if (c.export_kernel && gen.kernel_grid()) {
    gen.kernel_grid()->save_csv(ctx.file("kernel.csv"));
    gen.kernel_grid()->save_binary(ctx.file("kernel.bin"));
  }

  auto results = run_ensemble(c.N, c.seed, [&](std::size_t, std::uint64_t s) {
    const fbm::FbmPath B = gen.sample(s);
    const double end = euclidean_norm(B.path.node(c.n));
    const double first = euclidean_norm(B.path.node(1));
    return std::vector<double>{end * end, first * first};
  });
  MonteCarloReport r;
  r.study = "fbm-gen";
  r.N = c.N;
  r.failures = failed_indices(results);
  r.estimates["terminal_second_moment"] = mean_estimate(column(results, 0));
  r.estimates["first_step_second_moment"] = mean_estimate(column(results, 1));
  const double dim = static_cast<double>(c.dim);
  r.diagnostics["closed_form.terminal_second_moment"] = dim * std::pow(c.T, 2.0 * c.H);
  r.diagnostics["closed_form.first_step_second_moment"] =
      dim * std::pow(c.T / static_cast<double>(c.n), 2.0 * c.H);
  json j = report_json(r, c);
  j["artifacts"] = artifacts;
  ctx.json_file("report.json", j);
}

void run_sde_solve(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const sde::CoefficientSpec spec = coefficient(c);
  const sde::Vector x0 = initial_state(c, spec.meta.dim);
  const bool picard = c.scheme == "young_picard";
  const fbm::FbmGenerator gen(fbm::parse_method(c.method), c.n, c.T, spec.meta.dim, volterra::Hurst(c.H));
  const double beta = default_beta(c);
  auto solve = [&](const fbm::FbmPath& B) {
    return picard ? sde::young_picard_solve(spec, x0, B) : sde::euler_solve(spec, x0, B);
  };

  io::PathFrame frame;
  json artifacts = json::array();
  for (std::size_t r = 0; r < c.paths; ++r) {
    const std::uint64_t s = derive_seed(c.seed, {r});
    const fbm::FbmPath B = gen.sample(s);
    const sde::SolutionPath X = [&] {
      try {
        return solve(B);
      } catch (const NumericalError& e) {
        throw NumericalError("replica " + std::to_string(r) + ": " + e.what(), r);
      }
    }();
    const std::string xs = indexed("solution", r, ".csv");
    const std::string bs = indexed("driving", r, ".csv");
    io::write_path_csv(X.X, ctx.file(xs));
    io::write_path_csv(B.path, ctx.file(bs));
    artifacts.push_back({{"file", xs}, {"driving", bs}, {"replica", r}, {"seed", s}});
    frame.paths.push_back(X.X);
    frame.seeds.push_back(s);
  }
  if (!frame.paths.empty()) io::write_path_frame(frame, ctx.file("solutions.bin"));

  auto results = run_ensemble(c.N, c.seed, [&](std::size_t, std::uint64_t s) {
    const fbm::FbmPath B = gen.sample(s);
    const sde::SolutionPath X = solve(B);
    const sde::PathStatistics st = sde::path_statistics(X, beta, c.H);
    return std::vector<double>{st.sup_norm, st.holder_seminorm, euclidean_norm(X.X.node(c.n))};
  });
  MonteCarloReport r;
  r.study = "sde-solve";
  r.N = c.N;
  r.failures = failed_indices(results);
  r.estimates["sup_norm"] = mean_estimate(column(results, 0));
  r.estimates["holder_seminorm"] = mean_estimate(column(results, 1));
  r.estimates["terminal_norm"] = mean_estimate(column(results, 2));
  r.diagnostics["beta"] = beta;
  r.diagnostics["blowups"] = static_cast<double>(r.failures.size());
  json j = report_json(r, c);
  j["artifacts"] = artifacts;
  j["coefficient_metadata"] = spec.meta;
  ctx.json_file("report.json", j);
}

void run_moments(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const sde::CoefficientSpec spec = coefficient(c);
  sde::MomentStudyConfig mc;
  mc.H = c.H;
  mc.T = c.T;
  mc.n = c.n;
  mc.N = c.N;
  mc.seed = c.seed;
  mc.beta = default_beta(c);
  mc.p_list = c.p_list;
  mc.c_exp = c.c_exp;
  mc.delta = c.delta;
  mc.method = fbm::parse_method(c.method);
  json j = report_json(sde::moment_study(spec, initial_state(c, spec.meta.dim), mc), c);
  j["coefficient_metadata"] = spec.meta;
  ctx.json_file("report.json", j);
}

void run_girsanov(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const sde::CoefficientSpec spec = coefficient(c);
  const sde::Vector x0 = initial_state(c, spec.meta.dim);
  const girsanov::DriftFunctional h = girsanov::drift_functional(c.functional, c.mu, spec.meta.dim);
  girsanov::GirsanovConfig gc;
  gc.H = c.H;
  gc.T = c.T;
  gc.n = c.n;
  gc.N = c.N;
  gc.seed = c.seed;
  gc.c_exp = c.c_exp;
  gc.times = c.times;
  json mart = report_json(girsanov::martingale_check(spec, h, x0, gc), c);
  if (c.functional == "constant" && spec.meta.dim == 1)
    mart["closed_form_energy"] = girsanov::constant_h_energy(c.mu, c.T, volterra::Hurst(c.H));
  ctx.json_file("martingale.json", mart);
  ctx.json_file("measure_change.json", report_json(girsanov::measure_change_check(spec, h, x0, gc), c));
  ctx.json_file("exp_energy.json", report_json(girsanov::exp_energy_check(spec, h, x0, gc), c));

  if (c.debug_replica) {
    const std::size_t r = *c.debug_replica;
    const fbm::FbmGenerator gen(fbm::FbmMethod::kernel, c.n, c.T, spec.meta.dim, volterra::Hurst(c.H));
    const girsanov::DecompositionPlan plan(c.T, c.n, volterra::Hurst(c.H));
    const fbm::FbmPath B = gen.sample(derive_seed(c.seed, {r}));
    const sde::SolutionPath X = sde::euler_solve(spec, x0, B);
    girsanov::write_weight_csv(girsanov::radon_nikodym(X, B, h.h, plan), ctx.file(indexed("weight", r, ".csv")));
  }
}

void run_density_rate(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const sde::CoefficientSpec spec = coefficient(c);
  const sde::Vector x0 = initial_state(c, spec.meta.dim);
  density::ApproxStudyConfig ac;
  ac.H = c.H;
  ac.T = c.T;
  ac.n = c.n;
  ac.N = c.N;
  ac.seed = c.seed;
  ac.beta = c.beta;
  ac.eps_fractions = c.eps_grid;
  ctx.json_file("report.json", report_json(density::approx_error_study(spec, x0, ac), c));
  if (spec.meta.dim == 1)
    ctx.json_file("characteristic_function.json",
                  report_json(density::characteristic_function_check(spec, x0, c.H, c.T, c.n, c.N, c.seed, c.eps,
                                                                     c.u_grid),
                              c));
}

void run_besov_probe(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const sde::CoefficientSpec spec = coefficient(c);
  const sde::Vector x0 = initial_state(c, spec.meta.dim);
  const auto samples =
      density::terminal_sample(spec, x0, c.H, c.T, c.n, c.N, c.seed, fbm::parse_method(c.method));
  density::BesovProbeOptions opt;
  opt.m = c.m;
  opt.alpha_test = c.alpha_test;
  opt.h_grid = c.h_grid;
  opt.bootstrap = c.bootstrap;
  opt.seed = c.seed;
  json j = with_provenance(density::besov_probe(samples, opt).to_json(), c);
  j["N"] = samples.size();
  j["reference_slope"] = (1.0 - c.H) / c.H;

  std::vector<double> first;
  first.reserve(samples.size());
  for (const auto& s : samples) first.push_back(s(0));
  bool kde_written = false;
  if (first.size() >= 100) {
    try {
      density::kde_density(first).save_csv(ctx.file("kde.csv"));
      kde_written = true;
    } catch (const NumericalError&) {
      ctx.files.pop_back();
    }
  }
  j["kde_written"] = kde_written;
  ctx.json_file("report.json", j);
}

void run_kernel_validate(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const volterra::Hurst H(c.H);
  const std::vector<double> fractions{0.1, 0.25, 0.5, 0.75, 1.0};
  double max_err = 0.0;
  double max_method_gap = 0.0;
  {
    std::ofstream out(ctx.file("factorization.csv"));
    out << "t,s,product_integral,covariance,abs_error\n" << std::setprecision(17);
    for (double ft : fractions)
      for (double fs_ : fractions) {
        const double t = ft * c.T, s = fs_ * c.T;
        const double p = volterra::kernel_product_integral(t, s, H);
        const double r = volterra::fbm_covariance(t, s, H);
        max_err = std::max(max_err, std::abs(p - r) / (1.0 + r));
        out << t << ',' << s << ',' << p << ',' << r << ',' << std::abs(p - r) << '\n';
        if (s < t) {
          const double a = volterra::kernel_KH(t, s, H, volterra::KernelMethod::integral);
          const double b = volterra::kernel_KH(t, s, H, volterra::KernelMethod::hypergeometric);
          max_method_gap = std::max(max_method_gap, std::abs(a - b) / std::max(1.0, std::abs(b)));
        }
      }
  }
  const double kappa = volterra::kernel_normalization(H);
  const double CH = volterra::tail_bound_constant(H);
  std::vector<double> le, lv;
  bool bound_holds = true;
  {
    std::ofstream out(ctx.file("tail.csv"));
    out << "eps,v_eps,lower_bound,ratio\n" << std::setprecision(17);
    for (int k = 3; k <= 8; ++k) {
      const double eps = c.T * std::ldexp(1.0, -k);
      const double v = volterra::kernel_tail_energy(c.T, eps, H);
      const double bound = kappa * kappa * CH * std::pow(eps, 2.0 * c.H);
      bound_holds = bound_holds && v >= bound;
      out << eps << ',' << v << ',' << bound << ',' << v / bound << '\n';
      le.push_back(std::log(eps));
      lv.push_back(std::log(v));
    }
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < le.size(); ++i) mx += le[i], my += lv[i];
  mx /= static_cast<double>(le.size());
  my /= static_cast<double>(le.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < le.size(); ++i) sxy += (le[i] - mx) * (lv[i] - my), sxx += (le[i] - mx) * (le[i] - mx);

  if (c.export_kernel) {
    const auto kg = volterra::KernelGrid::build(c.T, c.n, H);
    kg.save_csv(ctx.file("kernel.csv"));
    kg.save_binary(ctx.file("kernel.bin"));
  }
  json j;
  j["study"] = "kernel-validate";
  j["kappa"] = kappa;
  j["tail_bound_constant"] = CH;
  j["c0"] = volterra::c0_constant(H);
  j["max_factorization_error"] = max_err;
  j["max_method_gap"] = max_method_gap;
  j["tail_bound_holds"] = bound_holds;
  j["tail_slope"] = sxy / sxx;
  ctx.json_file("report.json", with_provenance(j, c));
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return "parse";
  return "runtime";
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [name, cmd] : kCommands)
    if (cmd == c) return name;
  return "unknown";
}

Command parse_command(const std::string& name) {
  const auto it = kCommands.find(name);
  if (it == kCommands.end()) throw ConfigError("unknown command '" + name + "'", {"command"});
  return it->second;
}

json RunConfig::to_json() const {
  json j;
  j["command"] = to_string(command);
  for (const auto& [key, f] : fields()) j[key] = f.write(*this);
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object", {});
  RunConfig c;
  std::vector<std::string> unknown, mistyped;
  if (!j.contains("command")) throw ConfigError("missing required key: command", {"command"});
  if (!j["command"].is_string()) throw ConfigError("key 'command' must be a string", {"command"});
  c.command = parse_command(j["command"].get<std::string>());
  for (const auto& [key, value] : j.items()) {
    if (key == "command") continue;
    const auto it = fields().find(key);
    if (it == fields().end()) unknown.push_back(key);
    else if (!it->second.read(value, c)) mistyped.push_back(key);
  }
  std::vector<std::string> bad;
  for (const auto& k : domain_violations(c))
    if (std::find(mistyped.begin(), mistyped.end(), k) == mistyped.end()) bad.push_back(k);
  if (unknown.empty() && mistyped.empty() && bad.empty()) return c;
  std::string message;
  if (!unknown.empty()) message += "unknown keys: " + join(unknown);
  if (!mistyped.empty()) message += std::string(message.empty() ? "" : "; ") + "wrong type: " + join(mistyped);
  if (!bad.empty()) message += std::string(message.empty() ? "" : "; ") + "out of domain: " + join(bad);
  std::vector<std::string> keys = unknown;
  keys.insert(keys.end(), mistyped.begin(), mistyped.end());
  keys.insert(keys.end(), bad.begin(), bad.end());
  throw ConfigError("invalid config: " + message, keys);
}

std::string RunConfig::hash() const {
  json j = to_json();
  j.erase("output_dir");
  return fnv1a_hex(j.dump());
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string(), {});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what(), {});
  }
  return RunConfig::from_json(j);
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

RunResult run(const RunConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  Context ctx{config, out_dir, {}};
  const auto start = std::chrono::steady_clock::now();
  switch (config.command) {
    case Command::fbm_gen: run_fbm_gen(ctx); break;
    case Command::sde_solve: run_sde_solve(ctx); break;
    case Command::moments: run_moments(ctx); break;
    case Command::girsanov: run_girsanov(ctx); break;
    case Command::density_rate: run_density_rate(ctx); break;
    case Command::besov_probe: run_besov_probe(ctx); break;
    case Command::kernel_validate: run_kernel_validate(ctx); break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json({{"wall_time", wall}, {"config_hash", config.hash()}}, out_dir / "timing.json");
  return {ctx.files, wall};
}

json error_record(const std::exception& e) {
  json err{{"kind", error_kind(e)}, {"message", e.what()}, {"keys", json::array()}};
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) err["keys"] = ce->keys();
  if (const auto* ne = dynamic_cast<const NumericalError*>(&e); ne && ne->index()) err["index"] = *ne->index();
  return {{"error", err}};
}

fs::path default_output_root() {
  if (const char* env = std::getenv("FSDE_OUTPUT_ROOT"); env && *env) return env;
  return "fsde-out";
}

}  // namespace fsde::cli
