#include "fsde/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace fsde {

Estimate mean_estimate(std::span<const double> samples) {
  Estimate e;
  const std::size_t n = samples.size();
  if (n == 0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double x : samples) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  e.value = mean;
  e.standard_error = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return e;
}

double relative_change(double a, double b) {
  const double denom = std::max(std::abs(b), 1e-300);
  return std::abs(a - b) / denom;
}

nlohmann::json MonteCarloReport::to_json() const {
  nlohmann::json j;
  j["study"] = study;
  j["N"] = N;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  nlohmann::json est = nlohmann::json::object();
  for (const auto& [key, e] : estimates) est[key] = {{"value", e.value}, {"standard_error", e.standard_error}};
  j["estimates"] = est;
  j["diagnostics"] = diagnostics;
  j["failures"] = {{"count", failures.size()}, {"indices", failures}};
  return j;
}

MonteCarloReport MonteCarloReport::from_json(const nlohmann::json& j) {
  MonteCarloReport r;
  r.study = j.at("study").get<std::string>();
  r.N = j.at("N").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& [key, e] : j.at("estimates").items())
    r.estimates[key] = {e.at("value").get<double>(), e.at("standard_error").get<double>()};
  r.diagnostics = j.at("diagnostics").get<std::map<std::string, double>>();
  r.failures = j.at("failures").at("indices").get<std::vector<std::size_t>>();
  return r;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fsde
