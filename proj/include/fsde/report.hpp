#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace fsde {

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Sample mean and its standard error, accumulated in index order.
Estimate mean_estimate(std::span<const double> samples);

/// Relative change |a - b| / max(|b|, tiny) used by the stability diagnostics.
double relative_change(double a, double b);

/// Output record shared by every ensemble study.
struct MonteCarloReport {
  std::string study;
  std::map<std::string, Estimate> estimates;
  /// Named scalar diagnostics (stability ratios, fitted slopes, flags).
  std::map<std::string, double> diagnostics;
  std::size_t N = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::size_t> failures;
  /// Wall time in seconds. Excluded from the JSON form so that reports are
  /// byte-identical across runs; emitted separately by the CLI.
  double wall_time = 0.0;

  const Estimate& at(const std::string& key) const { return estimates.at(key); }
  nlohmann::json to_json() const;
  static MonteCarloReport from_json(const nlohmann::json& j);
};

/// FNV-1a 64-bit hash rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace fsde
