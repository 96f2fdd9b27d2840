#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace fsde::cli {

/// Schema violation; `keys` lists the offending config keys.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& what, std::vector<std::string> keys)
      : std::invalid_argument(what), keys_(std::move(keys)) {}
  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  std::vector<std::string> keys_;
};

enum class Command { fbm_gen, sde_solve, moments, girsanov, density_rate, besov_probe, kernel_validate };

std::string to_string(Command c);
Command parse_command(const std::string& name);

/// One run of a study. Every field maps to a config key of the same name;
/// see the schema in README.md. Unset optionals fall back to module defaults.
struct RunConfig {
  Command command = Command::fbm_gen;
  double H = 0.75;
  double T = 1.0;
  std::size_t n = 128;
  std::size_t N = 1000;
  std::uint64_t seed = 1;
  std::string coefficient = "bm_unit";
  /// Initial state; empty means the origin.
  std::vector<double> x0;
  std::string method = "circulant";
  std::string scheme = "euler";
  std::size_t dim = 1;
  /// Paths written by fbm-gen and sde-solve.
  std::size_t paths = 1;
  std::vector<double> p_list{2.0, 4.0};
  std::optional<double> beta;
  double c_exp = 0.1;
  double delta = 1.0;
  std::vector<double> eps_grid{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  int m = 2;
  double alpha_test = 0.5;
  std::vector<double> h_grid{1.0, 0.7071067811865476, 0.5, 0.35355339059327373, 0.25};
  std::size_t bootstrap = 200;
  std::string functional = "constant";
  double mu = 0.5;
  std::vector<double> times;
  /// Replica whose Radon-Nikodym weight is dumped as CSV (girsanov).
  std::optional<std::size_t> debug_replica;
  double eps = 0.25;
  std::vector<double> u_grid{-5.0, -2.5, 1.0, 2.5, 5.0};
  bool export_kernel = false;
  std::optional<std::string> output_dir;

  /// Full config, every key present (optionals as null).
  nlohmann::json to_json() const;
  /// Strict parse: unknown keys, type mismatches and out-of-domain values
  /// raise ConfigError naming every offending key.
  static RunConfig from_json(const nlohmann::json& j);
  /// Hash of the config without output_dir, so relocating a run does not
  /// change its provenance.
  std::string hash() const;

  bool operator==(const RunConfig&) const = default;
};

RunConfig load_config(const std::filesystem::path& path);

/// Pretty-printed, sorted-key JSON with a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

struct RunResult {
  std::vector<std::filesystem::path> files;
  double wall_time = 0.0;
};

/// Runs the configured study and writes its artifacts into `out_dir`
/// (created if missing). Throws on failure.
RunResult run(const RunConfig& config, const std::filesystem::path& out_dir);

/// {"error": {"kind", "message", "keys"}} record for failures.
nlohmann::json error_record(const std::exception& e);

/// Default output root: $FSDE_OUTPUT_ROOT or "fsde-out".
std::filesystem::path default_output_root();

}  // namespace fsde::cli
