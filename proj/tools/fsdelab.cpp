#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fsde/cli.hpp"
#include "fsde/error.hpp"
#include "fsde/exec.hpp"
#include "fsde/sde.hpp"

namespace fs = std::filesystem;
using fsde::cli::RunConfig;

namespace {

int exit_code(const std::exception& e) {
  if (dynamic_cast<const fsde::cli::ConfigError*>(&e)) return 2;
  if (dynamic_cast<const fsde::NumericalError*>(&e)) return 3;
  return 1;
}

int fail(const std::exception& e, const std::optional<fs::path>& out_dir) {
  const nlohmann::json record = fsde::cli::error_record(e);
  std::cerr << record.dump(2) << '\n';
  if (out_dir) {
    std::error_code ec;
    fs::create_directories(*out_dir, ec);
    if (!ec) {
      try {
        fsde::cli::write_json(record, *out_dir / "error.json");
      } catch (const std::exception&) {
      }
    }
  }
  return exit_code(e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fsdelab: seeded studies of SDEs driven by fractional Brownian motion"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  bool list_library = false;
  app.add_option("config", config_path, "JSON run config");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--threads", threads, "OpenMP threads (results do not depend on it)")->check(CLI::Range(1, 4096));
  app.add_option("--out", out, "output directory (default $FSDE_OUTPUT_ROOT/<command>-<hash>)");
  app.add_flag("--list-library", list_library, "print the built-in coefficient catalog and exit");
  CLI11_PARSE(app, argc, argv);

  if (list_library) {
    std::cout << fsde::sde::library_catalog().dump(2) << '\n';
    return 0;
  }
  if (config_path.empty()) {
    std::cerr << app.help();
    return 2;
  }
  if (threads) fsde::set_threads(*threads);

  std::optional<fs::path> out_dir;
  if (out) out_dir = *out;
  try {
    RunConfig cfg = fsde::cli::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir)
      out_dir = cfg.output_dir ? fs::path(*cfg.output_dir)
                               : fsde::cli::default_output_root() / (to_string(cfg.command) + "-" + cfg.hash());
    const auto result = fsde::cli::run(cfg, *out_dir);
    nlohmann::json summary{{"out", out_dir->string()}, {"config_hash", cfg.hash()}, {"seed", cfg.seed},
                           {"files", nlohmann::json::array()}};
    for (const auto& f : result.files) summary["files"].push_back(f.filename().string());
    std::cout << summary.dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    return fail(e, out_dir);
  }
}
