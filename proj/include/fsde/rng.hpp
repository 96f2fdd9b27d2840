#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace fsde {

/// SplitMix64 finalizer; a bijective mixing of 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of the sub-stream addressed by `path` under `master`. The address is
/// a tuple such as (replica, component, purpose); distinct addresses give
/// statistically independent streams and the result never depends on the
/// order in which streams are requested.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// Stream purposes used when addressing sub-streams.
enum class StreamTag : std::uint64_t {
  wiener = 1,
  fbm_cholesky = 2,
  fbm_circulant = 3,
  one_step_tail = 4,
  gaussian = 5,
  bootstrap = 6,
  certification = 7,
};

/// Deterministic pseudorandom stream. Gaussian variates use the polar
/// Box-Muller method on top of a 53-bit uniform so that the output bytes do
/// not depend on the standard library's distribution implementations.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  Stream(std::uint64_t master, std::initializer_list<std::uint64_t> path)
      : engine_(derive_seed(master, path)) {}

  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  void fill_normal(std::span<double> out, double scale = 1.0) noexcept;
  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fsde
