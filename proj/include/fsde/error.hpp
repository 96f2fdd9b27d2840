#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace fsde {

/// Raised when a computation leaves its numerically valid regime: series
/// non-convergence, a non-PSD factorization, a non-finite solver state.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), index_(index) {}

  /// Grid or replica index at which the failure was detected, when known.
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  std::optional<std::size_t> index_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace fsde
