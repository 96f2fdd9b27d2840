#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsde/grid.hpp"
#include "fsde/volterra.hpp"

namespace fsde::fbm {

using volterra::Hurst;
using volterra::KernelGrid;

struct BrownianPath {
  GridFunction path;
  std::uint64_t seed;
};

enum class FbmMethod { kernel, cholesky, circulant };

std::string to_string(FbmMethod method);
FbmMethod parse_method(const std::string& name);

struct FbmPath {
  GridFunction path;
  double H;
  FbmMethod method;
  std::uint64_t seed;
  /// Driving Wiener path; present only for the kernel generator.
  std::optional<BrownianPath> wiener;
};

/// Wiener path with i.i.d. N(0, T/n) increments per component. Component k
/// draws from the sub-stream (seed, k, wiener).
BrownianPath sample_bm(std::size_t n, double T, std::size_t dim, std::uint64_t seed);

/// B^H(t_i) = sum_{j<i} weight(i, j) dW_j.
FbmPath fbm_from_kernel(const BrownianPath& W, Hurst H, const KernelGrid& kg);

/// Exact sampling from the covariance R_H(t_i, t_j), i, j = 1..n, through a
/// dense Cholesky factor (computed once per sampler).
class CholeskySampler {
 public:
  CholeskySampler(std::size_t n, double T, Hurst H);
  FbmPath sample(std::size_t dim, std::uint64_t seed) const;
  std::size_t n_intervals() const noexcept { return n_; }

 private:
  std::size_t n_;
  double T_;
  double H_;
  Eigen::MatrixXd lower_;
};

/// Stationary fractional Gaussian noise by circulant embedding of the
/// increment autocovariance (Davies-Harte), cumulatively summed. Sizes that
/// are not powers of two are padded up and the path truncated. The
/// embedding eigenvalues are computed once per sampler.
class CirculantSampler {
 public:
  CirculantSampler(std::size_t n, double T, Hurst H);
  FbmPath sample(std::size_t dim, std::uint64_t seed) const;
  std::size_t n_intervals() const noexcept { return n_; }
  std::size_t embedding_size() const noexcept { return sqrt_eigen_.size(); }

 private:
  std::size_t n_;
  std::size_t padded_;
  double T_;
  double H_;
  std::vector<double> sqrt_eigen_;  // sqrt(lambda_k / (2m)), length 2m
  std::shared_ptr<void> plan_;       // forward complex FFT of length 2m
};

FbmPath fbm_cholesky(std::size_t n, double T, std::size_t dim, Hurst H, std::uint64_t seed);
FbmPath fbm_circulant(std::size_t n, double T, std::size_t dim, Hurst H, std::uint64_t seed);

/// Autocovariance of fractional Gaussian noise with unit step, lag k.
double fgn_autocovariance(std::size_t k, double H);

/// A configured generator that turns (replica seed) into an fBm path with
/// any of the three methods; precomputation is shared across replicas and
/// the object is safe to use concurrently.
class FbmGenerator {
 public:
  FbmGenerator(FbmMethod method, std::size_t n, double T, std::size_t dim, Hurst H);

  FbmPath sample(std::uint64_t seed) const;

  FbmMethod method() const noexcept { return method_; }
  std::size_t n_intervals() const noexcept { return n_; }
  double horizon() const noexcept { return T_; }
  std::size_t dim() const noexcept { return dim_; }
  double hurst() const noexcept { return H_; }
  /// Kernel grid (kernel method only).
  const KernelGrid* kernel_grid() const noexcept { return kernel_.get(); }

 private:
  FbmMethod method_;
  std::size_t n_;
  double T_;
  std::size_t dim_;
  double H_;
  std::shared_ptr<const KernelGrid> kernel_;
  std::shared_ptr<const CholeskySampler> cholesky_;
  std::shared_ptr<const CirculantSampler> circulant_;
};

}  // namespace fsde::fbm
