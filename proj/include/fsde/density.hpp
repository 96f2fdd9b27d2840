#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "fsde/fbm.hpp"
#include "fsde/report.hpp"
#include "fsde/sde.hpp"

namespace fsde::density {

using sde::Matrix;
using sde::Vector;
using volterra::Hurst;

/// Conditional law of the one-step approximation
///   Y(eps) = X(T-eps) + sigma(X(T-eps)) (B_T - B_{T-eps})
/// given the past up to T - eps: Gaussian with mean xi and covariance
/// v_eps sigma(eta) sigma(eta)^*.
struct OneStepGaussian {
  Vector xi;
  Vector eta;
  double v_eps = 0.0;
  Matrix cov;
};

/// Builds the one-step Gaussian from an Euler path driven by the kernel
/// generator. eps must be a positive multiple of the grid step not larger
/// than T.
OneStepGaussian one_step_euler(const sde::SolutionPath& X, const fbm::FbmPath& B, double eps,
                               const sde::CoefficientSpec& c, const volterra::KernelGrid& kg);

/// xi + cov^{1/2} Z with the symmetric square root of cov.
Vector sample_Y(const OneStepGaussian& g, std::uint64_t seed);

struct ApproxStudyConfig {
  double H = 0.75;
  double T = 1.0;
  std::size_t n = 256;
  std::size_t N = 1000;
  std::uint64_t seed = 1;
  /// Defaults to the midpoint of [1/(1+gamma), H).
  std::optional<double> beta;
  /// eps values as fractions of T.
  std::vector<double> eps_fractions{0.25, 0.125, 0.0625, 0.03125, 0.015625};
};

/// E|X(T) - Y(eps)| for each eps using the coupled one-step approximation
/// (same Wiener path). X(T) - Y(eps) is accumulated directly as
/// sum over the last steps of b(X_i) dt + (sigma(X_i) - sigma(eta)) dB_i.
/// Estimates are keyed "error[k]"; diagnostics hold "slope" (least-squares
/// slope of log error against log eps), "beta" and "predicted_slope".
MonteCarloReport approx_error_study(const sde::CoefficientSpec& c, const Vector& x0, const ApproxStudyConfig& cfg,
                                    Exec exec = Exec::parallel);

/// Compares the two estimators of E exp(i <u, Y(eps)>): the empirical mean
/// over coupled Y samples and the mean of exp(i<u, xi> - |sigma^* u|^2 v_eps / 2).
/// For each u, "direct.re/im[k]", "conditional.re/im[k]" and the paired
/// difference "diff.re/im[k]" with standard errors. Scalar problems only.
MonteCarloReport characteristic_function_check(const sde::CoefficientSpec& c, const Vector& x0, double H, double T,
                                               std::size_t n, std::size_t N, std::uint64_t seed, double eps,
                                               const std::vector<double>& u_grid, Exec exec = Exec::parallel);

using ComplexFunction = std::function<std::complex<double>(const Vector&)>;

/// x -> Delta_h^m phi(x) = sum_k (-1)^{m-k} C(m,k) phi(x + k h).
ComplexFunction difference_operator(ComplexFunction phi, Vector h, int m);

struct BesovProbeReport {
  int m = 2;
  double alpha_test = 0.5;
  int levels = 0;
  std::vector<double> h_values;
  std::vector<double> sup_stats;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  double fitted_slope = 0.0;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;

  nlohmann::json to_json() const;
};

struct BesovProbeOptions {
  int m = 2;
  double alpha_test = 0.5;
  std::vector<double> h_grid{1.0, 0.7071067811865476, 0.5, 0.35355339059327373, 0.25};
  /// Defaults to the unit vector along the first axis.
  std::optional<Vector> direction;
  /// Highest dyadic frequency level J; defaults to ceil(log2(1/h_min)) + 1.
  std::optional<int> levels;
  std::size_t bootstrap = 200;
  std::uint64_t seed = 7;
};

/// Finite-difference regularity probe: test functions
/// phi_{k,theta}(x) = k^{-alpha_test} cos(k <direction, x> + theta),
/// k = 2^0..2^J, theta in [0, 2 pi); for each h the statistic
/// sup_{k,theta} |mean_i Delta^m_{h direction} phi_{k,theta}(x_i)| is computed
/// (the sup over theta is available in closed form),
/// and the decay slope in h is fitted by least squares on log-log scale.
/// Percentile bootstrap intervals are reported per h and for the slope.
BesovProbeReport besov_probe(const std::vector<Vector>& samples, const BesovProbeOptions& options = {});

/// Smallest eigenvalue of the symmetric square root of sigma sigma^*, i.e.
/// the smallest singular value of sigma.
double min_eigen_rho(const Matrix& sigma);

/// h_delta(x) = min(dist(x, D_delta), delta) with D_delta = {rho <= delta}
/// approximated by the points of a spatial sample that lie in D_delta. The
/// approximation is exactly 1-Lipschitz, vanishes on the sampled points of
/// D_delta and overestimates the true distance by at most the sample's
/// covering radius (`resolution`). With no sampled point in D_delta the
/// weight is identically delta.
class LocalizationWeight {
 public:
  LocalizationWeight(std::function<double(const Vector&)> rho, double delta, std::vector<Vector> sample,
                     double resolution);

  /// Sample on the regular lattice [lo, hi]^d with `per_axis` points per axis.
  static LocalizationWeight on_lattice(std::function<double(const Vector&)> rho, double delta, std::size_t dim,
                                       double lo, double hi, std::size_t per_axis);

  double operator()(const Vector& x) const;
  double delta() const noexcept { return delta_; }
  double resolution() const noexcept { return resolution_; }
  const std::vector<Vector>& level_set() const noexcept { return level_set_; }

 private:
  double delta_;
  double resolution_;
  std::vector<Vector> level_set_;
};

/// Convenience wrapper: h_delta(x) for a single query.
double localization_weight(const Vector& x, double delta, const LocalizationWeight& approx);

struct DensityEstimate {
  double x_min = 0.0;
  double x_max = 0.0;
  double bandwidth = 0.0;
  std::vector<double> x;
  std::vector<double> values;

  /// Trapezoidal integral of the estimate over its grid.
  double integral() const;
  void save_csv(const std::filesystem::path& path) const;
};

/// Gaussian kernel density estimate of scalar samples on a regular grid
/// spanning the sample range padded by four bandwidths. The bandwidth
/// defaults to the normal-reference rule 1.06 sd N^{-1/5}.
DensityEstimate kde_density(const std::vector<double>& samples, std::optional<double> bandwidth = {},
                            std::size_t grid_points = 256);

/// Terminal values X(T) of N Euler replicas (used by the density studies).
std::vector<Vector> terminal_sample(const sde::CoefficientSpec& c, const Vector& x0, double H, double T,
                                    std::size_t n, std::size_t N, std::uint64_t seed,
                                    fbm::FbmMethod method = fbm::FbmMethod::circulant, Exec exec = Exec::parallel);

}  // namespace fsde::density
