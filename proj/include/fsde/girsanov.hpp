#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fsde/fbm.hpp"
#include "fsde/report.hpp"
#include "fsde/sde.hpp"

namespace fsde::girsanov {

using sde::Vector;
using volterra::Hurst;
using VectorField = std::function<Vector(const Vector&)>;

/// A drift functional h together with the constants of its declared
/// Holder-with-polynomial-growth shape
///   |h(x) - h(y)| <= K |x - y|^lambda (1 + |x|^p + |y|^p).
struct DriftFunctional {
  std::string name;
  VectorField h;
  double K = 0.0;
  double lambda = 1.0;
  double p = 0.0;
  bool bounded = false;
};

/// Built-in functionals: "zero", "constant" (h = mu), "tanh" (mu tanh x,
/// bounded Lipschitz), "sine" (mu sin x).
DriftFunctional drift_functional(const std::string& key, double mu, std::size_t dim = 1);

/// Number of sampled pairs violating the declared shape (warn, not abort).
std::size_t certify_shape(const DriftFunctional& h, std::size_t dim, std::size_t pairs, std::uint64_t seed,
                          double radius = 5.0);

/// Precomputed quadrature weights for K_H^{-1}(int_0^. h(X_r) dr) on a fixed
/// grid [0, T] with n intervals. Shareable across replicas.
class DecompositionPlan {
 public:
  DecompositionPlan(double T, std::size_t n, Hurst H);

  double horizon() const noexcept { return T_; }
  std::size_t n_intervals() const noexcept { return n_; }
  double hurst() const noexcept { return H_; }
  double c0() const noexcept { return c0_; }
  /// (1/kappa_H) (H - 1/2) / Gamma(3/2 - H).
  double prefactor() const noexcept { return prefactor_; }
  /// Root mean square of s^{1/2-H} over cell j, ((1/dt) int s^{1-2H} ds)^{1/2}.
  double cell_power_rms(std::size_t j) const noexcept { return cell_power_rms_[j]; }

  /// Raw singular integral int_0^{s_i} (g(s_i) - g(r)) (s_i - r)^{-1/2-H} r^{1/2-H} dr
  /// for g piecewise linear through the node values g_0..g_i (stride `stride`).
  double increment_integral(std::size_t i, const double* g, std::size_t stride) const;

 private:
  static std::size_t offset(std::size_t i) noexcept { return i * (i - 1) / 2; }

  double T_;
  std::size_t n_;
  double H_;
  double c0_;
  double prefactor_;
  std::vector<double> cell_power_rms_;
  std::vector<double> left_;   // int over cell j of phi_L w_i, row i
  std::vector<double> right_;  // int over cell j of phi_R w_i, row i
};

/// u = K_H^{-1}(int_0^. h(X_r) dr) = prefactor (I1 + I2 + I3) with
///   I1 = (H-1/2)^{-1} s^{1/2-H} h(X_s),
///   I2 = -C_0 s^{1/2-H} h(X_s),
///   I3 = s^{H-1/2} int_0^s (h(X_s) - h(X_r)) (s-r)^{-1/2-H} r^{1/2-H} dr.
/// The sign of I2 follows from s^{1/2-H} - r^{1/2-H} < 0 for r < s.
struct Decomposition {
  FlaggedGridFunction u;
  GridFunction I1;
  GridFunction I2;
  GridFunction I3;
  /// Adapted cell integrand: u on [t_j, t_{j+1}) evaluated with h(X_{t_j}),
  /// using the cell root mean square of s^{1/2-H} for the I1 + I2 part (so
  /// the discrete energy of a constant h is exact). Row-major n x dim.
  std::vector<double> cell_integrand;
};

Decomposition kh_inverse_decomposed(const GridFunction& X, const VectorField& h, const DecompositionPlan& plan);
Decomposition kh_inverse_decomposed(const GridFunction& X, const VectorField& h, Hurst H);

struct WeightPath {
  /// log R(t_i) = sum_{j<i} <u_j, dW_j> - 1/2 sum_{j<i} |u_j|^2 dt.
  GridFunction log_R;
  GridFunction R;
  FlaggedGridFunction u;
  std::vector<double> cell_integrand;
  /// sum_j |u_j|^2 dt, the discrete int_0^T |u|^2 ds entering log R.
  double energy = 0.0;
};

/// Rejects a driving path without its Wiener path (non-kernel generators).
WeightPath radon_nikodym(const sde::SolutionPath& X, const fbm::FbmPath& B, const VectorField& h,
                         const DecompositionPlan& plan);
WeightPath radon_nikodym(const sde::SolutionPath& X, const fbm::BrownianPath& W, const VectorField& h,
                         const DecompositionPlan& plan);

/// Writes (t, u, log R) as CSV for debugging a single replica.
void write_weight_csv(const WeightPath& w, const std::filesystem::path& path);

struct GirsanovConfig {
  double H = 0.75;
  double T = 1.0;
  std::size_t n = 128;
  std::size_t N = 1000;
  std::uint64_t seed = 1;
  double c_exp = 0.1;
  /// Times at which the reweighted fBm law is compared (default T/4..T).
  std::vector<double> times;
};

/// E R_T and E R_T log R_T with standard errors; diagnostic
/// "flag.mean_deviation" = 1 when |E R_T - 1| > 3 SE. Also reports the mean
/// energy and the minimum of R over all replicas and nodes.
MonteCarloReport martingale_check(const sde::CoefficientSpec& c, const DriftFunctional& h, const Vector& x0,
                                  const GirsanovConfig& cfg, Exec exec = Exec::parallel);

/// R_T-weighted mean and second moments of B~_t = B_t - int_0^t h(X_s) ds
/// at the configured times, with deviations from 0 and R_H in SE units.
MonteCarloReport measure_change_check(const sde::CoefficientSpec& c, const DriftFunctional& h, const Vector& x0,
                                      const GirsanovConfig& cfg, Exec exec = Exec::parallel);

/// E exp(c_exp * energy) with the half-sample stability diagnostic.
MonteCarloReport exp_energy_check(const sde::CoefficientSpec& c, const DriftFunctional& h, const Vector& x0,
                                  const GirsanovConfig& cfg, Exec exec = Exec::parallel);

/// Closed-form energy of the constant functional h = mu (scalar):
/// mu^2 (Gamma(3/2-H)/Gamma(2-2H))^2 T^{2-2H} / ((2-2H) kappa_H^2).
double constant_h_energy(double mu, double T, Hurst H);

}  // namespace fsde::girsanov
