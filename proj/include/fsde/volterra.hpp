#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "fsde/exec.hpp"
#include "fsde/grid.hpp"

namespace fsde::volterra {

/// Hurst parameter restricted to the regime H in (1/2, 1).
class Hurst {
 public:
  explicit Hurst(double H);
  double value() const noexcept { return H_; }
  operator double() const noexcept { return H_; }

 private:
  double H_;
};

/// R_H(t, s) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double t, double s, Hurst H);

enum class KernelMethod { integral, hypergeometric };

/// Normalizing constant of the Volterra kernel. The kernel is
///   K_H(t,s) = kappa_H s^{1/2-H} / Gamma(H-1/2) int_s^t r^{H-1/2} (r-s)^{H-3/2} dr
///            = kappa_H (t-s)^{H-1/2} / Gamma(H+1/2) 2F1(H-1/2, 1/2-H; H+1/2; 1-t/s)
/// with kappa_H = sqrt(2H Gamma(3/2-H) Gamma(H+1/2) / Gamma(2-2H)), chosen so
/// that int_0^{t^s} K_H(t,r) K_H(s,r) dr = R_H(t,s). Without kappa_H the
/// product integral equals V_H R_H, V_H = 1 / kappa_H^2.
double kernel_normalization(Hurst H);

/// K_H(t, s) for 0 < s; zero for s >= t.
double kernel_KH(double t, double s, Hurst H, KernelMethod method = KernelMethod::hypergeometric);

/// d/dt K_H(t, s) = kappa_H s^{1/2-H} t^{H-1/2} (t-s)^{H-3/2} / Gamma(H-1/2), t > s > 0.
double kernel_KH_dt(double t, double s, Hurst H);

/// int_0^{min(t,s)} K_H(t,r) K_H(s,r) dr by endpoint-singular quadrature.
double kernel_product_integral(double t, double s, Hurst H);

/// v_eps = int_{T-eps}^T K_H(T,s)^2 ds.
double kernel_tail_energy(double T, double eps, Hurst H);

/// Lower-bound constant C_H = 1 / (2H [(H-1/2) Gamma(H-1/2)]^2) of the tail
/// energy for the unnormalized kernel. For the normalized kernel the bound
/// reads v_eps >= kappa_H^2 C_H eps^{2H}.
double tail_bound_constant(Hurst H);

/// C_0 = int_0^1 (u^{1/2-H} - 1) / (1-u)^{1/2+H} du  (> 0).
double c0_constant(Hurst H);

/// Precomputed Volterra kernel on the uniform grid t_i = i T / n.
///
/// cell(i, j) = (1/dt) int_{t_j}^{t_{j+1}} K_H(t_i, s) ds for j < i is the
/// cell-averaged kernel: B^H(t_i) = sum_j cell(i, j) dW_j discretizes
/// B^H_t = int_0^t K_H(t,s) dW_s exactly for piecewise-constant integrands.
/// nodal(i, j) = K_H(t_i, t_j) for 1 <= j < i; column j = 0 is singular and
/// stored as 0. weight(i, j) is the sampling weight used by the kernel fBm
/// generator: the cell average, except on the two singular cells of each
/// row (j = 0 and j = i - 1) where the root mean square
/// ((1/dt) int K_H(t_i, s)^2 ds)^{1/2} is used, so that the variance carried
/// by those cells is exact. All triangles vanish for j >= i.
class KernelGrid {
 public:
  static KernelGrid build(double T, std::size_t n_intervals, Hurst H, Exec exec = Exec::parallel);

  double horizon() const noexcept { return T_; }
  std::size_t n_intervals() const noexcept { return n_; }
  double hurst() const noexcept { return H_; }
  double step() const noexcept { return T_ / static_cast<double>(n_); }
  double time(std::size_t i) const noexcept { return T_ * static_cast<double>(i) / static_cast<double>(n_); }

  double cell(std::size_t i, std::size_t j) const noexcept { return j < i ? cells_[offset(i) + j] : 0.0; }
  double nodal(std::size_t i, std::size_t j) const noexcept { return j < i ? nodal_[offset(i) + j] : 0.0; }
  double weight(std::size_t i, std::size_t j) const noexcept { return j < i ? weights_[offset(i) + j] : 0.0; }
  /// Row i of the cell-averaged kernel (length i).
  const double* cell_row(std::size_t i) const noexcept { return cells_.data() + offset(i); }
  /// Row i of the generator weights (length i).
  const double* weight_row(std::size_t i) const noexcept { return weights_.data() + offset(i); }

  bool matches(const GridFunction& f) const;

  void save_csv(const std::filesystem::path& path) const;
  static KernelGrid load_csv(const std::filesystem::path& path);
  void save_binary(const std::filesystem::path& path) const;
  static KernelGrid load_binary(const std::filesystem::path& path);

  bool operator==(const KernelGrid&) const = default;

 private:
  KernelGrid(double T, std::size_t n, double H) : T_(T), n_(n), H_(H) {}
  static std::size_t offset(std::size_t i) noexcept { return i * (i - 1) / 2; }
  void fill_nodal(Exec exec);

  double T_;
  std::size_t n_;
  double H_;
  std::vector<double> cells_;
  std::vector<double> nodal_;
  std::vector<double> weights_;
};

/// (K_H f)(t_i) = int_0^{t_i} K_H(t_i, s) f(s) ds using the cell-averaged
/// kernel against the cell means of the piecewise linear f. Result(0) = 0.
GridFunction operator_KH(const GridFunction& f, const KernelGrid& kg);

/// (K_H^* phi)(s) = int_s^T phi(r) dK_H/dr(r, s) dr for phi a step function
/// taking the value phi(t_j) on [t_j, t_{j+1}). Evaluated exactly through
/// kernel differences; the origin is flagged.
FlaggedGridFunction operator_KH_star(const GridFunction& phi, const KernelGrid& kg);

/// (K_H^{-1} h)(s) = kappa_H^{-1} s^{H-1/2} D^{H-1/2}_{0+} (s^{1/2-H} h')(s)
/// with h' from centred differences (one-sided at the ends). Requires
/// h(0) = 0 and t_start = 0; the origin is flagged.
FlaggedGridFunction operator_KH_inverse(const GridFunction& h, Hurst H);

/// L^2([0, T]) inner product of two grid functions whose product behaves
/// like s^{origin_exponent} at the origin (flagged origin values ignored).
double l2_inner_product(const FlaggedGridFunction& a, const FlaggedGridFunction& b,
                        double origin_exponent);

}  // namespace fsde::volterra
