#pragma once

#include <cstddef>
#include <optional>

#include "fsde/exec.hpp"
#include "fsde/grid.hpp"

namespace fsde::fraccalc {

enum class Side { left, right };

/// Order of a fractional operator together with the side it acts from.
/// Riemann-Liouville integrals accept alpha = 1 (ordinary integral);
/// derivatives require alpha in (0, 1).
struct FracOrder {
  double alpha;
  Side side = Side::left;
};

/// Left (I^alpha_{a+}) or right (I^alpha_{b-}) Riemann-Liouville integral on
/// the grid of `f`. f is interpolated piecewise linearly and the power
/// weight (x - y)^(alpha - 1) is integrated exactly on each cell (product
/// trapezoidal rule). The result vanishes at a (left) or b (right).
///
/// The right-sided operator is the real operator
///   1/Gamma(alpha) * int_x^b f(y) (y - x)^(alpha - 1) dy,
/// i.e. without the complex phase (-1)^(-alpha).
GridFunction riemann_liouville_integral(const GridFunction& f, FracOrder order,
                                        Exec exec = Exec::parallel);

struct WeylOptions {
  /// When set, f is modelled on the cell adjacent to the base point by the
  /// power law f(y) = f(y_1) (y / y_1)^origin_exponent instead of the linear
  /// interpolant, and the base node is reported as undefined. Used for
  /// integrands such as s^(1/2-H) h'(s) that blow up at the origin.
  std::optional<double> origin_exponent;
};

/// Weyl (Marchaud) derivative
///   D^alpha_{a+} f(x) = 1/Gamma(1-alpha) [ f(x)/(x-a)^alpha
///                        + alpha int_a^x (f(x)-f(y))/(x-y)^(alpha+1) dy ]
/// and its right-sided mirror (real convention, no (-1)^alpha phase).
/// The singular integral uses the piecewise linear interpolant of f with
/// the power weight integrated analytically per cell. The base node (a for
/// the left side, b for the right side) is flagged as undefined unless f
/// vanishes there, in which case the derivative limit 0 is reported.
FlaggedGridFunction weyl_derivative(const GridFunction& f, FracOrder order, WeylOptions options = {},
                                    Exec exec = Exec::parallel);

struct HolderOptions {
  /// Above this many nodes in the window the pair scan uses a stratified
  /// subset of left endpoints (every node remains a right endpoint).
  std::size_t exact_node_cap = 8192;
};

/// Grid-pair Holder seminorm max_{s<t} |f(t) - f(s)| / (t - s)^beta over the
/// nodes in the window. This is a lower bound for the continuum seminorm.
double holder_seminorm(const GridFunction& f, double beta, const std::optional<Window>& window = {},
                       HolderOptions options = {}, Exec exec = Exec::serial);

/// max |f| over the nodes in the window.
double sup_norm(const GridFunction& f, const std::optional<Window>& window = {});

/// Young integral int_a^b f dg via the fractional integration-by-parts
/// formula
///   int f dg = - int_a^b D^alpha_{a+} f(t) D^{1-alpha}_{b-} g_{b-}(t) dt
/// (real-convention right derivative, which absorbs the phases
/// (-1)^alpha (-1)^{1-alpha} = -1). alpha defaults to the midpoint of the
/// admissible interval (1 - beta_g, beta_f). Scalar paths only.
double young_integral(const GridFunction& f, const GridFunction& g, double beta_f, double beta_g,
                      std::optional<double> alpha = {});

/// Trapezoidal Riemann-Stieltjes sum sum_j (f_j + f_{j+1})/2 (g_{j+1} - g_j)
/// with Kahan-compensated accumulation. This is the exact Stieltjes
/// integral of the piecewise linear interpolants; used as a cross-check.
double young_integral_rs(const GridFunction& f, const GridFunction& g);

/// Admissible alpha for the fractional formula (midpoint rule).
double young_default_alpha(double beta_f, double beta_g);

/// int_0^x k u^(p - p') / (1 + k u^p) du by adaptive quadrature after the
/// substitution u = w^(1/(p - p' + 1)), which removes the origin
/// singularity. Requires p > 0, p' > 1, p - p' + 1 > 0, k > 0, x > 0.
double bounded_fraction_integral(double p, double p_prime, double k, double x);

}  // namespace fsde::fraccalc
