#include "fsde/fraccalc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fsde/error.hpp"
#include "fsde/quadrature.hpp"

namespace fsde::fraccalc {
namespace {

void require_finite(const GridFunction& f) { require(f.all_finite(), "grid function has non-finite values"); }

// Left-sided Riemann-Liouville integral with the product trapezoidal rule.
GridFunction rl_left(const GridFunction& f, double alpha, Exec exec) {
  const std::size_t n = f.n_intervals();
  const std::size_t d = f.dim();
  const double h = f.step();
  std::vector<double> pw(n + 2);
  for (std::size_t k = 0; k < pw.size(); ++k) pw[k] = std::pow(static_cast<double>(k), alpha + 1.0);
  std::vector<double> interior(n + 1, 0.0);  // weight for lag k >= 1
  for (std::size_t k = 1; k <= n; ++k) interior[k] = pw[k + 1] + pw[k - 1] - 2.0 * pw[k];
  const double scale = std::pow(h, alpha) / std::tgamma(alpha + 2.0);

  GridFunction out(f.t_start(), f.t_end(), n, d);
  for_each_index(
      n,
      [&](std::size_t im1) {
        const std::size_t i = im1 + 1;
        const auto id = static_cast<double>(i);
        const double w0 = pw[i - 1] - (id - 1.0 - alpha) * std::pow(id, alpha);
        for (std::size_t k = 0; k < d; ++k) {
          double acc = w0 * f(0, k) + f(i, k);
          for (std::size_t j = 1; j < i; ++j) acc += interior[i - j] * f(j, k);
          out(i, k) = scale * acc;
        }
      },
      exec);
  return out;
}

// sum_{k>=0} (alpha+1)_k / (k! (mu+k+1)) x^k, x = 1/i <= 1/2.
double origin_cell_moment(double mu, double alpha, std::size_t i) {
  const double x = 1.0 / static_cast<double>(i);
  double term = 1.0;
  double sum = 1.0 / (mu + 1.0);
  for (int k = 0; k < 200; ++k) {
    term *= (alpha + 1.0 + k) / (k + 1.0) * x;
    const double add = term / (mu + k + 2.0);
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum)) break;
  }
  return std::pow(x, alpha + 1.0) * sum;
}

FlaggedGridFunction weyl_left(const GridFunction& f, double alpha, const WeylOptions& options, Exec exec) {
  const std::size_t n = f.n_intervals();
  const std::size_t d = f.dim();
  const double h = f.step();
  std::vector<double> q(n + 1), r(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const auto kd = static_cast<double>(k);
    q[k] = k == 0 ? 0.0 : std::pow(kd, -alpha);
    r[k] = std::pow(kd, 1.0 - alpha);
  }
  const double h_neg = std::pow(h, -alpha);
  const double h_pos = std::pow(h, 1.0 - alpha);
  const double slope_factor = alpha / (1.0 - alpha);
  const double inv_gamma = 1.0 / std::tgamma(1.0 - alpha);
  const bool power_origin = options.origin_exponent.has_value();
  const double mu = power_origin ? *options.origin_exponent : 0.0;
  if (power_origin) require(mu > -1.0, "origin exponent must exceed -1");
  const double power_law_ratio = power_origin ? std::tgamma(mu + 1.0) / std::tgamma(mu + 1.0 - alpha) : 0.0;

  GridFunction out(f.t_start(), f.t_end(), n, d);
  for_each_index(
      n,
      [&](std::size_t im1) {
        const std::size_t i = im1 + 1;
        for (std::size_t c = 0; c < d; ++c) {
          const double fi = f(i, c);
          if (power_origin && i == 1) {
            out(i, c) = fi * h_neg * power_law_ratio;
            continue;
          }
          double acc = fi * q[i] * h_neg;  // boundary term f(x)/(x - a)^alpha
          const std::size_t j_begin = power_origin ? 1 : 0;
          if (power_origin) {
            acc += fi * h_neg * (q[i - 1] - q[i]) - alpha * f(1, c) * h_neg * origin_cell_moment(mu, alpha, i);
          }
          for (std::size_t j = j_begin; j + 1 < i; ++j) {
            const std::size_t k = i - j;
            const double s = (f(j + 1, c) - f(j, c)) / h;
            const double A = fi - f(j, c) - s * static_cast<double>(k) * h;
            acc += A * h_neg * (q[k - 1] - q[k]) + slope_factor * s * h_pos * (r[k] - r[k - 1]);
          }
          const double s_last = (fi - f(i - 1, c)) / h;
          acc += slope_factor * s_last * h_pos;
          out(i, c) = inv_gamma * acc;
        }
      },
      exec);

  FlaggedGridFunction result{std::move(out), std::nullopt};
  bool vanishes = true;
  for (std::size_t c = 0; c < d; ++c) vanishes = vanishes && f(0, c) == 0.0;
  if (power_origin || !vanishes) result.undefined_node = 0;
  return result;
}

}  // namespace

GridFunction riemann_liouville_integral(const GridFunction& f, FracOrder order, Exec exec) {
  require(order.alpha > 0.0 && order.alpha <= 1.0, "Riemann-Liouville order must lie in (0, 1]");
  require(f.n_intervals() >= 2, "Riemann-Liouville integral needs at least two intervals");
  require_finite(f);
  if (order.side == Side::left) return rl_left(f, order.alpha, exec);
  return rl_left(f.reversed(), order.alpha, exec).reversed();
}

FlaggedGridFunction weyl_derivative(const GridFunction& f, FracOrder order, WeylOptions options, Exec exec) {
  require(order.alpha > 0.0 && order.alpha < 1.0, "Weyl derivative order must lie in (0, 1)");
  require(f.n_intervals() >= 8, "grid too coarse for the singular integral (need n_intervals >= 8)");
  require_finite(f);
  if (order.side == Side::left) return weyl_left(f, order.alpha, options, exec);
  FlaggedGridFunction mirrored = weyl_left(f.reversed(), order.alpha, options, exec);
  FlaggedGridFunction out{mirrored.values.reversed(), std::nullopt};
  if (mirrored.undefined_node) out.undefined_node = f.n_intervals() - *mirrored.undefined_node;
  return out;
}

double holder_seminorm(const GridFunction& f, double beta, const std::optional<Window>& window,
                       HolderOptions options, Exec exec) {
  require(beta > 0.0 && beta <= 1.0, "Holder exponent must lie in (0, 1]");
  const auto [first, last] = f.window_nodes(window);
  if (last == first) return 0.0;
  const std::size_t count = last - first + 1;
  const double h = f.step();
  std::vector<double> inv_pow(count);
  for (std::size_t k = 1; k < count; ++k) inv_pow[k] = std::pow(static_cast<double>(k) * h, -beta);

  const std::size_t stride =
      count > options.exact_node_cap ? (count + options.exact_node_cap - 1) / options.exact_node_cap : 1;
  const std::size_t anchors = (count - 1 + stride - 1) / stride;
  std::vector<double> best(anchors, 0.0);
  for_each_index(
      anchors,
      [&](std::size_t a) {
        const std::size_t s = first + a * stride;
        const auto xs = f.node(s);
        double m = 0.0;
        for (std::size_t t = s + 1; t <= last; ++t) m = std::max(m, distance(f.node(t), xs) * inv_pow[t - s]);
        best[a] = m;
      },
      exec);
  return *std::max_element(best.begin(), best.end());
}

double sup_norm(const GridFunction& f, const std::optional<Window>& window) {
  const auto [first, last] = f.window_nodes(window);
  double m = 0.0;
  for (std::size_t i = first; i <= last; ++i) m = std::max(m, euclidean_norm(f.node(i)));
  return m;
}

double young_default_alpha(double beta_f, double beta_g) { return 0.5 * ((1.0 - beta_g) + beta_f); }

double young_integral(const GridFunction& f, const GridFunction& g, double beta_f, double beta_g,
                      std::optional<double> alpha_override) {
  require(beta_f + beta_g > 1.0, "Young condition violated: beta_f + beta_g must exceed 1");
  require(f.dim() == 1 && g.dim() == 1, "young_integral expects scalar paths");
  require(f.same_grid(g), "young_integral requires both paths on the same grid");
  const double alpha = alpha_override.value_or(young_default_alpha(beta_f, beta_g));
  require(alpha > 1.0 - beta_g && alpha < beta_f && alpha > 0.0 && alpha < 1.0,
          "alpha must lie in (1 - beta_g, beta_f)");

  const std::size_t n = f.n_intervals();
  const double h = f.step();
  const double f0 = f(0);

  // D^alpha_{a+} f = f(a) (t-a)^{-alpha} / Gamma(1-alpha) + D^alpha_{a+}(f - f(a)).
  GridFunction shifted = f;
  for (std::size_t i = 0; i <= n; ++i) shifted(i) -= f0;
  const GridFunction regular = weyl_derivative(shifted, {alpha, Side::left}, {}, Exec::serial).values;

  GridFunction g_b = g;
  const double gb = g(n);
  for (std::size_t i = 0; i <= n; ++i) g_b(i) -= gb;
  const GridFunction right = weyl_derivative(g_b, {1.0 - alpha, Side::right}, {}, Exec::serial).values;

  // Trapezoidal rule for the regular product (both factors vanish at the
  // respective singular ends).
  double regular_part = 0.0;
  for (std::size_t j = 0; j < n; ++j) regular_part += 0.5 * h * (regular(j) * right(j) + regular(j + 1) * right(j + 1));

  // Exact integration of (t-a)^{-alpha} against the linear interpolant of
  // the right derivative.
  double singular_part = 0.0;
  if (f0 != 0.0) {
    const double one_m = 1.0 - alpha;
    const double two_m = 2.0 - alpha;
    for (std::size_t j = 0; j < n; ++j) {
      const auto jd = static_cast<double>(j);
      const double m0 = std::pow(h, one_m) * (std::pow(jd + 1.0, one_m) - std::pow(jd, one_m)) / one_m;
      const double m1 = std::pow(h, two_m) * (std::pow(jd + 1.0, two_m) - std::pow(jd, two_m)) / two_m - jd * h * m0;
      singular_part += right(j) * m0 + (right(j + 1) - right(j)) * m1 / h;
    }
    singular_part *= f0 / std::tgamma(1.0 - alpha);
  }
  return -(regular_part + singular_part);
}

double young_integral_rs(const GridFunction& f, const GridFunction& g) {
  require(f.dim() == 1 && g.dim() == 1, "young_integral_rs expects scalar paths");
  require(f.same_grid(g), "young_integral_rs requires both paths on the same grid");
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t j = 0; j < f.n_intervals(); ++j) {
    const double term = 0.5 * (f(j) + f(j + 1)) * (g(j + 1) - g(j)) - carry;
    const double next = sum + term;
    carry = (next - sum) - term;
    sum = next;
  }
  return sum;
}

double bounded_fraction_integral(double p, double p_prime, double k, double x) {
  require(p > 0.0 && p_prime > 1.0 && p - p_prime + 1.0 > 0.0,
          "bounded_fraction_integral requires p > 0, p' > 1 and p - p' + 1 > 0");
  require(k > 0.0 && x > 0.0, "bounded_fraction_integral requires k > 0 and x > 0");
  const double e = p - p_prime + 1.0;
  const double q = p / e;
  const double upper = std::pow(x, e);
  auto integrand = [&](double w) { return k / (1.0 + k * std::pow(w, q)); };
  const quad::Tolerance tol{1e-12, 1e-300, 4000};
  double lo = 0.0;
  double hi = std::min(upper, 1.0);
  double total = quad::integrate_singular(integrand, lo, hi, q, 0.0, tol).value;
  while (hi < upper) {
    lo = hi;
    hi = std::min(upper, 2.0 * hi);
    total += quad::integrate(integrand, lo, hi, tol).value;
  }
  return total / e;
}

}  // namespace fsde::fraccalc
