#pragma once

// Reference computations used by the tests. Everything here is written
// independently of the library code it checks: Boost special functions and
// tanh-sinh quadrature, brute-force scans, textbook statistics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_pFq.hpp>

namespace oracle {

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  static thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
  return ts.integrate(f, a, b, tol);
}

inline double integrate_to_infinity(const std::function<double(double)>& f, double a) {
  boost::math::quadrature::exp_sinh<double> es;
  return es.integrate([&](double x) { return f(x); }, a, std::numeric_limits<double>::infinity());
}

/// 2F1 by Boost's series inside the unit disc and by Euler's integral
///   Gamma(c) / (Gamma(b) Gamma(c-b)) int_0^1 t^{b-1} (1-t)^{c-b-1} (1-zt)^{-a} dt
/// (with a and b swapped if needed so that 0 < b < c) for z <= -1.
inline double hyp2f1(double a, double b, double c, double z) {
  if (std::abs(z) < 0.9) return boost::math::hypergeometric_pFq({a, b}, {c}, z);
  if (!(b > 0.0 && c > b)) std::swap(a, b);
  const double pre = std::tgamma(c) / (std::tgamma(b) * std::tgamma(c - b));
  static thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
  auto f = [&](double t, double tc) {
    const double one_minus_t = t > 0.5 ? tc : 1.0 - t;
    return std::pow(t, b - 1.0) * std::pow(one_minus_t, c - b - 1.0) * std::pow(1.0 - z * t, -a);
  };
  return pre * ts.integrate(f, 0.0, 1.0, 1e-14);
}

inline double kappa(double H) {
  return std::sqrt(2.0 * H * std::tgamma(1.5 - H) * std::tgamma(H + 0.5) / std::tgamma(2.0 - 2.0 * H));
}

inline double covariance(double t, double s, double H) {
  return 0.5 * (std::pow(t, 2 * H) + std::pow(s, 2 * H) - std::pow(std::abs(t - s), 2 * H));
}

/// Kernel from its integral form. With r = s + u^q, q = 1/(H - 1/2), the
/// singular factor (r - s)^{H - 3/2} dr becomes q du.
inline double kernel(double t, double s, double H) {
  if (s >= t) return 0.0;
  const double q = 1.0 / (H - 0.5);
  const double I =
      integrate([&](double u) { return q * std::pow(s + std::pow(u, q), H - 0.5); }, 0.0, std::pow(t - s, H - 0.5), 1e-14);
  return kappa(H) * std::pow(s, 0.5 - H) / std::tgamma(H - 0.5) * I;
}

/// Kernel through Boost's generalized hypergeometric function.
inline double kernel_hyp(double t, double s, double H) {
  if (s >= t) return 0.0;
  return kappa(H) * std::pow(t - s, H - 0.5) / std::tgamma(H + 0.5) * hyp2f1(H - 0.5, 0.5 - H, H + 0.5, 1.0 - t / s);
}

/// Max over all node pairs of |f(t)-f(s)| / (t-s)^beta, scalar values.
inline double holder_brute(const std::vector<double>& t, const std::vector<double>& f, double beta) {
  double best = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j)
      best = std::max(best, std::abs(f[j] - f[i]) / std::pow(t[j] - t[i], beta));
  return best;
}

/// Delta_h^m phi(x) by the recursion Delta^m = Delta(Delta^{m-1}).
inline std::complex<double> difference_recursive(const std::function<std::complex<double>(double)>& phi, double x,
                                                 double h, int m) {
  if (m == 0) return phi(x);
  return difference_recursive(phi, x + h, h, m - 1) - difference_recursive(phi, x, h, m - 1);
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Critical value of the two-sample KS statistic at level 1%.
inline double ks_critical_1pct(std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return 1.6276 * std::sqrt((nn + mm) / (nn * mm));
}

struct MeanSe {
  double mean;
  double se;
};

inline MeanSe mean_se(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()))};
}

/// |estimate - target| <= k * se, with a floor for exact zero SE.
inline bool within_se(const MeanSe& e, double target, double k = 3.0) {
  return std::abs(e.mean - target) <= k * e.se + 1e-12;
}

inline double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxy / sxx;
}

inline std::vector<double> log_all(std::vector<double> v) {
  for (double& x : v) x = std::log(x);
  return v;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Fresh temporary directory under the system temp root.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto p = std::filesystem::temp_directory_path() / ("fsde-test-" + tag + "-" + std::to_string(rng()));
  std::filesystem::create_directories(p);
  return p;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::FILE* f = std::fopen(p.c_str(), "rb");
  if (!f) return {};
  std::string s;
  char buf[4096];
  std::size_t k;
  while ((k = std::fread(buf, 1, sizeof buf, f)) > 0) s.append(buf, k);
  std::fclose(f);
  return s;
}

}  // namespace oracle
