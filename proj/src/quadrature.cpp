#include "fsde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <vector>

#include "fsde/error.hpp"

namespace fsde::quad {
namespace {

// Kronrod 15-point abscissae (x >= 0) and weights; Gauss 7-point weights on
// the odd-indexed abscissae.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment kronrod(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  resk *= h;
  resg *= h;
  return {a, b, resk, std::abs(resk - resg)};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, Tolerance tol) {
  if (a == b) return {};
  if (b < a) {
    Result r = integrate(f, b, a, tol);
    r.value = -r.value;
    return r;
  }
  std::priority_queue<Segment> heap;
  Segment first = kronrod(f, a, b);
  Result out{first.value, first.error, 15};
  heap.push(first);
  double total = first.value;
  double total_err = first.error;
  while (total_err > std::max(tol.absolute, tol.relative * std::abs(total)) && heap.size() < tol.max_intervals) {
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    Segment left = kronrod(f, worst.a, mid);
    Segment right = kronrod(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to remove the drift of incremental updates.
  double value = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = value;
  out.error = err;
  if (!std::isfinite(value)) throw NumericalError("quadrature produced a non-finite value");
  return out;
}

double grading_power(double exponent) {
  require(exponent > -1.0, "endpoint exponent must exceed -1");
  if (exponent < 0.0) return 1.0 / (1.0 + exponent);
  const double rounded = std::round(exponent);
  if (std::abs(exponent - rounded) < 1e-12) return 1.0;
  // p (1 + exponent) = ceil(1 + exponent) makes the mapped integrand behave
  // like an integer power of w.
  return std::ceil(1.0 + exponent) / (1.0 + exponent);
}

Result integrate_singular(const std::function<double(double)>& f, double a, double b, double left_exponent,
                          double right_exponent, Tolerance tol) {
  require(b > a, "integration interval must be nonempty");
  const double mid = 0.5 * (a + b);
  const double half = mid - a;
  const double pl = grading_power(left_exponent);
  const double pr = grading_power(right_exponent);
  // Split the relative tolerance budget between halves via the absolute floor.
  auto left = [&](double w) {
    if (w <= 0.0) return 0.0;
    const double wp = std::pow(w, pl);
    return f(a + half * wp) * half * pl * wp / w;
  };
  auto right = [&](double w) {
    if (w <= 0.0) return 0.0;
    const double wp = std::pow(w, pr);
    return f(b - half * wp) * half * pr * wp / w;
  };
  Result rl = pl == 1.0 ? integrate(f, a, mid, tol) : integrate(left, 0.0, 1.0, tol);
  Result rr = pr == 1.0 ? integrate(f, mid, b, tol) : integrate(right, 0.0, 1.0, tol);
  return {rl.value + rr.value, rl.error + rr.error, rl.evaluations + rr.evaluations};
}

GaussRule gauss_legendre(std::size_t order) {
  static std::mutex mutex;
  static std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> cache;
  require(order >= 1, "Gauss-Legendre order must be positive");
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) {
    std::vector<double> x(order), w(order);
    const auto n = static_cast<double>(order);
    for (std::size_t i = 0; i < order; ++i) {
      double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = 0.0;
        for (std::size_t k = 1; k <= order; ++k) {
          const double p2 = p1;
          p1 = p0;
          const auto kd = static_cast<double>(k);
          p0 = ((2.0 * kd - 1.0) * z * p1 - (kd - 1.0) * p2) / kd;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = -z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    it = cache.emplace(order, std::make_pair(std::move(x), std::move(w))).first;
  }
  return {it->second.first, it->second.second};
}

}  // namespace fsde::quad
