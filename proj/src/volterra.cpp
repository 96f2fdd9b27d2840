#include "fsde/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "fsde/error.hpp"
#include "fsde/fraccalc.hpp"
#include "fsde/quadrature.hpp"
#include "fsde/special.hpp"

namespace fsde::volterra {
namespace {

constexpr char kBinaryMagic[8] = {'F', 'S', 'D', 'E', 'K', 'G', '0', '2'};
constexpr std::size_t kCellGaussOrder = 8;

const quad::Tolerance kKernelTol{1e-12, 1e-15, 4000};

// int_a^b K(t, s) ds with a Gauss rule (no singularity inside or at the ends).
double gauss_cell(double t, double a, double b, Hurst H) {
  const auto rule = quad::gauss_legendre(kCellGaussOrder);
  const double c = 0.5 * (a + b);
  const double r = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) acc += rule.weights[k] * kernel_KH(t, c + r * rule.nodes[k], H);
  return r * acc;
}

std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

Hurst::Hurst(double H) : H_(H) {
  require(std::isfinite(H) && H > 0.5 && H < 1.0, "Hurst parameter must lie in (1/2, 1)");
}

double fbm_covariance(double t, double s, Hurst H) {
  require(t >= 0.0 && s >= 0.0, "fbm_covariance requires nonnegative times");
  const double e = 2.0 * H;
  return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

double kernel_normalization(Hurst H) {
  const double h = H;
  return std::sqrt(2.0 * h * std::tgamma(1.5 - h) * std::tgamma(h + 0.5) / std::tgamma(2.0 - 2.0 * h));
}

double kernel_KH(double t, double s, Hurst H, KernelMethod method) {
  require(s > 0.0, "kernel_KH requires s > 0");
  if (s >= t) return 0.0;
  const double h = H;
  const double a = h - 0.5;
  const double kappa = kernel_normalization(H);
  if (method == KernelMethod::hypergeometric) {
    return kappa * std::pow(t - s, a) / std::tgamma(h + 0.5) * gauss_2f1(a, -a, h + 0.5, 1.0 - t / s);
  }
  // r = s + (t - s) w^{1/a} absorbs (r - s)^{a - 1}.
  const double inv_a = 1.0 / a;
  auto integrand = [&](double w) { return std::pow(s + (t - s) * std::pow(w, inv_a), a); };
  const double integral = quad::integrate(integrand, 0.0, 1.0, kKernelTol).value;
  return kappa * std::pow(s, -a) * std::pow(t - s, a) / std::tgamma(h + 0.5) * integral;
}

double kernel_KH_dt(double t, double s, Hurst H) {
  require(t > s && s > 0.0, "kernel_KH_dt requires t > s > 0");
  const double h = H;
  return kernel_normalization(H) * std::pow(s, 0.5 - h) * std::pow(t, h - 0.5) * std::pow(t - s, h - 1.5) /
         std::tgamma(h - 0.5);
}

double kernel_product_integral(double t, double s, Hurst H) {
  require(t > 0.0 && s > 0.0, "kernel_product_integral requires positive times");
  const double h = H;
  const double m = std::min(t, s);
  const double right = t == s ? 2.0 * h - 1.0 : h - 0.5;
  auto f = [&](double r) { return kernel_KH(t, r, H) * kernel_KH(s, r, H); };
  return quad::integrate_singular(f, 0.0, m, 1.0 - 2.0 * h, right, kKernelTol).value;
}

double kernel_tail_energy(double T, double eps, Hurst H) {
  require(T > 0.0 && eps > 0.0 && eps <= T, "kernel_tail_energy requires 0 < eps <= T");
  const double h = H;
  auto f = [&](double s) {
    const double k = kernel_KH(T, s, H);
    return k * k;
  };
  const double left = eps == T ? 1.0 - 2.0 * h : 0.0;
  return quad::integrate_singular(f, T - eps, T, left, 2.0 * h - 1.0, kKernelTol).value;
}

double tail_bound_constant(Hurst H) {
  const double h = H;
  const double g = (h - 0.5) * std::tgamma(h - 0.5);
  return 1.0 / (2.0 * h * g * g);
}

double c0_constant(Hurst H) {
  const double mu = 0.5 - static_cast<double>(H);
  auto f = [&](double u) { return std::expm1(mu * std::log(u)) * std::pow(1.0 - u, mu - 1.0); };
  return quad::integrate_singular(f, 0.0, 1.0, mu, mu, {1e-12, 1e-15, 4000}).value;
}

KernelGrid KernelGrid::build(double T, std::size_t n_intervals, Hurst H, Exec exec) {
  require(T > 0.0 && std::isfinite(T), "kernel grid horizon must be positive");
  require(n_intervals >= 1, "kernel grid needs at least one interval");
  KernelGrid kg(T, n_intervals, H);
  const std::size_t total = offset(n_intervals + 1);
  kg.cells_.assign(total, 0.0);
  kg.weights_.assign(total, 0.0);
  const double h = kg.step();
  const double a = static_cast<double>(H) - 0.5;
  for_each_index(
      n_intervals,
      [&](std::size_t im1) {
        const std::size_t i = im1 + 1;
        const double t = kg.time(i);
        double* row = kg.cells_.data() + offset(i);
        double* wrow = kg.weights_.data() + offset(i);
        auto k = [&](double s) { return kernel_KH(t, s, H); };
        auto k2 = [&](double s) {
          const double v = kernel_KH(t, s, H);
          return v * v;
        };
        for (std::size_t j = 0; j < i; ++j) {
          const double lo = kg.time(j);
          const double hi = kg.time(j + 1);
          if (j == 0 || j + 1 == i) {
            const double left = j == 0 ? -a : 0.0;
            const double right = j + 1 == i ? a : 0.0;
            row[j] = quad::integrate_singular(k, lo, hi, left, right, kKernelTol).value / h;
            wrow[j] = std::sqrt(quad::integrate_singular(k2, lo, hi, 2.0 * left, 2.0 * right, kKernelTol).value / h);
          } else {
            row[j] = gauss_cell(t, lo, hi, H) / h;
            wrow[j] = row[j];
          }
        }
      },
      exec);
  kg.fill_nodal(exec);
  return kg;
}

void KernelGrid::fill_nodal(Exec exec) {
  nodal_.assign(cells_.size(), 0.0);
  for_each_index(
      n_,
      [&](std::size_t im1) {
        const std::size_t i = im1 + 1;
        const double t = time(i);
        double* row = nodal_.data() + offset(i);
        for (std::size_t j = 1; j < i; ++j) row[j] = kernel_KH(t, time(j), Hurst(H_));
      },
      exec);
}

bool KernelGrid::matches(const GridFunction& f) const {
  if (f.n_intervals() != n_ || f.t_start() != 0.0) return false;
  return std::abs(f.t_end() - T_) <= 1e-12 * T_;
}

void KernelGrid::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "horizon,n_intervals,hurst\n" << format_double(T_) << ',' << n_ << ',' << format_double(H_) << '\n';
  out << "i,j,cell,nodal,weight\n";
  for (std::size_t i = 1; i <= n_; ++i)
    for (std::size_t j = 0; j < i; ++j)
      out << i << ',' << j << ',' << format_double(cell(i, j)) << ',' << format_double(nodal(i, j)) << ','
          << format_double(weight(i, j)) << '\n';
}

KernelGrid KernelGrid::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  require(line == "horizon,n_intervals,hurst", "kernel CSV: bad grid header");
  std::getline(in, line);
  double T = 0.0, H = 0.0;
  std::size_t n = 0;
  {
    std::istringstream is(line);
    char c1 = 0, c2 = 0;
    is >> T >> c1 >> n >> c2 >> H;
    require(is && c1 == ',' && c2 == ',', "kernel CSV: bad grid line");
  }
  Hurst hurst(H);
  KernelGrid kg(T, n, hurst);
  kg.cells_.assign(offset(n + 1), 0.0);
  kg.nodal_.assign(offset(n + 1), 0.0);
  kg.weights_.assign(offset(n + 1), 0.0);
  std::getline(in, line);
  require(line == "i,j,cell,nodal,weight", "kernel CSV: bad table header");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::size_t i = 0, j = 0;
    char c = 0;
    std::string rest;
    is >> i >> c >> j >> c;
    std::getline(is, rest);
    const auto c1 = rest.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : rest.find(',', c1 + 1);
    require(c2 != std::string::npos && i >= 1 && i <= n && j < i, "kernel CSV: bad row");
    kg.cells_[offset(i) + j] = std::stod(rest.substr(0, c1));
    kg.nodal_[offset(i) + j] = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
    kg.weights_[offset(i) + j] = std::stod(rest.substr(c2 + 1));
    ++rows;
  }
  require(rows == offset(n + 1), "kernel CSV: incomplete triangle");
  return kg;
}

void KernelGrid::save_binary(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const auto n64 = static_cast<std::uint64_t>(n_);
  out.write(kBinaryMagic, sizeof kBinaryMagic);
  out.write(reinterpret_cast<const char*>(&T_), sizeof T_);
  out.write(reinterpret_cast<const char*>(&n64), sizeof n64);
  out.write(reinterpret_cast<const char*>(&H_), sizeof H_);
  out.write(reinterpret_cast<const char*>(cells_.data()), static_cast<std::streamsize>(cells_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(nodal_.data()), static_cast<std::streamsize>(nodal_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(weights_.data()),
            static_cast<std::streamsize>(weights_.size() * sizeof(double)));
}

KernelGrid KernelGrid::load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  double T = 0.0, H = 0.0;
  std::uint64_t n64 = 0;
  in.read(magic, sizeof magic);
  require(in && std::memcmp(magic, kBinaryMagic, sizeof magic) == 0, "kernel binary: bad magic");
  in.read(reinterpret_cast<char*>(&T), sizeof T);
  in.read(reinterpret_cast<char*>(&n64), sizeof n64);
  in.read(reinterpret_cast<char*>(&H), sizeof H);
  require(in && n64 >= 1 && n64 < (1u << 24), "kernel binary: bad header");
  Hurst hurst(H);
  KernelGrid kg(T, static_cast<std::size_t>(n64), hurst);
  const std::size_t total = offset(kg.n_ + 1);
  kg.cells_.resize(total);
  kg.nodal_.resize(total);
  kg.weights_.resize(total);
  for (auto* v : {&kg.cells_, &kg.nodal_, &kg.weights_})
    in.read(reinterpret_cast<char*>(v->data()), static_cast<std::streamsize>(total * sizeof(double)));
  require(static_cast<bool>(in), "kernel binary: truncated");
  return kg;
}

GridFunction operator_KH(const GridFunction& f, const KernelGrid& kg) {
  require(kg.matches(f), "operator_KH: grid mismatch");
  const std::size_t n = f.n_intervals();
  const std::size_t d = f.dim();
  const double h = kg.step();
  GridFunction out(f.t_start(), f.t_end(), n, d);
  for (std::size_t i = 1; i <= n; ++i) {
    const double* row = kg.cell_row(i);
    for (std::size_t k = 0; k < d; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < i; ++j) acc += row[j] * 0.5 * (f(j, k) + f(j + 1, k));
      out(i, k) = h * acc;
    }
  }
  return out;
}

FlaggedGridFunction operator_KH_star(const GridFunction& phi, const KernelGrid& kg) {
  require(kg.matches(phi), "operator_KH_star: grid mismatch");
  const std::size_t n = phi.n_intervals();
  const std::size_t d = phi.dim();
  GridFunction out(phi.t_start(), phi.t_end(), n, d);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      double acc = 0.0;
      for (std::size_t j = i; j < n; ++j) acc += phi(j, k) * (kg.nodal(j + 1, i) - kg.nodal(j, i));
      out(i, k) = acc;
    }
  }
  return {std::move(out), std::size_t{0}};
}

FlaggedGridFunction operator_KH_inverse(const GridFunction& h, Hurst H) {
  require(h.t_start() == 0.0, "operator_KH_inverse requires a grid starting at 0");
  require(h.n_intervals() >= 8, "operator_KH_inverse needs at least 8 intervals");
  require(h.all_finite(), "operator_KH_inverse: non-finite input");
  const std::size_t n = h.n_intervals();
  const std::size_t d = h.dim();
  double scale = 0.0;
  for (double v : h.values()) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 0; k < d; ++k)
    require(std::abs(h(0, k)) <= 1e-12 * std::max(scale, 1.0), "operator_KH_inverse requires h(0) = 0");

  const double step = h.step();
  const double mu = 0.5 - static_cast<double>(H);
  GridFunction weighted(0.0, h.t_end(), n, d);
  for (std::size_t i = 1; i <= n; ++i) {
    const double w = std::pow(h.time(i), mu);
    for (std::size_t k = 0; k < d; ++k) {
      double deriv;
      if (i == n) {
        deriv = (3.0 * h(n, k) - 4.0 * h(n - 1, k) + h(n - 2, k)) / (2.0 * step);
      } else {
        deriv = (h(i + 1, k) - h(i - 1, k)) / (2.0 * step);
      }
      weighted(i, k) = w * deriv;
    }
  }
  FlaggedGridFunction D =
      fraccalc::weyl_derivative(weighted, {static_cast<double>(H) - 0.5, fraccalc::Side::left}, {mu});
  const double inv_kappa = 1.0 / kernel_normalization(H);
  for (std::size_t i = 1; i <= n; ++i) {
    const double w = inv_kappa * std::pow(h.time(i), -mu);
    for (std::size_t k = 0; k < d; ++k) D.values(i, k) *= w;
  }
  for (std::size_t k = 0; k < d; ++k) D.values(0, k) = 0.0;
  D.undefined_node = 0;
  return D;
}

double l2_inner_product(const FlaggedGridFunction& a, const FlaggedGridFunction& b, double origin_exponent) {
  require(a.values.same_grid(b.values) && a.values.dim() == b.values.dim(), "l2_inner_product: grid mismatch");
  require(origin_exponent > -1.0, "l2_inner_product: origin exponent must exceed -1");
  const GridFunction& f = a.values;
  const GridFunction& g = b.values;
  const std::size_t n = f.n_intervals();
  const double h = f.step();
  const double mu = origin_exponent;
  // Product integration against the weight (s - t0)^mu: the regular factor
  // q(s) = a(s) b(s) (s - t0)^{-mu} is interpolated linearly, constant on the
  // first cell.
  std::vector<double> q(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    double dot = 0.0;
    for (std::size_t k = 0; k < f.dim(); ++k) dot += f(i, k) * g(i, k);
    q[i] = dot * std::pow(static_cast<double>(i) * h, -mu);
  }
  const double e1 = mu + 1.0;
  const double e2 = mu + 2.0;
  const double h1 = std::pow(h, e1);
  double total = h1 / e1 * q[1];
  for (std::size_t j = 1; j < n; ++j) {
    const auto jd = static_cast<double>(j);
    const double m0 = h1 * (std::pow(jd + 1.0, e1) - std::pow(jd, e1)) / e1;
    const double m1 = h1 * (std::pow(jd + 1.0, e2) - std::pow(jd, e2)) / e2 - jd * m0;
    total += q[j] * (m0 - m1) + q[j + 1] * m1;
  }
  return total;
}

}  // namespace fsde::volterra
