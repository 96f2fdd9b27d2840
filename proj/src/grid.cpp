#include "fsde/grid.hpp"

#include <algorithm>
#include <cmath>

#include "fsde/error.hpp"

namespace fsde {

GridFunction::GridFunction(double t_start, double t_end, std::size_t n_intervals, std::size_t dim)
    : GridFunction(t_start, t_end, n_intervals, dim, std::vector<double>((n_intervals + 1) * dim, 0.0)) {}

GridFunction::GridFunction(double t_start, double t_end, std::size_t n_intervals, std::size_t dim,
                           std::vector<double> values)
    : t_start_(t_start), t_end_(t_end), n_(n_intervals), dim_(dim), values_(std::move(values)) {
  require(std::isfinite(t_start) && std::isfinite(t_end) && t_end > t_start, "grid requires t_end > t_start");
  require(n_intervals >= 1, "grid requires at least one interval");
  require(dim >= 1, "grid values must have dimension >= 1");
  require(values_.size() == (n_ + 1) * dim_, "grid value array has the wrong length");
}

GridFunction GridFunction::sample(double t_start, double t_end, std::size_t n_intervals,
                                  const std::function<double(double)>& f) {
  GridFunction g(t_start, t_end, n_intervals, 1);
  for (std::size_t i = 0; i <= n_intervals; ++i) g(i) = f(g.time(i));
  return g;
}

GridFunction GridFunction::component(std::size_t k) const {
  require(k < dim_, "component index out of range");
  GridFunction g(t_start_, t_end_, n_, 1);
  for (std::size_t i = 0; i <= n_; ++i) g(i) = (*this)(i, k);
  return g;
}

GridFunction GridFunction::reversed() const {
  GridFunction g(t_start_, t_end_, n_, dim_);
  for (std::size_t i = 0; i <= n_; ++i)
    for (std::size_t k = 0; k < dim_; ++k) g(i, k) = (*this)(n_ - i, k);
  return g;
}

bool GridFunction::same_grid(const GridFunction& other, double rel_tol) const {
  const double scale = std::max({std::abs(t_start_), std::abs(t_end_), 1.0});
  return n_ == other.n_ && std::abs(t_start_ - other.t_start_) <= rel_tol * scale &&
         std::abs(t_end_ - other.t_end_) <= rel_tol * scale;
}

bool GridFunction::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::pair<std::size_t, std::size_t> GridFunction::window_nodes(const std::optional<Window>& window) const {
  if (!window) return {0, n_};
  const double h = step();
  const double slack = 1e-9 * h;
  require(window->t > window->s, "empty window");
  require(window->s >= t_start_ - slack && window->t <= t_end_ + slack, "window must lie inside the grid");
  const auto first = static_cast<std::size_t>(std::ceil((window->s - t_start_ - slack) / h));
  const auto last = static_cast<std::size_t>(std::floor((window->t - t_start_ + slack) / h));
  require(first <= last && last <= n_, "window contains no grid node");
  return {first, std::min(last, n_)};
}

double distance(std::span<const double> a, std::span<const double> b) noexcept {
  if (a.size() == 1) return std::abs(a[0] - b[0]);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

double euclidean_norm(std::span<const double> a) noexcept {
  if (a.size() == 1) return std::abs(a[0]);
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

}  // namespace fsde
