#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace fsde {

/// Closed time window [s, t] used to restrict norms to a sub-interval.
struct Window {
  double s;
  double t;
};

/// A (possibly vector-valued) path sampled on the uniform grid
/// t_i = t_start + i * (t_end - t_start) / n_intervals, i = 0..n_intervals.
/// Values are stored node-major: value(i, k) is component k at node i.
class GridFunction {
 public:
  GridFunction(double t_start, double t_end, std::size_t n_intervals, std::size_t dim = 1);
  GridFunction(double t_start, double t_end, std::size_t n_intervals, std::size_t dim,
               std::vector<double> values);

  /// Samples a scalar function at the grid nodes.
  static GridFunction sample(double t_start, double t_end, std::size_t n_intervals,
                             const std::function<double(double)>& f);

  double t_start() const noexcept { return t_start_; }
  double t_end() const noexcept { return t_end_; }
  std::size_t n_intervals() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_ + 1; }
  std::size_t dim() const noexcept { return dim_; }
  double step() const noexcept { return (t_end_ - t_start_) / static_cast<double>(n_); }
  double time(std::size_t i) const noexcept {
    return t_start_ + (t_end_ - t_start_) * static_cast<double>(i) / static_cast<double>(n_);
  }

  double& operator()(std::size_t i, std::size_t k = 0) { return values_[i * dim_ + k]; }
  double operator()(std::size_t i, std::size_t k = 0) const { return values_[i * dim_ + k]; }

  std::span<double> node(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  std::span<const double> node(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Single component as a scalar grid function.
  GridFunction component(std::size_t k) const;

  /// Same grid, values reversed in time (node i <-> node n - i).
  GridFunction reversed() const;

  bool same_grid(const GridFunction& other, double rel_tol = 1e-12) const;
  bool all_finite() const noexcept;

  /// Indices [first, last] of the nodes lying inside the window.
  std::pair<std::size_t, std::size_t> window_nodes(const std::optional<Window>& window) const;

 private:
  double t_start_;
  double t_end_;
  std::size_t n_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// Grid function with at most one node where the operator is undefined
/// (for example the origin of a left-sided fractional derivative of a
/// function that does not vanish there). The flagged node holds 0.
struct FlaggedGridFunction {
  GridFunction values;
  std::optional<std::size_t> undefined_node;
};

/// Euclidean norm of a node difference.
double distance(std::span<const double> a, std::span<const double> b) noexcept;
double euclidean_norm(std::span<const double> a) noexcept;

}  // namespace fsde
