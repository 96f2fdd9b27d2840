#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "fsde/exec.hpp"
#include "fsde/fbm.hpp"
#include "fsde/grid.hpp"
#include "fsde/report.hpp"

namespace fsde::sde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using DriftFn = std::function<Vector(const Vector&)>;
using DiffusionFn = std::function<Matrix(const Vector&)>;

/// Declared regularity data of a coefficient pair (b, sigma). The fields
/// mirror the standing hypothesis: b measurable with |b(x)| <= K_b (1 + |x|),
/// sigma Holder of order gamma in (1/H - 1, 1].
struct CoefficientMetadata {
  std::string name;
  std::string description;
  std::size_t dim = 1;
  double growth_const = 0.0;
  double holder_order = 1.0;
  double holder_const = 0.0;
  std::optional<double> sigma_sup_bound;
  std::optional<double> nondegeneracy;
  bool smooth_sigma = false;
  double default_H = 0.75;

  /// gamma > 1/H - 1.
  bool admissible_for(double H) const { return holder_order > 1.0 / H - 1.0; }
};

void to_json(nlohmann::json& j, const CoefficientMetadata& m);
void from_json(const nlohmann::json& j, CoefficientMetadata& m);

struct CoefficientSpec {
  CoefficientMetadata meta;
  DriftFn drift;
  DiffusionFn diffusion;
};

/// Result of an empirical check of the declared metadata on random points.
struct Certification {
  std::size_t checked_pairs = 0;
  std::size_t growth_violations = 0;
  std::size_t holder_violations = 0;
  std::size_t sup_violations = 0;
  std::size_t nondegeneracy_violations = 0;
  bool ok() const {
    return growth_violations + holder_violations + sup_violations + nondegeneracy_violations == 0;
  }
};

Certification certify(const CoefficientSpec& c, std::size_t pairs, std::uint64_t seed, double radius = 5.0);

/// Operator norm sup_{|x|<=1} |A x| (largest singular value).
double operator_norm(const Matrix& A);

/// Built-in coefficient examples.
std::vector<std::string> library_keys();
CoefficientSpec library(const std::string& key);
nlohmann::json library_catalog();

enum class Scheme { euler, young_picard };

struct SolutionPath {
  GridFunction X;
  Scheme scheme;
  Vector x0;
};

/// X_{i+1} = X_i + b(X_i) dt + sigma(X_i) dB_i. Throws NumericalError with the
/// offending node index when the state becomes non-finite.
SolutionPath euler_solve(const CoefficientSpec& c, const Vector& x0, const fbm::FbmPath& B);

struct PicardOptions {
  std::size_t iterations = 8;
  /// Picard iteration runs window by window; each window is short enough
  /// for the Young integral map to contract.
  std::size_t window_steps = 8;
  double tolerance = 1e-14;
};

/// Reference solver: fixed-point iteration
///   X <- x0 + int b(X) dt + int sigma(X) dB
/// with both integrals evaluated by the trapezoidal Riemann-Stieltjes rule,
/// iterated `iterations` times on each window. With zero iterations the
/// initial guess (the constant path x0) is returned. Throws NumericalError
/// when the sweep distance grows twice in a row.
SolutionPath young_picard_solve(const CoefficientSpec& c, const Vector& x0, const fbm::FbmPath& B,
                                PicardOptions options = {});

struct PathStatistics {
  double sup_norm;
  double holder_seminorm;
};

PathStatistics path_statistics(const SolutionPath& X, double beta, double H);

/// ||X||_beta / (1 + |x0| + ||B||_beta^{1/beta}).
double pathwise_bound_check(const SolutionPath& X, const fbm::FbmPath& B, double beta);

struct MomentStudyConfig {
  double H = 0.75;
  double T = 1.0;
  std::size_t n = 128;
  std::size_t N = 1000;
  std::uint64_t seed = 1;
  double beta = 0.5;
  std::vector<double> p_list{2.0, 4.0};
  /// Exponential moment E exp(c_exp ||X||_beta^delta), only for bounded sigma.
  double c_exp = 0.1;
  double delta = 1.0;
  fbm::FbmMethod method = fbm::FbmMethod::circulant;
};

/// Monte Carlo estimates of E||X||_beta^p, E|X(T)|^p, E||X||_inf^p and (for
/// bounded sigma) E exp(c_exp ||X||_beta^delta), with half-sample stability
/// diagnostics ("stability.<key>" = relative change between the first half
/// and the full ensemble) and the maximum of the pathwise bound ratio.
MonteCarloReport moment_study(const CoefficientSpec& c, const Vector& x0, const MomentStudyConfig& cfg,
                              Exec exec = Exec::parallel);

}  // namespace fsde::sde
