#include "fsde/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "fsde/error.hpp"
#include "fsde/rng.hpp"

namespace fsde::fbm {
namespace {

// The FFTW planner is not thread-safe; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

std::shared_ptr<void> make_plan(std::size_t size) {
  FftwBuffer in(size), out(size);
  std::lock_guard lock(planner_mutex());
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(size), in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
  if (plan == nullptr) throw NumericalError("FFTW plan creation failed");
  return {plan, [](void* p) {
            std::lock_guard inner(planner_mutex());
            fftw_destroy_plan(static_cast<fftw_plan>(p));
          }};
}

std::size_t next_power_of_two(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace

std::string to_string(FbmMethod method) {
  switch (method) {
    case FbmMethod::kernel: return "kernel";
    case FbmMethod::cholesky: return "cholesky";
    case FbmMethod::circulant: return "circulant";
  }
  return "unknown";
}

FbmMethod parse_method(const std::string& name) {
  if (name == "kernel") return FbmMethod::kernel;
  if (name == "cholesky") return FbmMethod::cholesky;
  if (name == "circulant") return FbmMethod::circulant;
  throw std::invalid_argument("unknown fBm method '" + name + "' (expected kernel, cholesky or circulant)");
}

BrownianPath sample_bm(std::size_t n, double T, std::size_t dim, std::uint64_t seed) {
  require(n >= 1 && dim >= 1, "sample_bm needs n >= 1 and dim >= 1");
  require(T > 0.0, "sample_bm needs T > 0");
  GridFunction W(0.0, T, n, dim);
  const double sd = std::sqrt(T / static_cast<double>(n));
  for (std::size_t k = 0; k < dim; ++k) {
    Stream stream(seed, {k, static_cast<std::uint64_t>(StreamTag::wiener)});
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      acc += sd * stream.normal();
      W(i, k) = acc;
    }
  }
  return {std::move(W), seed};
}

FbmPath fbm_from_kernel(const BrownianPath& W, Hurst H, const KernelGrid& kg) {
  require(kg.matches(W.path), "fbm_from_kernel: Wiener path and kernel grid differ");
  require(std::abs(kg.hurst() - static_cast<double>(H)) < 1e-15, "fbm_from_kernel: Hurst parameter mismatch");
  const std::size_t n = W.path.n_intervals();
  const std::size_t d = W.path.dim();
  GridFunction B(0.0, W.path.t_end(), n, d);
  std::vector<double> dW(n);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t j = 0; j < n; ++j) dW[j] = W.path(j + 1, k) - W.path(j, k);
    for (std::size_t i = 1; i <= n; ++i) {
      const double* row = kg.weight_row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < i; ++j) acc += row[j] * dW[j];
      B(i, k) = acc;
    }
  }
  return {std::move(B), static_cast<double>(H), FbmMethod::kernel, W.seed, W};
}

CholeskySampler::CholeskySampler(std::size_t n, double T, Hurst H) : n_(n), T_(T), H_(H) {
  require(n >= 1 && T > 0.0, "CholeskySampler needs n >= 1 and T > 0");
  Eigen::MatrixXd cov(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = T * static_cast<double>(i + 1) / static_cast<double>(n);
    for (std::size_t j = 0; j <= i; ++j) {
      const double tj = T * static_cast<double>(j + 1) / static_cast<double>(n);
      cov(i, j) = cov(j, i) = fbm_covariance(ti, tj, H);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("fBm covariance matrix is not numerically positive definite (n = " + std::to_string(n) +
                         ", H = " + std::to_string(static_cast<double>(H)) + ")");
  }
  lower_ = llt.matrixL();
}

FbmPath CholeskySampler::sample(std::size_t dim, std::uint64_t seed) const {
  require(dim >= 1, "dimension must be positive");
  GridFunction B(0.0, T_, n_, dim);
  Eigen::VectorXd z(n_);
  for (std::size_t k = 0; k < dim; ++k) {
    Stream stream(seed, {k, static_cast<std::uint64_t>(StreamTag::fbm_cholesky)});
    for (std::size_t i = 0; i < n_; ++i) z[i] = stream.normal();
    const Eigen::VectorXd x = lower_.triangularView<Eigen::Lower>() * z;
    for (std::size_t i = 0; i < n_; ++i) B(i + 1, k) = x[i];
  }
  return {std::move(B), H_, FbmMethod::cholesky, seed, std::nullopt};
}

double fgn_autocovariance(std::size_t k, double H) {
  const double e = 2.0 * H;
  const double kd = static_cast<double>(k);
  return 0.5 * (std::pow(kd + 1.0, e) + std::pow(std::abs(kd - 1.0), e) - 2.0 * std::pow(kd, e));
}

CirculantSampler::CirculantSampler(std::size_t n, double T, Hurst H)
    : n_(n), padded_(next_power_of_two(n)), T_(T), H_(H) {
  require(n >= 1 && T > 0.0, "CirculantSampler needs n >= 1 and T > 0");
  const std::size_t m = padded_;
  const std::size_t size = 2 * m;
  const double scale = std::pow(T / static_cast<double>(n), 2.0 * static_cast<double>(H));
  plan_ = make_plan(size);
  FftwBuffer in(size), out(size);
  for (std::size_t k = 0; k < size; ++k) {
    const std::size_t lag = k <= m ? k : size - k;
    in.data[k][0] = scale * fgn_autocovariance(lag, H);
    in.data[k][1] = 0.0;
  }
  fftw_execute_dft(static_cast<fftw_plan>(plan_.get()), in.data, out.data);
  double lmax = 0.0;
  for (std::size_t k = 0; k < size; ++k) lmax = std::max(lmax, out.data[k][0]);
  sqrt_eigen_.resize(size);
  for (std::size_t k = 0; k < size; ++k) {
    double lambda = out.data[k][0];
    if (lambda < 0.0) {
      if (lambda < -1e-10 * lmax)
        throw NumericalError("circulant embedding has a negative eigenvalue " + std::to_string(lambda), k);
      lambda = 0.0;
    }
    sqrt_eigen_[k] = std::sqrt(lambda / static_cast<double>(size));
  }
}

FbmPath CirculantSampler::sample(std::size_t dim, std::uint64_t seed) const {
  require(dim >= 1, "dimension must be positive");
  const std::size_t size = sqrt_eigen_.size();
  GridFunction B(0.0, T_, n_, dim);
  FftwBuffer in(size), out(size);
  for (std::size_t k = 0; k < dim; ++k) {
    Stream stream(seed, {k, static_cast<std::uint64_t>(StreamTag::fbm_circulant)});
    for (std::size_t j = 0; j < size; ++j) {
      in.data[j][0] = sqrt_eigen_[j] * stream.normal();
      in.data[j][1] = sqrt_eigen_[j] * stream.normal();
    }
    fftw_execute_dft(static_cast<fftw_plan>(plan_.get()), in.data, out.data);
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      acc += out.data[i][0];
      B(i + 1, k) = acc;
    }
  }
  return {std::move(B), H_, FbmMethod::circulant, seed, std::nullopt};
}

FbmPath fbm_cholesky(std::size_t n, double T, std::size_t dim, Hurst H, std::uint64_t seed) {
  return CholeskySampler(n, T, H).sample(dim, seed);
}

FbmPath fbm_circulant(std::size_t n, double T, std::size_t dim, Hurst H, std::uint64_t seed) {
  return CirculantSampler(n, T, H).sample(dim, seed);
}

FbmGenerator::FbmGenerator(FbmMethod method, std::size_t n, double T, std::size_t dim, Hurst H)
    : method_(method), n_(n), T_(T), dim_(dim), H_(H) {
  require(n >= 1 && dim >= 1 && T > 0.0, "FbmGenerator needs n >= 1, dim >= 1 and T > 0");
  switch (method) {
    case FbmMethod::kernel: kernel_ = std::make_shared<const KernelGrid>(KernelGrid::build(T, n, H)); break;
    case FbmMethod::cholesky: cholesky_ = std::make_shared<const CholeskySampler>(n, T, H); break;
    case FbmMethod::circulant: circulant_ = std::make_shared<const CirculantSampler>(n, T, H); break;
  }
}

FbmPath FbmGenerator::sample(std::uint64_t seed) const {
  switch (method_) {
    case FbmMethod::kernel: return fbm_from_kernel(sample_bm(n_, T_, dim_, seed), Hurst(H_), *kernel_);
    case FbmMethod::cholesky: return cholesky_->sample(dim_, seed);
    case FbmMethod::circulant: return circulant_->sample(dim_, seed);
  }
  throw std::logic_error("unreachable");
}

}  // namespace fsde::fbm
