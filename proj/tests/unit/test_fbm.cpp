#include <doctest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "fsde/ensemble.hpp"
#include "fsde/fbm.hpp"
#include "fsde/fraccalc.hpp"
#include "oracles.hpp"

using namespace fsde;
using namespace fsde::fbm;

namespace {

bool same_values(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) return false;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    if (a.values()[i] != b.values()[i]) return false;
  return true;
}

// Empirical covariance at nodes idx, checked entrywise against R_H within k SE.
int covariance_misses(const FbmGenerator& gen, const std::vector<std::size_t>& idx, std::size_t N,
                      std::uint64_t seed, double k = 3.0) {
  const auto res = run_ensemble(N, seed, [&](std::size_t, std::uint64_t s) {
    const FbmPath B = gen.sample(s);
    std::vector<double> v;
    for (std::size_t i : idx) v.push_back(B.path(i));
    return v;
  });
  int misses = 0;
  const double step = gen.horizon() / static_cast<double>(gen.n_intervals());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a; b < idx.size(); ++b) {
      const auto xa = column(res, a), xb = column(res, b);
      std::vector<double> prod(xa.size());
      for (std::size_t r = 0; r < xa.size(); ++r) prod[r] = xa[r] * xb[r];
      const double target =
          oracle::covariance(step * static_cast<double>(idx[a]), step * static_cast<double>(idx[b]), gen.hurst());
      if (!oracle::within_se(oracle::mean_se(prod), target, k)) ++misses;
    }
  return misses;
}

}  // namespace

TEST_CASE("Wiener paths are deterministic with the right variance") {
  const auto a = sample_bm(32, 2.0, 2, 11), b = sample_bm(32, 2.0, 2, 11), c = sample_bm(32, 2.0, 2, 12);
  CHECK(same_values(a.path, b.path));
  CHECK_FALSE(same_values(a.path, c.path));
  CHECK(a.path(0, 0) == 0.0);
  CHECK(a.path(0, 1) == 0.0);

  std::vector<double> wt, sq;
  for (std::uint64_t s = 0; s < 10000; ++s) wt.push_back(sample_bm(8, 2.0, 1, derive_seed(5, {s})).path(8));
  for (double v : wt) sq.push_back(v * v);
  CHECK(oracle::within_se(oracle::mean_se(sq), 2.0));

  const auto one = sample_bm(1, 3.0, 1, 4);
  CHECK(one.path.size() == 2);
  std::vector<double> sq1;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const double v = sample_bm(1, 3.0, 1, derive_seed(6, {s})).path(1);
    sq1.push_back(v * v);
  }
  CHECK(oracle::within_se(oracle::mean_se(sq1), 3.0));
}

TEST_CASE("kernel generator maps the zero Wiener path to zero and rejects a grid mismatch") {
  const auto kg = KernelGrid::build(1.0, 16, Hurst(0.7));
  BrownianPath W{GridFunction(0.0, 1.0, 16, 1), 0};
  const auto B = fbm_from_kernel(W, Hurst(0.7), kg);
  for (double v : B.path.values()) CHECK(v == 0.0);
  BrownianPath bad{GridFunction(0.0, 1.0, 8, 1), 0};
  CHECK_THROWS(fbm_from_kernel(bad, Hurst(0.7), kg));
}

TEST_CASE("all generators reproduce the fBm covariance on a 5x5 grid") {
  const std::vector<std::size_t> idx{16, 32, 48, 64, 80};
  for (double h : {0.6, 0.75}) {
    for (FbmMethod m : {FbmMethod::kernel, FbmMethod::cholesky, FbmMethod::circulant}) {
      CAPTURE(h);
      CAPTURE(to_string(m));
      const FbmGenerator gen(m, 80, 1.0, 1, Hurst(h));
      CHECK(covariance_misses(gen, idx, 20000, 17) == 0);
    }
  }
}

TEST_CASE("kernel generator increments have second moment |t-s|^{2H}") {
  const Hurst H(0.75);
  const FbmGenerator gen(FbmMethod::kernel, 64, 1.0, 1, H);
  const auto res = run_ensemble(20000, 3, [&](std::size_t, std::uint64_t s) {
    const auto B = gen.sample(s);
    return std::vector<double>{B.path(48) - B.path(16), B.path(64) - B.path(32)};
  });
  for (std::size_t k = 0; k < 2; ++k) {
    auto d = column(res, k);
    for (double& v : d) v *= v;
    CHECK(oracle::within_se(oracle::mean_se(d), std::pow(0.5, 1.5)));
  }
}

TEST_CASE("Cholesky marginal variance and KS agreement with the kernel generator") {
  for (double h : {0.55, 0.8}) {
    const CholeskySampler ch(16, 1.0, Hurst(h));
    std::vector<double> sq, a;
    for (std::uint64_t s = 0; s < 10000; ++s) {
      const double v = ch.sample(1, derive_seed(21, {s})).path(16);
      sq.push_back(v * v);
      a.push_back(v);
    }
    CHECK(oracle::within_se(oracle::mean_se(sq), 1.0));
    const FbmGenerator kern(FbmMethod::kernel, 16, 1.0, 1, Hurst(h));
    std::vector<double> b;
    for (std::uint64_t s = 0; s < 10000; ++s) b.push_back(kern.sample(derive_seed(22, {s})).path(16));
    CHECK(oracle::ks_statistic(a, b) < oracle::ks_critical_1pct(a.size(), b.size()));
  }
  CHECK_THROWS(CholeskySampler(16, 1.0, Hurst(0.5)));
}

TEST_CASE("circulant increments match the fGn autocovariance at lags 0..2") {
  const double H = 0.7, T = 2.0;
  const std::size_t n = 64;
  const double scale = std::pow(T / static_cast<double>(n), 2 * H);
  for (std::size_t k = 0; k <= 2; ++k) {
    const double closed = 0.5 *
                          (std::pow(k + 1.0, 2 * H) + std::pow(std::abs(static_cast<double>(k) - 1.0), 2 * H) -
                           2.0 * std::pow(static_cast<double>(k), 2 * H));
    CHECK(fgn_autocovariance(k, H) == doctest::Approx(closed).epsilon(1e-14));
  }
  const CirculantSampler cs(n, T, Hurst(H));
  const auto res = run_ensemble(10000, 8, [&](std::size_t, std::uint64_t s) {
    const auto B = cs.sample(1, s);
    const double d0 = B.path(21) - B.path(20), d1 = B.path(22) - B.path(21), d2 = B.path(23) - B.path(22);
    return std::vector<double>{d0 * d0, d0 * d1, d0 * d2};
  });
  for (std::size_t k = 0; k <= 2; ++k)
    CHECK(oracle::within_se(oracle::mean_se(column(res, k)), fgn_autocovariance(k, H) * scale));
}

TEST_CASE("circulant sampler pads non-powers of two and is deterministic") {
  const CirculantSampler cs(100, 1.0, Hurst(0.75));
  CHECK(cs.embedding_size() == 256);
  const auto a = cs.sample(2, 5), b = cs.sample(2, 5);
  CHECK(a.path.n_intervals() == 100);
  CHECK(same_values(a.path, b.path));
  for (FbmMethod m : {FbmMethod::kernel, FbmMethod::cholesky, FbmMethod::circulant}) {
    const FbmGenerator gen(m, 32, 1.0, 2, Hurst(0.65));
    CHECK(same_values(gen.sample(9).path, gen.sample(9).path));
    CHECK_FALSE(same_values(gen.sample(9).path, gen.sample(10).path));
    CHECK((gen.sample(9).wiener.has_value() == (m == FbmMethod::kernel)));
  }
  CHECK(parse_method(to_string(FbmMethod::cholesky)) == FbmMethod::cholesky);
  CHECK_THROWS(parse_method("hosking"));
}

TEST_CASE("circulant throughput smoke test") {
  const auto start = std::chrono::steady_clock::now();
  const auto B = fbm_circulant(std::size_t{1} << 20, 1.0, 1, Hurst(0.75), 1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(B.path.all_finite());
  MESSAGE("n = 2^20 circulant path in " << secs << " s");
  CHECK(secs < 5.0);
}

TEST_CASE("grid Holder seminorm is stable below H and grows above H") {
  const Hurst H(0.75);
  auto median_holder = [&](std::size_t n, double beta) {
    const CirculantSampler cs(n, 1.0, H);
    std::vector<double> v;
    for (std::uint64_t s = 0; s < 200; ++s) v.push_back(fraccalc::holder_seminorm(cs.sample(1, s).path, beta));
    return oracle::median(v);
  };
  const double lo512 = median_holder(512, 0.5), lo1024 = median_holder(1024, 0.5);
  CHECK(std::abs(lo1024 - lo512) <= 0.1 * lo512);
  std::vector<double> hi;
  for (std::size_t n : {128u, 512u, 2048u}) hi.push_back(median_holder(n, 0.9));
  CHECK(hi[1] > 1.2 * hi[0]);
  CHECK(hi[2] > 1.2 * hi[1]);
}

TEST_CASE("exponential moment of the squared Holder seminorm is finite and stable") {
  const Hurst H(0.75);
  const FbmGenerator gen(FbmMethod::circulant, 256, 1.0, 1, H);
  const auto res = run_ensemble(4000, 4, [&](std::size_t, std::uint64_t s) {
    return std::vector<double>{fraccalc::holder_seminorm(gen.sample(s).path, 0.5)};
  });
  const auto hv = column(res, 0);
  const double eta = 0.1 / std::pow(oracle::median(hv), 2);
  std::vector<double> e;
  for (double v : hv) e.push_back(std::exp(eta * v * v));
  const std::vector<double> first(e.begin(), e.begin() + 2000);
  const double full = oracle::mean_se(e).mean, half = oracle::mean_se(first).mean;
  CHECK(std::isfinite(full));
  CHECK(std::abs(full - half) <= 0.05 * full);
}

TEST_CASE("serial and parallel ensembles give identical fBm samples") {
  const FbmGenerator gen(FbmMethod::kernel, 64, 1.0, 1, Hurst(0.7));
  auto f = [&](std::size_t, std::uint64_t s) {
    const auto B = gen.sample(s);
    return std::vector<double>(B.path.values().begin(), B.path.values().end());
  };
  const auto a = run_ensemble(64, 2, f, Exec::serial), b = run_ensemble(64, 2, f, Exec::parallel);
  for (std::size_t r = 0; r < a.size(); ++r) CHECK(a[r].values == b[r].values);
  const auto k1 = KernelGrid::build(1.0, 64, Hurst(0.7), Exec::serial);
  const auto k2 = KernelGrid::build(1.0, 64, Hurst(0.7), Exec::parallel);
  CHECK(k1 == k2);
}
