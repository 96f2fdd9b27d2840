// Serial reference paths against their OpenMP counterparts.
// Run with --benchmark_filter=... to select a kernel.

#include <benchmark/benchmark.h>

#include <cmath>

#include "fsde/ensemble.hpp"
#include "fsde/fbm.hpp"
#include "fsde/fraccalc.hpp"
#include "fsde/volterra.hpp"

using namespace fsde;

namespace {

Exec mode(const benchmark::State& st) { return st.range(1) ? Exec::parallel : Exec::serial; }

void BM_KernelGrid(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(volterra::KernelGrid::build(1.0, n, volterra::Hurst(0.75), mode(st)));
}

void BM_Ensemble(benchmark::State& st) {
  const auto N = static_cast<std::size_t>(st.range(0));
  const fbm::FbmGenerator gen(fbm::FbmMethod::circulant, 256, 1.0, 1, volterra::Hurst(0.7));
  for (auto _ : st) {
    auto res = run_ensemble(
        N, 11, [&](std::size_t, std::uint64_t s) { return std::vector<double>{gen.sample(s).path(256)}; }, mode(st));
    benchmark::DoNotOptimize(res);
  }
}

void BM_Holder(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto B = fbm::fbm_circulant(n, 1.0, 1, volterra::Hurst(0.75), 3);
  for (auto _ : st) benchmark::DoNotOptimize(fraccalc::holder_seminorm(B.path, 0.6, {}, {}, mode(st)));
}

void BM_RiemannLiouville(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto f = GridFunction::sample(0.0, 1.0, n, [](double x) { return std::sin(3 * x); });
  for (auto _ : st) benchmark::DoNotOptimize(fraccalc::riemann_liouville_integral(f, {0.4}, mode(st)));
}

void BM_Circulant(benchmark::State& st) {
  // one large path per iteration; FFTW plans are serial, so this is the single-path baseline
  const auto n = static_cast<std::size_t>(st.range(0));
  std::uint64_t seed = 0;
  for (auto _ : st) benchmark::DoNotOptimize(fbm::fbm_circulant(n, 1.0, 1, volterra::Hurst(0.75), ++seed));
}

}  // namespace

BENCHMARK(BM_KernelGrid)->ArgsProduct({{256, 1024}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ensemble)->ArgsProduct({{2000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Holder)->ArgsProduct({{4096}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RiemannLiouville)->ArgsProduct({{2048}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Circulant)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
