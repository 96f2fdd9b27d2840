#include <doctest.h>

#include <cmath>
#include <set>

#include "fsde/ensemble.hpp"
#include "fsde/error.hpp"
#include "fsde/exec.hpp"
#include "fsde/grid.hpp"
#include "fsde/io.hpp"
#include "fsde/report.hpp"
#include "fsde/rng.hpp"
#include "oracles.hpp"

using namespace fsde;

TEST_CASE("grid spacing, windows and reversal") {
  const GridFunction f = GridFunction::sample(0.0, 2.0, 8, [](double t) { return t * t; });
  CHECK(f.size() == 9);
  CHECK(f.step() == doctest::Approx(0.25));
  CHECK(f.time(4) == doctest::Approx(1.0));
  const auto [a, b] = f.window_nodes(Window{0.5, 1.5});
  CHECK(a == 2);
  CHECK(b == 6);
  const GridFunction r = f.reversed();
  CHECK(r(0) == f(8));
  CHECK(r(8) == f(0));
  CHECK_THROWS(f.window_nodes(Window{1.0, 1.0}));
  CHECK_THROWS(GridFunction(1.0, 1.0, 4));
  CHECK_THROWS(GridFunction(0.0, 1.0, 0));
}

TEST_CASE("vector-valued grid functions store node-major values") {
  GridFunction f(0.0, 1.0, 2, 3);
  f(1, 2) = 5.0;
  CHECK(f.values()[1 * 3 + 2] == 5.0);
  CHECK(f.component(2)(1) == 5.0);
  CHECK(euclidean_norm(std::vector<double>{3.0, 4.0}) == doctest::Approx(5.0));
}

TEST_CASE("derived seeds are distinct and independent of request order") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 1000; ++r)
    for (std::uint64_t k = 0; k < 4; ++k) seen.insert(derive_seed(7, {r, k}));
  CHECK(seen.size() == 4000);
  const auto late = derive_seed(7, {999, 3});
  CHECK(late == derive_seed(7, {999, 3}));
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
  CHECK(derive_seed(7, {1}) != derive_seed(8, {1}));
}

TEST_CASE("streams are deterministic and produce standard normals") {
  Stream a(123), b(123);
  std::vector<double> x(20000);
  for (double& v : x) v = a.normal();
  for (double v : x) CHECK(v == b.normal());
  const auto m = oracle::mean_se(x);
  CHECK(oracle::within_se(m, 0.0, 4.0));
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
  CHECK(oracle::within_se(oracle::mean_se(sq), 1.0, 4.0));
  Stream u(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK((v >= 0.0 && v < 1.0));
  }
}

TEST_CASE("ensembles are bit-identical across execution modes and thread counts") {
  auto replica = [](std::size_t r, std::uint64_t s) {
    Stream st(s);
    double acc = 0.0;
    for (int i = 0; i < 100; ++i) acc += st.normal() * static_cast<double>(r + 1);
    return std::vector<double>{acc, static_cast<double>(s % 1000)};
  };
  const auto serial = run_ensemble(257, 99, replica, Exec::serial);
  const int saved = max_threads();
  set_threads(4);
  const auto par4 = run_ensemble(257, 99, replica, Exec::parallel);
  set_threads(1);
  const auto par1 = run_ensemble(257, 99, replica, Exec::parallel);
  set_threads(saved);
  for (std::size_t r = 0; r < serial.size(); ++r) {
    CHECK(serial[r].values == par4[r].values);
    CHECK(serial[r].values == par1[r].values);
  }
}

TEST_CASE("replica failures are recorded by index") {
  const auto res = run_ensemble(10, 1, [](std::size_t r, std::uint64_t) -> std::vector<double> {
    if (r == 3 || r == 7) throw NumericalError("boom", r);
    return {static_cast<double>(r)};
  });
  CHECK(failed_indices(res) == std::vector<std::size_t>{3, 7});
  CHECK(column(res, 0).size() == 8);
  CHECK(column(res, 0, 0, 5).size() == 4);
}

TEST_CASE("mean estimate and report round trip") {
  const std::vector<double> x{1.0, 2.0, 4.0, 7.0};
  const Estimate e = mean_estimate(x);
  const auto ref = oracle::mean_se(x);
  CHECK(e.value == doctest::Approx(ref.mean));
  CHECK(e.standard_error == doctest::Approx(ref.se));
  MonteCarloReport r;
  r.study = "demo";
  r.N = 4;
  r.seed = 12;
  r.config_hash = "abc";
  r.estimates["m"] = e;
  r.diagnostics["d"] = 0.5;
  r.failures = {2};
  r.wall_time = 3.0;
  const auto j = r.to_json();
  CHECK_FALSE(j.contains("wall_time"));
  const MonteCarloReport back = MonteCarloReport::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(j.at("failures").at("count") == 1);
}

TEST_CASE("FNV-1a reference vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("path CSV and binary frames round trip") {
  const auto dir = oracle::temp_dir("io");
  GridFunction f(0.0, 2.0, 5, 2);
  for (std::size_t i = 0; i <= 5; ++i) f(i, 0) = std::sin(0.3 * i), f(i, 1) = 1.0 / (1.0 + i);
  io::write_path_csv(f, dir / "p.csv");
  CHECK(oracle::read_file(dir / "p.csv").rfind("t,x_1,x_2\n", 0) == 0);
  const GridFunction g = io::read_path_csv(dir / "p.csv");
  CHECK(g.same_grid(f));
  for (std::size_t i = 0; i < f.values().size(); ++i) CHECK(g.values()[i] == f.values()[i]);

  io::PathFrame frame{{f, f.reversed()}, {11, 22}};
  io::write_path_frame(frame, dir / "p.bin");
  const io::PathFrame back = io::read_path_frame(dir / "p.bin");
  CHECK(back.seeds == frame.seeds);
  REQUIRE(back.paths.size() == 2);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < f.values().size(); ++i) CHECK(back.paths[k].values()[i] == frame.paths[k].values()[i]);
  std::filesystem::remove_all(dir);
}
