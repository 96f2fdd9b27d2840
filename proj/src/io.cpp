#include "fsde/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "fsde/error.hpp"

namespace fsde::io {
namespace {

constexpr char kMagic[8] = {'F', 'S', 'D', 'E', 'P', 'T', 'H', '1'};

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  require(static_cast<bool>(in), "path frame: truncated");
  return v;
}

}  // namespace

void write_path_csv(const GridFunction& f, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << 't';
  for (std::size_t k = 0; k < f.dim(); ++k) out << ",x_" << k + 1;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    out << f.time(i);
    for (std::size_t k = 0; k < f.dim(); ++k) out << ',' << f(i, k);
    out << '\n';
  }
}

GridFunction read_path_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  require(line.rfind("t,x_1", 0) == 0, "path CSV: bad header");
  const std::size_t dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  std::vector<double> times, values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(is, cell, ',')) {
      const double v = std::stod(cell);
      if (col == 0) times.push_back(v);
      else values.push_back(v);
      ++col;
    }
    require(col == dim + 1, "path CSV: ragged row");
  }
  require(times.size() >= 2, "path CSV: need at least two rows");
  return GridFunction(times.front(), times.back(), times.size() - 1, dim, std::move(values));
}

void write_path_frame(const PathFrame& frame, const std::filesystem::path& path) {
  require(!frame.paths.empty() && frame.paths.size() == frame.seeds.size(), "path frame: paths and seeds differ");
  const GridFunction& first = frame.paths.front();
  for (const auto& p : frame.paths) require(p.same_grid(first) && p.dim() == first.dim(), "path frame: mixed grids");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, first.n_intervals());
  put<std::uint64_t>(out, first.dim());
  put<std::uint64_t>(out, frame.paths.size());
  put<double>(out, first.t_start());
  put<double>(out, first.t_end());
  for (auto s : frame.seeds) put<std::uint64_t>(out, s);
  for (const auto& p : frame.paths)
    out.write(reinterpret_cast<const char*>(p.values().data()),
              static_cast<std::streamsize>(p.values().size() * sizeof(double)));
}

PathFrame read_path_frame(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  require(in && std::memcmp(magic, kMagic, sizeof magic) == 0, "path frame: bad magic");
  const auto n = get<std::uint64_t>(in);
  const auto dim = get<std::uint64_t>(in);
  const auto count = get<std::uint64_t>(in);
  const auto t0 = get<double>(in);
  const auto t1 = get<double>(in);
  require(n >= 1 && dim >= 1 && count >= 1 && n * dim * count < (std::uint64_t{1} << 34), "path frame: bad header");
  PathFrame frame;
  for (std::uint64_t c = 0; c < count; ++c) frame.seeds.push_back(get<std::uint64_t>(in));
  for (std::uint64_t c = 0; c < count; ++c) {
    std::vector<double> values((n + 1) * dim);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    require(static_cast<bool>(in), "path frame: truncated");
    frame.paths.emplace_back(t0, t1, n, dim, std::move(values));
  }
  return frame;
}

}  // namespace fsde::io
