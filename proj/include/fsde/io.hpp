#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fsde/grid.hpp"

namespace fsde::io {

/// CSV with header "t,x_1,...,x_d" and one row per grid node.
void write_path_csv(const GridFunction& f, const std::filesystem::path& path);
GridFunction read_path_csv(const std::filesystem::path& path);

/// Several paths on one grid with their seeds.
struct PathFrame {
  std::vector<GridFunction> paths;
  std::vector<std::uint64_t> seeds;
};

/// Binary frame: magic "FSDEPTH1", u64 n_intervals, u64 dim, u64 count,
/// f64 t_start, f64 t_end, count x u64 seed, then count x (n+1) x dim f64
/// values, native byte order.
void write_path_frame(const PathFrame& frame, const std::filesystem::path& path);
PathFrame read_path_frame(const std::filesystem::path& path);

}  // namespace fsde::io
