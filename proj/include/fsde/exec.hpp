#pragma once

#include <cstddef>
#include <functional>

namespace fsde {

/// Selects between the OpenMP kernels and the serial reference loops. Both
/// produce bit-identical results: parallel loops write disjoint outputs and
/// every reduction is performed serially in index order afterwards.
enum class Exec { serial, parallel };

/// Runs body(i) for i in [0, count). Iterations must write disjoint memory.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body,
                    Exec exec = Exec::parallel);

/// Number of OpenMP threads available to parallel kernels.
int max_threads() noexcept;
void set_threads(int threads) noexcept;

}  // namespace fsde
