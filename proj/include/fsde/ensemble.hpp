#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <vector>

#include "fsde/exec.hpp"
#include "fsde/rng.hpp"

namespace fsde {

/// Outcome of one replica of an ensemble study: a fixed-length record of
/// observables, or a failure.
struct ReplicaResult {
  std::vector<double> values;
  bool failed = false;
};

/// Runs `replica(r, seed_r)` for r in [0, N) with seed_r = derive_seed(master, {r}).
/// A replica that throws NumericalError is recorded as failed. Results are
/// stored by replica index, so aggregation downstream is independent of the
/// number of threads and of scheduling.
std::vector<ReplicaResult> run_ensemble(std::size_t N, std::uint64_t master_seed,
                                        const std::function<std::vector<double>(std::size_t, std::uint64_t)>& replica,
                                        Exec exec = Exec::parallel);

/// Column `k` of the successful replicas, in replica order.
std::vector<double> column(const std::vector<ReplicaResult>& results, std::size_t k,
                           std::size_t first = 0, std::size_t last = static_cast<std::size_t>(-1));

std::vector<std::size_t> failed_indices(const std::vector<ReplicaResult>& results);

}  // namespace fsde
