#include "fsde/ensemble.hpp"

#include <algorithm>

#include "fsde/error.hpp"

namespace fsde {

std::vector<ReplicaResult> run_ensemble(std::size_t N, std::uint64_t master_seed,
                                        const std::function<std::vector<double>(std::size_t, std::uint64_t)>& replica,
                                        Exec exec) {
  std::vector<ReplicaResult> results(N);
  for_each_index(
      N,
      [&](std::size_t r) {
        try {
          results[r].values = replica(r, derive_seed(master_seed, {r}));
        } catch (const NumericalError&) {
          results[r].failed = true;
        }
      },
      exec);
  return results;
}

std::vector<double> column(const std::vector<ReplicaResult>& results, std::size_t k, std::size_t first,
                           std::size_t last) {
  last = std::min(last, results.size());
  std::vector<double> out;
  out.reserve(last > first ? last - first : 0);
  for (std::size_t r = first; r < last; ++r)
    if (!results[r].failed) out.push_back(results[r].values.at(k));
  return out;
}

std::vector<std::size_t> failed_indices(const std::vector<ReplicaResult>& results) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < results.size(); ++r)
    if (results[r].failed) out.push_back(r);
  return out;
}

}  // namespace fsde
