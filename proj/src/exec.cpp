#include "fsde/exec.hpp"

#include <exception>
#include <mutex>

#include <omp.h>

namespace fsde {

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body, Exec exec) {
  if (exec == Exec::serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const auto n = static_cast<long long>(count);
  std::exception_ptr first_error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 4)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

int max_threads() noexcept { return omp_get_max_threads(); }

void set_threads(int threads) noexcept {
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace fsde
