#include "gaussnm/parallel.hpp"

#include <cstdlib>

namespace gaussnm {

std::size_t worker_count() {
  if (const char* env = std::getenv("GAUSSNM_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace gaussnm
