#include "runtime.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <thread>

extern "C" void openblas_set_num_threads(int);

namespace cgmkit {

int thread_count() {
  static const int n = [] {
    if (const char* env = std::getenv("CGMKIT_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return std::min(v, 64);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
  }();
  return n;
}

void configure_blas_threads() {
  static std::once_flag flag;
  std::call_once(flag, [] { openblas_set_num_threads(thread_count()); });
}

}  // namespace cgmkit
