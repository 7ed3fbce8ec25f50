#include "folhe/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>

namespace folhe {

int thread_count() {
  static const int cached = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("FOLHE_THREADS")) {
      try {
        int cap = std::stoi(env);
        if (cap >= 1 && cap < hw) return cap;
      } catch (...) {
      }
    }
    return hw;
  }();
  return cached;
}

}  // namespace folhe
