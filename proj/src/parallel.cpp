#include "complasso/parallel.hpp"

#include <cstdlib>
#include <string>

namespace complasso {

int default_thread_count() {
  if (const char* env = std::getenv("COMPLASSO_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace complasso
