#include "censlasso/parallel.hpp"

namespace censlasso {

int default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace censlasso
