#include "cubelab/torus.hpp"

#include <stdexcept>

namespace cubelab::torus {

std::int64_t binomial(std::int64_t n, int j) {
  if (j < 0) return 0;
  // C(n, j) = prod_{i<j} (n - i) / (i + 1); each partial product is an integer.
  __int128 r = 1;
  for (int i = 0; i < j; ++i) {
    r = r * (n - i) / (i + 1);
    const __int128 bound = static_cast<__int128>(1) << 62;
    if (r > bound || r < -bound) throw std::overflow_error("binomial coefficient overflows int64");
  }
  return static_cast<std::int64_t>(r);
}

}  // namespace cubelab::torus
