#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace reprel {

// Seeded generator with hand-rolled draw functions. mt19937_64 output is
// specified by the standard, and std::uniform_int_distribution is not, so
// deriving draws here keeps results bit-identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform on [0, n) by rejection sampling (unbiased).
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<int>(x % bound);
  }

  // Uniform on [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  template <class T>
  const T& choice(const std::vector<T>& items) {
    if (items.empty()) throw std::invalid_argument("choice: empty vector");
    return items[static_cast<std::size_t>(uniform_int(static_cast<int>(items.size())))];
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace reprel
