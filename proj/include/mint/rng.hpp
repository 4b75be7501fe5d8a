#ifndef MINT_RNG_HPP
#define MINT_RNG_HPP

#include <cstdint>

namespace mint {

// splitmix64; bit-reproducible across platforms, unlike the
// distributions in <random>.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

  // uniform in [-1, 1)
  double uniform_sym() { return 2.0 * uniform01() - 1.0; }

  // uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

 private:
  std::uint64_t state_;
};

}  // namespace mint

#endif
