#pragma once

#include <cstdint>
#include <random>

namespace invsrc {

// splitmix64 step; used to derive independent substream seeds from a master
// seed plus stream labels, so runs are reproducible across platforms.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = seed;
  splitmix64(s);
  s ^= a;
  splitmix64(s);
  s ^= b;
  return splitmix64(s);
}

// mt19937_64 stream mapped to uniform(-1,1) by 53-bit mantissa scaling; the
// standard pins the raw sequence, and the scaling avoids the implementation-
// defined std::uniform_real_distribution.
class UniformPm1 {
 public:
  explicit UniformPm1(std::uint64_t seed) : gen_(seed) {}

  double next() {
    const double u01 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;  // [0,1)
    return 2.0 * u01 - 1.0;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace invsrc
