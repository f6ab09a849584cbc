#ifndef XNLG_RNG_HPP
#define XNLG_RNG_HPP

#include <complex>
#include <cstdint>

namespace xnlg {

// SplitMix64 generator (constants from the public-domain reference
// implementation). Deterministic across platforms for a given seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double normal();

  // Complex number with independent standard normal real and imaginary parts.
  std::complex<double> complex_normal();

  // Seed for the `index`-th derived stream: the (index+1)-th output of a
  // SplitMix64 generator seeded with `seed`.
  static std::uint64_t stream(std::uint64_t seed, std::uint64_t index);

 private:
  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace xnlg

#endif
