#include "xnlg/rng.hpp"

#include <cmath>
#include <numbers>

namespace xnlg {

double SplitMix64::normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  // Offset keeps the logarithm argument strictly positive.
  const double u1 = (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(angle);
  have_cached_ = true;
  return r * std::cos(angle);
}

std::complex<double> SplitMix64::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re, im};
}

std::uint64_t SplitMix64::stream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 g(seed);
  std::uint64_t out = g.next();
  for (std::uint64_t i = 0; i < index; ++i) out = g.next();
  return out;
}

}  // namespace xnlg
