#include "xpl/rng.hpp"

#include <cmath>
#include <numbers>

namespace xpl {

double CounterRng::uniform(std::uint64_t counter) const noexcept {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const noexcept {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t RngStream::index(std::size_t n) noexcept {
  // Lemire's multiply-shift; bias is below 2^-64 * n and irrelevant here.
  const auto x = static_cast<unsigned __int128>(next_bits()) * n;
  return static_cast<std::size_t>(x >> 64);
}

}  // namespace xpl
