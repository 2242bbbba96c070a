#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace xpl {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator. A key is derived from a seed and any number of
/// stream ids; element i of the stream is a pure function of (key, i), so
/// draws can be made in any order or in parallel and stay bit-identical.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  /// Child generator keyed by (this key, id).
  constexpr CounterRng derive(std::uint64_t id) const noexcept {
    CounterRng child(0);
    child.key_ = mix64(key_ ^ mix64(id + 0x632be59bd9b4e019ULL));
    return child;
  }
  constexpr CounterRng derive(std::initializer_list<std::uint64_t> ids) const noexcept {
    CounterRng r = *this;
    for (auto id : ids) r = r.derive(id);
    return r;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }
  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t counter) const noexcept;
  /// Standard normal via Box-Muller on counters (2i, 2i+1).
  double normal(std::uint64_t counter) const noexcept;

 private:
  std::uint64_t key_;
};

/// Sequential view over a CounterRng for code that consumes draws in order.
class RngStream {
 public:
  explicit RngStream(CounterRng rng) noexcept : rng_(rng) {}
  explicit RngStream(std::uint64_t seed) noexcept : rng_(seed) {}

  std::uint64_t next_bits() noexcept { return rng_.bits(counter_++); }
  double uniform() noexcept { return rng_.uniform(counter_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept { return rng_.normal(counter_++); }
  /// Uniform integer in [0, n). Requires n > 0.
  std::size_t index(std::size_t n) noexcept;

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace xpl
