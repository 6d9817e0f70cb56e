#pragma once

#include <cstdint>

namespace rdh {

// Counter-based randomness: every draw is a pure function of (seed, counters),
// so results never depend on the order pixels are visited in.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                     std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b * 0xd1b54a32d192ed03ULL));
  return splitmix64(h ^ (c * 0x8cb92ba72f3d8dd7ULL));
}

/// Uniform in (0, 1] from the top 53 bits.
constexpr double unit_open_closed(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Uniform in [0, 1) from the top 53 bits.
constexpr double unit_closed_open(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential stream over a fixed key; `next()` advances an internal counter.
class CounterStream {
 public:
  constexpr CounterStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
      : key_(counter_hash(seed, a, b)) {}
  constexpr std::uint64_t next() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++count_); }

 private:
  std::uint64_t key_;
  std::uint64_t count_ = 0;
};

}  // namespace rdh
