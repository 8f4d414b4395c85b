#pragma once

#include <cstdint>

// Deterministic counter-style random streams. Every consumer derives its own
// stream from (seed, stream index), so parallel and serial execution draw
// bit-identical values regardless of scheduling.

namespace mtebounds {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Mixes two identifiers into a derived seed (for nested stream hierarchies).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed ^ (0x9e3779b97f4a7c15ull * (index + 1));
  detail::splitmix64(state);
  return detail::splitmix64(state);
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : state_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Uniform index in [0, n). Widening-multiply map; the residual bias is
  // below 2^-64 * n, irrelevant at our sizes and fully deterministic.
  std::uint64_t uniform_index(std::uint64_t n) {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace mtebounds
