#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace epiplan {

/// Deterministic random source. Wraps std::mt19937_64 but draws bounded
/// integers and unit doubles itself, so streams are identical across
/// standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : m_engine(seed) {}

  std::uint64_t next_u64() { return m_engine(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T> &values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// Random permutation of 0..n-1.
  std::vector<std::uint32_t> permutation(std::uint32_t n) {
    std::vector<std::uint32_t> out(n);
    for (std::uint32_t i = 0; i < n; ++i)
      out[i] = i;
    shuffle(out);
    return out;
  }

private:
  std::mt19937_64 m_engine;
};

/// 64-bit byte-stream digest: FNV-1a accumulation with a splitmix64
/// finalizer for avalanche. Not cryptographic.
class Digest {
public:
  void add_bytes(const void *data, std::size_t size) {
    const auto *bytes = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < size; ++i) {
      m_state ^= bytes[i];
      m_state *= 0x100000001b3ull;
    }
  }

  void add_u64(std::uint64_t value) { add_bytes(&value, sizeof(value)); }
  void add_u32(std::uint32_t value) { add_bytes(&value, sizeof(value)); }

  std::uint64_t value() const {
    std::uint64_t z = m_state + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t m_state = 0xcbf29ce484222325ull;
};

} // namespace epiplan
