#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "epiplan/rng.hpp"

namespace epiplan {

/// Fixed-width bitset holding one truth value per fluent.
/// Two valuations compare lexicographically by (size, packed words);
/// equality means same width and identical assignment.
class Valuation {
public:
  Valuation() = default;

  explicit Valuation(std::uint32_t size)
      : m_size(size), m_words((size + 63) / 64, 0) {}

  std::uint32_t size() const { return m_size; }

  bool test(std::uint32_t index) const {
    check(index);
    return (m_words[index / 64] >> (index % 64)) & 1u;
  }

  void set(std::uint32_t index, bool value = true) {
    check(index);
    std::uint64_t mask = std::uint64_t{1} << (index % 64);
    if (value)
      m_words[index / 64] |= mask;
    else
      m_words[index / 64] &= ~mask;
  }

  std::uint32_t count() const {
    std::uint32_t total = 0;
    for (std::uint64_t word : m_words)
      total += static_cast<std::uint32_t>(__builtin_popcountll(word));
    return total;
  }

  std::vector<std::uint32_t> true_indices() const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < m_size; ++i)
      if (test(i))
        out.push_back(i);
    return out;
  }

  void hash_into(Digest &digest) const {
    digest.add_u32(m_size);
    for (std::uint64_t word : m_words)
      digest.add_u64(word);
  }

  auto operator<=>(const Valuation &) const = default;

private:
  void check(std::uint32_t index) const {
    if (index >= m_size)
      throw std::out_of_range("valuation index out of range");
  }

  std::uint32_t m_size = 0;
  std::vector<std::uint64_t> m_words;
};

} // namespace epiplan
