#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "srf/bits.hpp"

namespace srf {

// Binary arithmetic coder after Witten, Neal and Cleary: 32-bit low/high
// registers, underflow handled with pending opposite bits, 2-bit flush.
// Totals must stay below 2^16.
class ArithmeticEncoder {
 public:
  void encode(std::uint32_t cum_low, std::uint32_t cum_high, std::uint32_t total);
  Bitstream finish();

 private:
  void emit(bool bit);

  std::uint64_t low_ = 0;
  std::uint64_t high_ = 0xFFFFFFFFu;
  std::uint64_t pending_ = 0;
  Bitstream out_;
};

class ArithmeticDecoder {
 public:
  explicit ArithmeticDecoder(const Bitstream& bits);

  // Cumulative frequency the next symbol's interval must contain.
  std::uint32_t target(std::uint32_t total) const;
  void consume(std::uint32_t cum_low, std::uint32_t cum_high, std::uint32_t total);

  // Bits read past the end of the stream (reads there yield zeros).
  std::size_t overrun() const { return in_.overrun(); }

 private:
  BitReader in_;
  std::uint64_t low_ = 0;
  std::uint64_t high_ = 0xFFFFFFFFu;
  std::uint64_t value_ = 0;
};

inline constexpr unsigned kFrequencyGridBits = 14;

// Coding frequencies for counts sharing one left-hand side: counts scaled to
// a 2^14 grid (rounded), each at least 1. Integer-only, so bit-exact.
std::vector<std::uint32_t> coding_frequencies(std::span<const std::uint64_t> counts, std::uint64_t total);

}  // namespace srf
