#include "srf/arith.hpp"

#include "srf/error.hpp"

namespace srf {

namespace {

constexpr std::uint64_t kTop = 0xFFFFFFFFu;
constexpr std::uint64_t kHalf = 0x80000000u;
constexpr std::uint64_t kFirstQuarter = 0x40000000u;
constexpr std::uint64_t kThirdQuarter = 0xC0000000u;

}  // namespace

void ArithmeticEncoder::emit(bool bit) {
  out_.push_back(bit);
  for (; pending_ > 0; --pending_) out_.push_back(!bit);
}

void ArithmeticEncoder::encode(std::uint32_t cum_low, std::uint32_t cum_high, std::uint32_t total) {
  const std::uint64_t range = high_ - low_ + 1;
  high_ = low_ + range * cum_high / total - 1;
  low_ = low_ + range * cum_low / total;
  while (true) {
    if (high_ < kHalf) {
      emit(false);
    } else if (low_ >= kHalf) {
      emit(true);
      low_ -= kHalf;
      high_ -= kHalf;
    } else if (low_ >= kFirstQuarter && high_ < kThirdQuarter) {
      ++pending_;
      low_ -= kFirstQuarter;
      high_ -= kFirstQuarter;
    } else {
      break;
    }
    low_ = 2 * low_;
    high_ = 2 * high_ + 1;
  }
}

Bitstream ArithmeticEncoder::finish() {
  ++pending_;
  emit(low_ >= kFirstQuarter);
  Bitstream out = std::move(out_);
  out_ = Bitstream();
  low_ = 0;
  high_ = kTop;
  pending_ = 0;
  return out;
}

ArithmeticDecoder::ArithmeticDecoder(const Bitstream& bits) : in_(bits) { value_ = in_.read(32); }

std::uint32_t ArithmeticDecoder::target(std::uint32_t total) const {
  const std::uint64_t range = high_ - low_ + 1;
  return static_cast<std::uint32_t>(((value_ - low_ + 1) * total - 1) / range);
}

void ArithmeticDecoder::consume(std::uint32_t cum_low, std::uint32_t cum_high, std::uint32_t total) {
  const std::uint64_t range = high_ - low_ + 1;
  high_ = low_ + range * cum_high / total - 1;
  low_ = low_ + range * cum_low / total;
  while (true) {
    if (high_ < kHalf) {
      // nothing to subtract
    } else if (low_ >= kHalf) {
      low_ -= kHalf;
      high_ -= kHalf;
      value_ -= kHalf;
    } else if (low_ >= kFirstQuarter && high_ < kThirdQuarter) {
      low_ -= kFirstQuarter;
      high_ -= kFirstQuarter;
      value_ -= kFirstQuarter;
    } else {
      break;
    }
    low_ = 2 * low_;
    high_ = 2 * high_ + 1;
    value_ = 2 * value_ + static_cast<std::uint64_t>(in_.read());
  }
}

std::vector<std::uint32_t> coding_frequencies(std::span<const std::uint64_t> counts, std::uint64_t total) {
  if (total == 0) fail(Errc::kZeroProbabilityRule, "empty distribution");
  constexpr std::uint64_t kGrid = std::uint64_t{1} << kFrequencyGridBits;
  std::vector<std::uint32_t> freq;
  freq.reserve(counts.size());
  for (std::uint64_t c : counts) {
    if (c == 0) fail(Errc::kZeroProbabilityRule, "rule with count 0");
    const std::uint64_t f = (c * kGrid + total / 2) / total;
    freq.push_back(static_cast<std::uint32_t>(f == 0 ? 1 : f));
  }
  return freq;
}

}  // namespace srf
