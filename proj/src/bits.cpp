#include "srf/bits.hpp"

#include "srf/error.hpp"

namespace srf {

Bitstream::Bitstream(std::vector<std::uint8_t> bytes, std::size_t bit_count)
    : bytes_(std::move(bytes)), bit_count_(bit_count) {
  if ((bit_count_ + 7) / 8 > bytes_.size()) fail(Errc::kMalformedCode, "bit count exceeds byte buffer");
  bytes_.resize((bit_count_ + 7) / 8);
  if (bit_count_ % 8 != 0) bytes_.back() &= static_cast<std::uint8_t>(0xFFu << (8 - bit_count_ % 8));
}

void Bitstream::push_back(bool bit) {
  if (bit_count_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bit_count_ % 8));
  ++bit_count_;
}

void Bitstream::append(std::uint64_t value, unsigned width) {
  for (unsigned b = width; b-- > 0;) push_back((value >> b) & 1u);
}

std::string Bitstream::to_string() const {
  std::string s;
  s.reserve(bit_count_);
  for (std::size_t i = 0; i < bit_count_; ++i) s.push_back((*this)[i] ? '1' : '0');
  return s;
}

std::string Bitstream::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes_.size() * 2);
  for (std::uint8_t b : bytes_) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 15]);
  }
  return s;
}

bool BitReader::read() {
  const std::size_t i = pos_++;
  return i < bits_->size() && (*bits_)[i];
}

std::uint64_t BitReader::read(unsigned width) {
  std::uint64_t v = 0;
  for (unsigned b = 0; b < width; ++b) v = (v << 1) | static_cast<std::uint64_t>(read());
  return v;
}

}  // namespace srf
