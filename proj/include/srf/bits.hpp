#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace srf {

// MSB-first bit sequence; bytes are zero-padded past bit_count.
class Bitstream {
 public:
  Bitstream() = default;
  Bitstream(std::vector<std::uint8_t> bytes, std::size_t bit_count);

  void push_back(bool bit);
  void append(std::uint64_t value, unsigned width);  // low `width` bits, MSB first
  bool operator[](std::size_t i) const { return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u; }

  std::size_t size() const { return bit_count_; }
  bool empty() const { return bit_count_ == 0; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  std::string to_string() const;  // "0101..."
  std::string to_hex() const;

  bool operator==(const Bitstream&) const = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bit_count_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const Bitstream& bits) : bits_(&bits) {}

  // Reads past the end return zero bits; overrun() counts them.
  bool read();
  std::uint64_t read(unsigned width);

  std::size_t position() const { return pos_; }
  std::size_t overrun() const { return pos_ > bits_->size() ? pos_ - bits_->size() : 0; }
  bool exhausted() const { return pos_ >= bits_->size(); }

 private:
  const Bitstream* bits_;
  std::size_t pos_ = 0;
};

}  // namespace srf
