#pragma once

// Little-endian byte streams, LEB128 varints and LSB-first bit packing.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "annzip/errors.hpp"

namespace annzip {

/// Number of bits needed to write values in [0, n); 0 for n <= 1.
inline int ceil_log2(std::uint64_t n) {
  return n <= 1 ? 0 : std::bit_width(n - 1);
}

class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { buf_.push_back(v); }
  void put_u32(std::uint32_t v) { put_le(v, 4); }
  void put_u64(std::uint64_t v) { put_le(v, 8); }
  void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }
  void put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }
  void put_le(std::uint64_t v, int nbytes) {
    for (int i = 0; i < nbytes; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_varint(std::uint64_t v) {
    while (v >= 0x80) {
      buf_.push_back(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    buf_.push_back(static_cast<std::uint8_t>(v));
  }
  void put_bytes(std::span<const std::uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  }
  void put_tag(const char (&tag)[5]) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(tag[i]));
  }
  /// Length-prefixed (varint) byte blob.
  void put_blob(std::span<const std::uint8_t> bytes) {
    put_varint(bytes.size());
    put_bytes(bytes);
  }
  template <class T>
  void put_pod_array(std::span<const T> values) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    buf_.insert(buf_.end(), p, p + values.size_bytes());
  }

  std::size_t size() const { return buf_.size(); }
  std::vector<std::uint8_t>& buffer() { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t get_u8() { return static_cast<std::uint8_t>(get_le(1)); }
  std::uint32_t get_u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t get_u64() { return get_le(8); }
  float get_f32() { return std::bit_cast<float>(get_u32()); }
  double get_f64() { return std::bit_cast<double>(get_u64()); }
  std::uint64_t get_le(int nbytes) {
    need(nbytes);
    std::uint64_t v = 0;
    for (int i = 0; i < nbytes; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
    pos_ += nbytes;
    return v;
  }
  std::uint64_t get_varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos_ >= data_.size()) throw FormatError("truncated varint");
      std::uint8_t b = data_[pos_++];
      v |= std::uint64_t{b & 0x7fu} << shift;
      if ((b & 0x80) == 0) return v;
    }
    throw FormatError("varint longer than 64 bits");
  }
  std::span<const std::uint8_t> get_bytes(std::size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::span<const std::uint8_t> get_blob() { return get_bytes(get_varint()); }
  bool get_tag(const char (&tag)[5]) {
    auto b = get_bytes(4);
    return std::memcmp(b.data(), tag, 4) == 0;
  }
  template <class T>
  std::vector<T> get_pod_array(std::size_t count) {
    static_assert(std::is_trivially_copyable_v<T>);
    if (count > remaining() / sizeof(T)) throw FormatError("array extends past end of input");
    std::vector<T> out(count);
    auto b = get_bytes(count * sizeof(T));
    std::memcpy(out.data(), b.data(), b.size());
    return out;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) throw FormatError("unexpected end of input");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

/// Append-only bit string, LSB-first within 64-bit words.
class BitWriter {
 public:
  void put(std::uint64_t value, int width) {
    if (width == 0) return;
    if (width < 64) value &= (std::uint64_t{1} << width) - 1;
    const int off = static_cast<int>(nbits_ & 63);
    if (off == 0) words_.push_back(0);
    words_.back() |= value << off;
    if (off + width > 64) words_.push_back(value >> (64 - off));
    nbits_ += width;
  }
  void put_bit(bool bit) { put(bit ? 1 : 0, 1); }

  std::uint64_t size() const { return nbits_; }
  std::vector<std::uint64_t>& words() { return words_; }
  std::vector<std::uint64_t> take() { return std::move(words_); }

  /// Bytes holding exactly ceil(size/8) bytes of the bit string.
  std::vector<std::uint8_t> to_bytes() const {
    std::vector<std::uint8_t> out((nbits_ + 7) / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8)));
    }
    return out;
  }

 private:
  std::vector<std::uint64_t> words_;
  std::uint64_t nbits_ = 0;
};

/// Random-access reads from an LSB-first bit string held as bytes.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t size() const { return bytes_.size() * 8; }

  /// Reads `width` (<= 57) bits starting at bit `pos`.
  std::uint64_t get(std::uint64_t pos, int width) const {
    if (width == 0) return 0;
    if (pos + width > size()) throw FormatError("bit read past end of payload");
    const std::uint64_t byte = pos >> 3;
    const int shift = static_cast<int>(pos & 7);
    const int nb = (shift + width + 7) / 8;
    std::uint64_t v = 0;
    for (int i = 0; i < nb; ++i) v |= std::uint64_t{bytes_[byte + i]} << (8 * i);
    return (v >> shift) & ((std::uint64_t{1} << width) - 1);
  }
  bool get_bit(std::uint64_t pos) const { return (bytes_[pos >> 3] >> (pos & 7)) & 1; }

 private:
  std::span<const std::uint8_t> bytes_;
};

/// Converts an LSB-first word vector to its byte image (ceil(nbits/8) bytes).
inline std::vector<std::uint8_t> words_to_bytes(std::span<const std::uint64_t> words, std::uint64_t nbits) {
  std::vector<std::uint8_t> out((nbits + 7) / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(words[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

inline std::vector<std::uint64_t> bytes_to_words(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint64_t> out((bytes.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bytes.size(); ++i) out[i / 8] |= std::uint64_t{bytes[i]} << (8 * (i % 8));
  return out;
}

}  // namespace annzip
