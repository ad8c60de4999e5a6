#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "annzip/bytes.hpp"

namespace annzip {

enum class BitvectorMode : std::uint8_t { kFlat = 0, kCompressed = 1 };

/// Static bitvector with rank and select.
///
/// FLAT keeps the raw words plus a two-level rank directory: absolute counts
/// every 2^16 bits and 16-bit relative counts every 512-bit block.
///
/// COMPRESSED stores 63-bit blocks as (class, offset) pairs, where the class
/// is the popcount (6 bits) and the offset is the block's index among all
/// 63-bit words of that popcount (ceil(log2 C(63, class)) bits). Every 32
/// blocks a sample records the absolute rank and the offset-stream position.
class RsBitvector {
 public:
  RsBitvector() = default;
  RsBitvector(std::span<const std::uint64_t> words, std::uint64_t nbits, BitvectorMode mode);

  BitvectorMode mode() const { return mode_; }
  std::uint64_t size() const { return nbits_; }
  std::uint64_t ones() const { return ones_; }

  bool get(std::uint64_t i) const;
  /// Number of 1s in [0, i).
  std::uint64_t rank1(std::uint64_t i) const;
  std::uint64_t rank0(std::uint64_t i) const { return i - rank1(i); }
  /// Position of the o-th 1 (0-based).
  std::uint64_t select1(std::uint64_t o) const;
  /// Position of the o-th 0 (0-based).
  std::uint64_t select0(std::uint64_t o) const;

  std::uint64_t rank(bool bit, std::uint64_t i) const { return bit ? rank1(i) : rank0(i); }
  std::uint64_t select(bool bit, std::uint64_t o) const { return bit ? select1(o) : select0(o); }

  /// Bits of the bit string itself (FLAT) or of classes plus offsets (COMPRESSED).
  std::uint64_t payload_bits() const;
  /// payload_bits() plus rank/select directories.
  std::uint64_t size_in_bits() const;

  void serialize(ByteWriter& out) const;
  static RsBitvector deserialize(ByteReader& in);

 private:
  static constexpr std::uint64_t kBlockBits = 512;
  static constexpr std::uint64_t kSuperBits = 1 << 16;
  static constexpr int kRrrBlock = 63;
  static constexpr std::uint64_t kRrrSample = 32;

  void build_flat_directory();
  void build_compressed(std::span<const std::uint64_t> words);

  // FLAT helpers
  std::uint64_t flat_block_rank(std::uint64_t block) const;

  // COMPRESSED helpers
  int rrr_class(std::uint64_t block) const;
  std::uint64_t rrr_block(std::uint64_t block, std::uint64_t offset_pos) const;
  /// Offset-stream position of block `b`; also reports the 1s before it.
  std::uint64_t rrr_locate(std::uint64_t b, std::uint64_t* rank_before) const;
  std::uint64_t rrr_select(bool bit, std::uint64_t o) const;

  BitvectorMode mode_ = BitvectorMode::kFlat;
  std::uint64_t nbits_ = 0;
  std::uint64_t ones_ = 0;

  std::vector<std::uint64_t> words_;         // FLAT bits
  std::vector<std::uint64_t> super_counts_;  // FLAT: absolute rank per superblock
  std::vector<std::uint16_t> block_counts_;  // FLAT: rank relative to superblock

  std::vector<std::uint64_t> classes_;       // COMPRESSED: 6-bit classes, LSB-first
  std::vector<std::uint64_t> offsets_;       // COMPRESSED: variable-width offsets
  std::uint64_t offset_bits_ = 0;
  std::vector<std::uint64_t> sample_rank_;   // COMPRESSED: 1s before block 32*s
  std::vector<std::uint64_t> sample_ptr_;    // COMPRESSED: offset bit position of block 32*s
};

}  // namespace annzip
