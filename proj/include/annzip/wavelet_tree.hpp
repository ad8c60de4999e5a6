#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "annzip/bitvector.hpp"
#include "annzip/bytes.hpp"

namespace annzip {

/// Balanced wavelet tree over a sequence S in [K)^N.
///
/// Level l holds bit (L-1-l) of every symbol (L = ceil(log2 K)), with the
/// symbols stably ordered by their top l bits, so each node of level l is a
/// contiguous run. Node boundaries come from the cumulative symbol counts
/// (`starts_`), which keeps the layout pointerless.
class WaveletTree {
 public:
  WaveletTree() = default;
  WaveletTree(std::span<const std::uint32_t> seq, std::uint32_t alphabet, BitvectorMode mode);

  std::uint32_t alphabet() const { return alphabet_; }
  std::uint64_t size() const { return size_; }
  int levels() const { return static_cast<int>(levels_.size()); }
  BitvectorMode mode() const { return mode_; }
  const RsBitvector& level(int l) const { return levels_[l]; }

  /// S[i].
  std::uint32_t access(std::uint64_t i) const;
  /// Occurrences of k in S[0, i).
  std::uint64_t rank(std::uint32_t k, std::uint64_t i) const;
  /// Index of the occ-th (0-based) occurrence of k.
  std::uint64_t select(std::uint32_t k, std::uint64_t occ) const;
  std::uint64_t count(std::uint32_t k) const;

  /// Level bitvector payloads only (N * L bits in FLAT mode).
  std::uint64_t payload_bits() const;
  /// Levels with their directories, plus the 64-bit count table.
  std::uint64_t size_in_bits() const;
  double bits_per_id() const {
    return size_ == 0 ? 0.0 : static_cast<double>(size_in_bits()) / static_cast<double>(size_);
  }

  void serialize(ByteWriter& out) const;
  static WaveletTree deserialize(ByteReader& in);

 private:
  std::uint64_t node_start(std::uint64_t prefix, int depth) const;

  std::uint32_t alphabet_ = 0;
  std::uint64_t size_ = 0;
  BitvectorMode mode_ = BitvectorMode::kFlat;
  std::vector<std::uint64_t> starts_;  // starts_[k] = occurrences of symbols < k
  std::vector<RsBitvector> levels_;
};

}  // namespace annzip
