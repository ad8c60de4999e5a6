#pragma once

// Adaptive entropy coding of PQ code columns.
//
// Entry i of a column is coded with Pr(x) = (1 + count_{<i}(x)) / (M + i),
// so the first entry is uniform over [M). The model is exact: its masses are
// integers summing to M + i, and the coder refines that precision internally.
// Encoding walks the column backwards while undoing the counts, so the
// decoder can replay the model forwards.

#include <cstdint>
#include <span>
#include <vector>

#include "annzip/ans.hpp"
#include "annzip/bytes.hpp"
#include "annzip/orderstat.hpp"

namespace annzip {

class AdaptiveSymbolModel {
 public:
  explicit AdaptiveSymbolModel(std::uint32_t alphabet) : counts_(alphabet, 0), tree_(alphabet) {}

  std::uint32_t alphabet() const { return static_cast<std::uint32_t>(counts_.size()); }
  std::uint64_t seen() const { return seen_; }

  std::uint64_t precision() const { return counts_.size() + seen_; }
  SlotRange range(std::uint64_t x) const {
    if (x >= counts_.size()) throw ModelCoverageError("code entry outside alphabet");
    return {tree_.prefix(x) + x, std::uint64_t{counts_[x]} + 1};
  }
  SlotLookup lookup(std::uint64_t slot) const {
    const std::uint64_t x = tree_.search_affine(slot, 1, 1);
    return {x, range(x)};
  }
  /// -log2 Pr(x) under the current counts.
  double cost_bits(std::uint64_t x) const;

  void add(std::uint64_t x) {
    counts_[x]++;
    tree_.add(x, +1);
    ++seen_;
  }
  void remove(std::uint64_t x) {
    counts_[x]--;
    tree_.add(x, -1);
    --seen_;
  }

 private:
  std::vector<std::uint32_t> counts_;
  FenwickTree tree_;
  std::uint64_t seen_ = 0;
};

struct EncodedColumn {
  /// 32 * tail words + head width - 33: information above the fixed start state.
  std::uint64_t bits = 0;
  std::vector<std::uint8_t> payload;  // ANS state, headerless form
};

EncodedColumn column_encode(std::span<const std::uint16_t> column, std::uint32_t alphabet);
/// Throws CorruptionError if the stream does not hold exactly n entries.
std::vector<std::uint16_t> column_decode(std::span<const std::uint8_t> payload, std::uint64_t n,
                                         std::uint32_t alphabet);
/// Cross-entropy of a column under the adaptive model, by direct summation.
double column_model_bits(std::span<const std::uint16_t> column, std::uint32_t alphabet);

/// Per-cluster conditional code block: one encoded column per PQ sub-quantizer.
struct ClusterCodeBlock {
  std::uint64_t n = 0;
  std::vector<EncodedColumn> columns;

  std::uint64_t bits() const;
  void serialize(ByteWriter& out) const;
  static ClusterCodeBlock deserialize(ByteReader& in, std::uint32_t m);
};

/// `codes` is n x m row-major.
ClusterCodeBlock cluster_codes_encode(std::span<const std::uint16_t> codes, std::uint64_t n,
                                      std::uint32_t m, std::uint32_t alphabet);
/// Writes n x m row-major codes into `out` (resized).
void cluster_codes_decode(const ClusterCodeBlock& block, std::uint32_t m, std::uint32_t alphabet,
                          std::vector<std::uint16_t>& out);

}  // namespace annzip
