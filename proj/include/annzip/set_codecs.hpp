#pragma once

// Codecs for unordered lists of distinct ids drawn from [0, universe).
//
// Every codec treats its input as a set: decoding may return the members in a
// different order than they were given. compact keeps the stored order,
// Elias-Fano and ROC return ascending / decode order respectively.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "annzip/ans.hpp"
#include "annzip/bitvector.hpp"
#include "annzip/bytes.hpp"
#include "annzip/orderstat.hpp"

namespace annzip {

using Id = std::uint32_t;

enum class IdCodec : std::uint8_t { kUnc = 0, kCompact = 1, kEf = 2, kRoc = 3 };

std::string_view to_string(IdCodec codec);
IdCodec parse_id_codec(std::string_view name);

/// One encoded id list. `bits` is the exact payload size used for
/// bits-per-id accounting; the tag and the count are not charged.
struct CompressedIdBlock {
  IdCodec codec = IdCodec::kUnc;
  std::uint64_t n = 0;
  std::uint64_t bits = 0;
  std::vector<std::uint8_t> payload;

  /// 1-byte codec tag, varint n, varint bits, varint payload length, payload.
  void serialize(ByteWriter& out) const;
  static CompressedIdBlock deserialize(ByteReader& in);
};

/// Fixed-width ids: 32 or 64 bits per id in stored order.
CompressedIdBlock unc_encode(std::span<const Id> ids, std::uint64_t universe, int width_bytes = 8);
std::vector<Id> unc_decode(const CompressedIdBlock& block);

/// ceil(log2 universe) bits per id, bit-packed in stored order.
CompressedIdBlock compact_encode(std::span<const Id> ids, std::uint64_t universe);
std::vector<Id> compact_decode(const CompressedIdBlock& block, std::uint64_t universe);
Id compact_access(const CompressedIdBlock& block, std::uint64_t universe, std::uint64_t i);

/// Low-bit width used by Elias-Fano for n values below universe.
int ef_low_width(std::uint64_t n, std::uint64_t universe);

/// Elias-Fano over the ascending order: n low-bit fields, then the unary
/// upper stream (one 1 per element at position high_i + i).
CompressedIdBlock ef_encode(std::span<const Id> ids, std::uint64_t universe);
std::vector<Id> ef_decode(const CompressedIdBlock& block, std::uint64_t universe);

/// Positional access into an Elias-Fano block via a select directory on the upper stream.
class EfView {
 public:
  EfView() = default;
  EfView(const CompressedIdBlock& block, std::uint64_t universe);

  std::uint64_t size() const { return n_; }
  std::uint64_t low_width() const { return low_width_; }
  std::uint64_t upper_bits() const { return upper_.size(); }
  /// The i-th smallest id.
  Id access(std::uint64_t i) const;

 private:
  std::uint64_t n_ = 0;
  int low_width_ = 0;
  std::vector<std::uint64_t> low_;
  RsBitvector upper_;
};

/// Random Order Coding: bits-back coding of a set using sampling without
/// replacement as the latent order. Scratch is sized to the universe and
/// reused across calls; one coder per thread.
class RocCoder {
 public:
  explicit RocCoder(std::uint64_t universe, std::uint64_t seed_bits = 0);

  std::uint64_t universe() const { return universe_; }

  CompressedIdBlock encode(std::span<const Id> ids);
  /// Decodes into `out` (cleared first); members come back in decode order.
  void decode(const CompressedIdBlock& block, std::vector<Id>& out);
  std::vector<Id> decode(const CompressedIdBlock& block) {
    std::vector<Id> out;
    decode(block, out);
    return out;
  }

 private:
  std::uint64_t universe_;
  UniformModel symbols_;
  AnsState initial_;
  OrderStatSet scratch_;
};

CompressedIdBlock roc_encode(std::span<const Id> ids, std::uint64_t universe);
std::vector<Id> roc_decode(const CompressedIdBlock& block, std::uint64_t universe);

/// log2(n!) by direct summation of log2 i for i = 2..n.
double theoretical_savings(std::uint64_t n);

/// Dispatch helpers used by the indexes.
CompressedIdBlock encode_ids(IdCodec codec, std::span<const Id> ids, std::uint64_t universe,
                             RocCoder* roc = nullptr, int unc_width_bytes = 8);
void decode_ids(const CompressedIdBlock& block, std::uint64_t universe, std::vector<Id>& out,
                RocCoder* roc = nullptr);

}  // namespace annzip
