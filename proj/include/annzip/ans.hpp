#pragma once

// Range-variant asymmetric numeral systems with stack (LIFO) semantics.
//
// The state is a 64-bit head kept in [2^32, 2^64) plus a tail of spilled
// 32-bit words. Models expose a precision r, the (start, freq) slot range of a
// symbol, and the inverse lookup from a slot in [0, r) to its symbol.
// Power-of-two precisions are coded natively. Any other precision is refined
// exactly to an internal power of two (see refined_precision_bits), which keeps
// every operation an exact bijection.

#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <vector>

#include "annzip/bytes.hpp"
#include "annzip/errors.hpp"

namespace annzip {

inline constexpr int kAnsWordBits = 32;
inline constexpr std::uint64_t kAnsLowerBound = std::uint64_t{1} << 32;
inline constexpr std::uint64_t kAnsMaxPrecision = std::uint64_t{1} << 32;

struct SlotRange {
  std::uint64_t start = 0;
  std::uint64_t freq = 0;
};

struct SlotLookup {
  std::uint64_t symbol = 0;
  SlotRange range;
};

template <class M>
concept AnsModel = requires(const M& m, std::uint64_t v) {
  { m.precision() } -> std::convertible_to<std::uint64_t>;
  { m.range(v) } -> std::convertible_to<SlotRange>;
  { m.lookup(v) } -> std::convertible_to<SlotLookup>;
};

/// A probability model quantized to integer masses summing to the precision.
class QuantizedPmf {
 public:
  QuantizedPmf() = default;
  explicit QuantizedPmf(std::span<const std::uint64_t> masses);

  std::uint64_t precision() const { return cum_.back(); }
  std::size_t size() const { return cum_.size() - 1; }
  std::uint64_t mass(std::uint64_t x) const { return cum_[x + 1] - cum_[x]; }
  std::uint64_t cumulative(std::uint64_t x) const { return cum_[x]; }

  SlotRange range(std::uint64_t x) const {
    if (x >= size()) throw ModelCoverageError("symbol outside model alphabet");
    return {cum_[x], cum_[x + 1] - cum_[x]};
  }
  SlotLookup lookup(std::uint64_t slot) const;

 private:
  std::vector<std::uint64_t> cum_{0};
};

/// Uniform distribution over [0, n).
class UniformModel {
 public:
  explicit UniformModel(std::uint64_t n) : n_(n) {
    if (n == 0) throw DomainError("uniform model over an empty range");
    if (n > kAnsMaxPrecision) throw DomainError("uniform range exceeds 2^32");
  }
  std::uint64_t precision() const { return n_; }
  SlotRange range(std::uint64_t x) const { return {x, 1}; }
  SlotLookup lookup(std::uint64_t slot) const { return {slot, {slot, 1}}; }

 private:
  std::uint64_t n_;
};

/// Internal precision (log2) used to code a model of precision r.
inline int refined_precision_bits(std::uint64_t r) {
  if (std::has_single_bit(r)) return std::countr_zero(r);
  const int c = ceil_log2(r);
  const int p = c + 8;
  return p > 30 ? std::max(30, c) : p;
}

/// The bare integer map s -> r*floor(s/p_x) + c_x + s mod p_x, without renormalization.
std::uint64_t ans_encode_step(std::uint64_t s, std::uint64_t x, const QuantizedPmf& model);
/// Inverse of ans_encode_step: returns (x, s).
std::pair<std::uint64_t, std::uint64_t> ans_decode_step(std::uint64_t s, const QuantizedPmf& model);

class AnsState {
 public:
  /// Head at the renormalization lower bound, empty tail.
  AnsState() = default;

  /// Deterministic starting state for bits-back coders; 64 bits, reproducible
  /// across platforms. head = 2^63 | (splitmix64(seed_bits) >> 1).
  static AnsState initial(std::uint64_t seed_bits = 0);

  template <AnsModel M>
  void encode(std::uint64_t x, const M& model) {
    const std::uint64_t r = model.precision();
    const SlotRange rg = model.range(x);
    if (rg.freq == 0) throw ModelCoverageError("symbol has zero mass");
    if (std::has_single_bit(r)) {
      push(rg.start, rg.freq, std::countr_zero(r));
    } else {
      const int p = refined_precision_bits(r);
      const std::uint64_t lo = refine(rg.start, r, p);
      const std::uint64_t hi = refine(rg.start + rg.freq, r, p);
      push(lo, hi - lo, p);
    }
  }

  template <AnsModel M>
  std::uint64_t decode(const M& model) {
    const std::uint64_t r = model.precision();
    if (std::has_single_bit(r)) {
      const int p = std::countr_zero(r);
      const std::uint64_t slot = head_ & ((r - 1));
      const SlotLookup hit = model.lookup(slot);
      pop(slot, hit.range.start, hit.range.freq, p);
      return hit.symbol;
    }
    const int p = refined_precision_bits(r);
    const std::uint64_t fine = head_ & ((std::uint64_t{1} << p) - 1);
    const std::uint64_t slot = (fine * r) >> p;
    const SlotLookup hit = model.lookup(slot);
    const std::uint64_t lo = refine(hit.range.start, r, p);
    const std::uint64_t hi = refine(hit.range.start + hit.range.freq, r, p);
    pop(fine, lo, hi - lo, p);
    return hit.symbol;
  }

  /// Pushes j in [0, bound) with uniform probability.
  void encode_uniform(std::uint64_t j, std::uint64_t bound) {
    if (bound == 0) throw DomainError("encode_uniform: bound must be >= 1");
    if (j >= bound) throw DomainError("encode_uniform: j >= bound");
    encode(j, UniformModel(bound));
  }
  /// Pops an index in [0, bound); used as an invertible sampler for bits-back.
  std::uint64_t decode_uniform(std::uint64_t bound) {
    if (bound == 0) throw DomainError("decode_uniform: bound must be >= 1");
    return decode(UniformModel(bound));
  }

  std::uint64_t head() const { return head_; }
  const std::vector<std::uint32_t>& tail() const { return tail_; }

  /// Storage size in bits: 32 per spilled word plus the bit width of the head.
  std::uint64_t bit_count() const {
    return kAnsWordBits * tail_.size() + static_cast<std::uint64_t>(std::bit_width(head_));
  }
  /// log2 of the state viewed as one integer.
  double information_bits() const {
    return kAnsWordBits * static_cast<double>(tail_.size()) + std::log2(static_cast<double>(head_));
  }

  /// Stream record: magic "ANSZ", version, 8-byte bit length, head bytes, tail words.
  std::vector<std::uint8_t> flush() const;
  static AnsState unflush(std::span<const std::uint8_t> bytes);

  /// Headerless form used inside blocks: head bytes then tail words.
  std::vector<std::uint8_t> to_payload() const;
  void append_payload(ByteWriter& out) const;
  static AnsState from_payload(std::span<const std::uint8_t> bytes);

  bool operator==(const AnsState&) const = default;

 private:
  static std::uint64_t refine(std::uint64_t c, std::uint64_t r, int p) {
    // ceil(c * 2^p / r); c <= r < 2^32 so the product fits in 64 bits.
    return ((c << p) + r - 1) / r;
  }

  void push(std::uint64_t start, std::uint64_t freq, int p) {
    if (freq == (std::uint64_t{1} << p)) return;  // deterministic symbol
    if ((head_ >> (64 - p)) >= freq) {
      tail_.push_back(static_cast<std::uint32_t>(head_));
      head_ >>= kAnsWordBits;
    }
    head_ = ((head_ / freq) << p) + start + head_ % freq;
  }

  void pop(std::uint64_t slot, std::uint64_t start, std::uint64_t freq, int p) {
    if (freq == (std::uint64_t{1} << p)) return;
    head_ = freq * (head_ >> p) + slot - start;
    if (head_ < kAnsLowerBound) {
      if (tail_.empty()) throw TruncatedStreamError("ANS tail underflow");
      head_ = (head_ << kAnsWordBits) | tail_.back();
      tail_.pop_back();
    }
  }

  std::uint64_t head_ = kAnsLowerBound;
  std::vector<std::uint32_t> tail_;
};

}  // namespace annzip
