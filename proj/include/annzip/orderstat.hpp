#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

#include "annzip/errors.hpp"

namespace annzip {

/// Binary indexed tree of non-negative counts over [0, size).
class FenwickTree {
 public:
  FenwickTree() = default;
  explicit FenwickTree(std::uint64_t size) : tree_(size + 1, 0) {
    top_ = size == 0 ? 0 : std::bit_floor(size);
  }

  std::uint64_t size() const { return tree_.size() - 1; }

  void add(std::uint64_t pos, std::int64_t delta) {
    for (std::uint64_t i = pos + 1; i < tree_.size(); i += i & (~i + 1)) {
      tree_[i] = static_cast<std::uint32_t>(static_cast<std::int64_t>(tree_[i]) + delta);
    }
  }

  /// Sum of counts at positions < pos.
  std::uint64_t prefix(std::uint64_t pos) const {
    std::uint64_t s = 0;
    for (std::uint64_t i = pos; i > 0; i &= i - 1) s += tree_[i];
    return s;
  }

  /// Largest pos with prefix(pos) <= j, i.e. the position holding the j-th unit.
  std::uint64_t select(std::uint64_t j) const {
    std::uint64_t pos = 0;
    for (std::uint64_t step = top_; step > 0; step >>= 1) {
      const std::uint64_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= j) {
        pos = next;
        j -= tree_[next];
      }
    }
    return pos;
  }

  /// Largest pos with scale * prefix(pos) + offset * pos <= t. Inverts the
  /// cumulative of masses scale * count(v) + offset.
  std::uint64_t search_affine(std::uint64_t t, std::uint64_t scale, std::uint64_t offset) const {
    std::uint64_t pos = 0;
    std::uint64_t acc = 0;
    for (std::uint64_t step = top_; step > 0; step >>= 1) {
      const std::uint64_t next = pos + step;
      if (next < tree_.size()) {
        const std::uint64_t c = scale * (acc + tree_[next]) + offset * next;
        if (c <= t) {
          pos = next;
          acc += tree_[next];
        }
      }
    }
    return pos;
  }

  void clear() { std::fill(tree_.begin(), tree_.end(), 0); }

 private:
  std::vector<std::uint32_t> tree_{0};
  std::uint64_t top_ = 0;
};

/// Dynamic set of distinct integers in [0, universe) with rank and select.
/// One presence bit per value plus a Fenwick tree of per-block counts, so the
/// scratch for a universe of 10^6 ids stays around 130 KB.
class OrderStatSet {
 public:
  static constexpr std::uint64_t kBlockBits = 512;

  OrderStatSet() = default;
  explicit OrderStatSet(std::uint64_t universe)
      : universe_(universe), bits_((universe + 63) / 64, 0), blocks_((universe + kBlockBits - 1) / kBlockBits) {}

  std::uint64_t universe() const { return universe_; }
  std::uint64_t size() const { return size_; }
  bool contains(std::uint64_t v) const { return v < universe_ && (bits_[v >> 6] >> (v & 63) & 1); }

  void insert(std::uint64_t v) {
    check(v);
    if (contains(v)) throw LogicError("OrderStatSet: duplicate insert");
    bits_[v >> 6] |= std::uint64_t{1} << (v & 63);
    blocks_.add(v / kBlockBits, +1);
    ++size_;
  }

  void remove(std::uint64_t v) {
    check(v);
    if (!contains(v)) throw LogicError("OrderStatSet: removing an absent value");
    bits_[v >> 6] &= ~(std::uint64_t{1} << (v & 63));
    blocks_.add(v / kBlockBits, -1);
    --size_;
  }

  /// Number of members strictly below v.
  std::uint64_t rank(std::uint64_t v) const {
    check(v);
    std::uint64_t r = blocks_.prefix(v / kBlockBits);
    const std::uint64_t w = v >> 6;
    for (std::uint64_t i = (v / kBlockBits) * (kBlockBits / 64); i < w; ++i) r += std::popcount(bits_[i]);
    return r + std::popcount(bits_[w] & ((std::uint64_t{1} << (v & 63)) - 1));
  }

  /// The j-th smallest member, 0-based.
  std::uint64_t select(std::uint64_t j) const {
    if (j >= size_) throw RangeError("OrderStatSet: select index out of range");
    const std::uint64_t b = blocks_.select(j);
    j -= blocks_.prefix(b);
    for (std::uint64_t i = b * (kBlockBits / 64);; ++i) {
      std::uint64_t word = bits_[i];
      const auto c = static_cast<std::uint64_t>(std::popcount(word));
      if (j < c) {
        for (; j > 0; --j) word &= word - 1;
        return i * 64 + static_cast<std::uint64_t>(std::countr_zero(word));
      }
      j -= c;
    }
  }

 private:
  void check(std::uint64_t v) const {
    if (v >= universe_) throw DomainError("OrderStatSet: value outside universe");
  }

  std::uint64_t universe_ = 0;
  std::vector<std::uint64_t> bits_;
  FenwickTree blocks_;
  std::uint64_t size_ = 0;
};

}  // namespace annzip
