#include "annzip/bitvector.hpp"

#include <algorithm>
#include <array>
#include <bit>

#include "annzip/errors.hpp"

namespace annzip {

namespace {

using Binomials = std::array<std::array<std::uint64_t, 64>, 64>;

const Binomials& binomials() {
  static const Binomials table = [] {
    Binomials c{};
    for (int n = 0; n < 64; ++n) {
      c[n][0] = 1;
      for (int k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (k < n ? c[n - 1][k] : 0);
    }
    return c;
  }();
  return table;
}

const std::array<int, 64>& offset_widths() {
  static const std::array<int, 64> widths = [] {
    std::array<int, 64> w{};
    for (int k = 0; k <= 63; ++k) w[k] = ceil_log2(binomials()[63][k]);
    return w;
  }();
  return widths;
}

std::uint64_t extract(std::span<const std::uint64_t> words, std::uint64_t pos, int width) {
  if (width == 0) return 0;
  const std::uint64_t w = pos >> 6;
  const int off = static_cast<int>(pos & 63);
  std::uint64_t v = words[w] >> off;
  if (off + width > 64 && w + 1 < words.size()) v |= words[w + 1] << (64 - off);
  return width == 64 ? v : v & ((std::uint64_t{1} << width) - 1);
}

int select_in_word(std::uint64_t w, std::uint64_t o) {
  for (std::uint64_t i = 0; i < o; ++i) w &= w - 1;
  return std::countr_zero(w);
}

std::uint64_t rrr_offset(std::uint64_t block) {
  const auto& c = binomials();
  std::uint64_t offset = 0;
  int k = 0;
  while (block != 0) {
    const int pos = std::countr_zero(block);
    block &= block - 1;
    ++k;
    offset += c[pos][k];
  }
  return offset;
}

std::uint64_t rrr_unrank(int cls, std::uint64_t offset) {
  const auto& c = binomials();
  std::uint64_t block = 0;
  int k = cls;
  for (int pos = 62; pos >= 0 && k > 0; --pos) {
    if (offset >= c[pos][k]) {
      block |= std::uint64_t{1} << pos;
      offset -= c[pos][k];
      --k;
    }
  }
  return block;
}

}  // namespace

RsBitvector::RsBitvector(std::span<const std::uint64_t> words, std::uint64_t nbits, BitvectorMode mode)
    : mode_(mode), nbits_(nbits) {
  const std::uint64_t nwords = (nbits + 63) / 64;
  if (words.size() < nwords) throw DomainError("RsBitvector: word buffer shorter than nbits");
  std::vector<std::uint64_t> w(words.begin(), words.begin() + nwords);
  if ((nbits & 63) != 0) w.back() &= (std::uint64_t{1} << (nbits & 63)) - 1;
  for (auto x : w) ones_ += std::popcount(x);
  if (mode == BitvectorMode::kFlat) {
    words_ = std::move(w);
    build_flat_directory();
  } else {
    build_compressed(w);
  }
}

void RsBitvector::build_flat_directory() {
  const std::uint64_t nblocks = (nbits_ + kBlockBits - 1) / kBlockBits;
  constexpr std::uint64_t per_super = kSuperBits / kBlockBits;
  block_counts_.assign(nblocks + 1, 0);
  super_counts_.assign(nblocks / per_super + 1, 0);
  std::uint64_t running = 0;
  for (std::uint64_t b = 0; b <= nblocks; ++b) {
    if (b % per_super == 0) super_counts_[b / per_super] = running;
    block_counts_[b] = static_cast<std::uint16_t>(running - super_counts_[b / per_super]);
    if (b == nblocks) break;
    for (std::uint64_t i = b * 8; i < std::min<std::uint64_t>(b * 8 + 8, words_.size()); ++i) {
      running += std::popcount(words_[i]);
    }
  }
}

std::uint64_t RsBitvector::flat_block_rank(std::uint64_t block) const {
  return super_counts_[block / (kSuperBits / kBlockBits)] + block_counts_[block];
}

void RsBitvector::build_compressed(std::span<const std::uint64_t> words) {
  const std::uint64_t nblocks = (nbits_ + kRrrBlock - 1) / kRrrBlock;
  const auto& widths = offset_widths();
  BitWriter cls;
  BitWriter off;
  for (std::uint64_t b = 0; b < nblocks; ++b) {
    const std::uint64_t start = b * kRrrBlock;
    const int width = static_cast<int>(std::min<std::uint64_t>(kRrrBlock, nbits_ - start));
    const std::uint64_t block = extract(words, start, width);
    const int c = std::popcount(block);
    cls.put(static_cast<std::uint64_t>(c), 6);
    off.put(rrr_offset(block), widths[c]);
  }
  offset_bits_ = off.size();
  classes_ = cls.take();
  offsets_ = off.take();
  sample_rank_.assign(nblocks / kRrrSample + 1, 0);
  sample_ptr_.assign(nblocks / kRrrSample + 1, 0);
  std::uint64_t rank = 0;
  std::uint64_t ptr = 0;
  for (std::uint64_t b = 0; b <= nblocks; ++b) {
    if (b % kRrrSample == 0) {
      sample_rank_[b / kRrrSample] = rank;
      sample_ptr_[b / kRrrSample] = ptr;
    }
    if (b == nblocks) break;
    const int c = rrr_class(b);
    rank += c;
    ptr += widths[c];
  }
}

int RsBitvector::rrr_class(std::uint64_t block) const {
  return static_cast<int>(extract(classes_, block * 6, 6));
}

std::uint64_t RsBitvector::rrr_block(std::uint64_t block, std::uint64_t offset_pos) const {
  const int c = rrr_class(block);
  return rrr_unrank(c, extract(offsets_, offset_pos, offset_widths()[c]));
}

std::uint64_t RsBitvector::rrr_locate(std::uint64_t b, std::uint64_t* rank_before) const {
  const std::uint64_t s = b / kRrrSample;
  std::uint64_t rank = sample_rank_[s];
  std::uint64_t ptr = sample_ptr_[s];
  for (std::uint64_t i = s * kRrrSample; i < b; ++i) {
    const int c = rrr_class(i);
    rank += c;
    ptr += offset_widths()[c];
  }
  if (rank_before != nullptr) *rank_before = rank;
  return ptr;
}

bool RsBitvector::get(std::uint64_t i) const {
  if (i >= nbits_) throw RangeError("RsBitvector::get out of range");
  if (mode_ == BitvectorMode::kFlat) return (words_[i >> 6] >> (i & 63)) & 1;
  const std::uint64_t b = i / kRrrBlock;
  const std::uint64_t block = rrr_block(b, rrr_locate(b, nullptr));
  return (block >> (i % kRrrBlock)) & 1;
}

std::uint64_t RsBitvector::rank1(std::uint64_t i) const {
  if (i > nbits_) throw RangeError("RsBitvector::rank1 out of range");
  if (mode_ == BitvectorMode::kFlat) {
    const std::uint64_t b = i / kBlockBits;
    std::uint64_t r = flat_block_rank(b);
    const std::uint64_t last = i >> 6;
    for (std::uint64_t w = b * 8; w < last; ++w) r += std::popcount(words_[w]);
    if ((i & 63) != 0) r += std::popcount(words_[last] & ((std::uint64_t{1} << (i & 63)) - 1));
    return r;
  }
  const std::uint64_t b = i / kRrrBlock;
  const int within = static_cast<int>(i % kRrrBlock);
  std::uint64_t r = 0;
  const std::uint64_t ptr = rrr_locate(b, &r);
  if (within > 0) {
    const std::uint64_t block = rrr_block(b, ptr);
    r += std::popcount(block & ((std::uint64_t{1} << within) - 1));
  }
  return r;
}

std::uint64_t RsBitvector::select1(std::uint64_t o) const {
  if (o >= ones_) throw RangeError("RsBitvector::select1 out of range");
  if (mode_ == BitvectorMode::kCompressed) return rrr_select(true, o);
  const std::uint64_t nblocks = (nbits_ + kBlockBits - 1) / kBlockBits;
  std::uint64_t lo = 0;
  std::uint64_t hi = nblocks;  // invariant: block_rank(lo) <= o < block_rank(hi)
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (flat_block_rank(mid) <= o) lo = mid; else hi = mid;
  }
  o -= flat_block_rank(lo);
  for (std::uint64_t w = lo * 8;; ++w) {
    const auto c = static_cast<std::uint64_t>(std::popcount(words_[w]));
    if (o < c) return w * 64 + select_in_word(words_[w], o);
    o -= c;
  }
}

std::uint64_t RsBitvector::select0(std::uint64_t o) const {
  if (o >= nbits_ - ones_) throw RangeError("RsBitvector::select0 out of range");
  if (mode_ == BitvectorMode::kCompressed) return rrr_select(false, o);
  const std::uint64_t nblocks = (nbits_ + kBlockBits - 1) / kBlockBits;
  auto zeros_before = [&](std::uint64_t b) { return b * kBlockBits - flat_block_rank(b); };
  std::uint64_t lo = 0;
  std::uint64_t hi = nblocks;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (zeros_before(mid) <= o) lo = mid; else hi = mid;
  }
  o -= zeros_before(lo);
  for (std::uint64_t w = lo * 8;; ++w) {
    std::uint64_t inv = ~words_[w];
    if (w == words_.size() - 1 && (nbits_ & 63) != 0) inv &= (std::uint64_t{1} << (nbits_ & 63)) - 1;
    const auto c = static_cast<std::uint64_t>(std::popcount(inv));
    if (o < c) return w * 64 + select_in_word(inv, o);
    o -= c;
  }
}

std::uint64_t RsBitvector::rrr_select(bool bit, std::uint64_t o) const {
  auto count_before = [&](std::uint64_t s) {
    const std::uint64_t r = sample_rank_[s];
    return bit ? r : s * kRrrSample * kRrrBlock - r;
  };
  const std::uint64_t nblocks = (nbits_ + kRrrBlock - 1) / kRrrBlock;
  std::uint64_t lo = 0;
  std::uint64_t hi = (nblocks + kRrrSample - 1) / kRrrSample;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (count_before(mid) <= o) lo = mid; else hi = mid;
  }
  o -= count_before(lo);
  std::uint64_t ptr = sample_ptr_[lo];
  for (std::uint64_t b = lo * kRrrSample; b < nblocks; ++b) {
    const int c = rrr_class(b);
    const std::uint64_t cnt = bit ? static_cast<std::uint64_t>(c) : static_cast<std::uint64_t>(kRrrBlock - c);
    if (o < cnt) {
      std::uint64_t block = rrr_block(b, ptr);
      if (!bit) block = ~block & ((std::uint64_t{1} << kRrrBlock) - 1);
      return b * kRrrBlock + select_in_word(block, o);
    }
    o -= cnt;
    ptr += offset_widths()[c];
  }
  throw RangeError("RsBitvector::select past end");
}

std::uint64_t RsBitvector::payload_bits() const {
  if (mode_ == BitvectorMode::kFlat) return nbits_;
  return 6 * ((nbits_ + kRrrBlock - 1) / kRrrBlock) + offset_bits_;
}

std::uint64_t RsBitvector::size_in_bits() const {
  if (mode_ == BitvectorMode::kFlat) {
    return nbits_ + 64 * super_counts_.size() + 16 * block_counts_.size();
  }
  return payload_bits() + 64 * (sample_rank_.size() + sample_ptr_.size());
}

void RsBitvector::serialize(ByteWriter& out) const {
  out.put_u8(static_cast<std::uint8_t>(mode_));
  out.put_u64(nbits_);
  if (mode_ == BitvectorMode::kFlat) {
    out.put_pod_array<std::uint64_t>(words_);
  } else {
    out.put_u64(offset_bits_);
    out.put_pod_array<std::uint64_t>(classes_);
    out.put_pod_array<std::uint64_t>(offsets_);
  }
}

RsBitvector RsBitvector::deserialize(ByteReader& in) {
  RsBitvector bv;
  const std::uint8_t mode = in.get_u8();
  if (mode > 1) throw FormatError("unknown bitvector mode");
  bv.mode_ = static_cast<BitvectorMode>(mode);
  bv.nbits_ = in.get_u64();
  if (bv.mode_ == BitvectorMode::kFlat) {
    bv.words_ = in.get_pod_array<std::uint64_t>((bv.nbits_ + 63) / 64);
    for (auto x : bv.words_) bv.ones_ += std::popcount(x);
    bv.build_flat_directory();
    return bv;
  }
  bv.offset_bits_ = in.get_u64();
  const std::uint64_t nblocks = (bv.nbits_ + kRrrBlock - 1) / kRrrBlock;
  bv.classes_ = in.get_pod_array<std::uint64_t>((6 * nblocks + 63) / 64);
  bv.offsets_ = in.get_pod_array<std::uint64_t>((bv.offset_bits_ + 63) / 64);
  bv.sample_rank_.assign(nblocks / kRrrSample + 1, 0);
  bv.sample_ptr_.assign(nblocks / kRrrSample + 1, 0);
  std::uint64_t rank = 0;
  std::uint64_t ptr = 0;
  for (std::uint64_t b = 0; b <= nblocks; ++b) {
    if (b % kRrrSample == 0) {
      bv.sample_rank_[b / kRrrSample] = rank;
      bv.sample_ptr_[b / kRrrSample] = ptr;
    }
    if (b == nblocks) break;
    const int c = bv.rrr_class(b);
    if (c > kRrrBlock) throw FormatError("bitvector block class out of range");
    rank += c;
    ptr += offset_widths()[c];
  }
  if (ptr != bv.offset_bits_) throw FormatError("bitvector offset stream length mismatch");
  bv.ones_ = rank;
  return bv;
}

}  // namespace annzip
