#include "annzip/wavelet_tree.hpp"

#include <algorithm>

#include "annzip/errors.hpp"

namespace annzip {

WaveletTree::WaveletTree(std::span<const std::uint32_t> seq, std::uint32_t alphabet, BitvectorMode mode)
    : alphabet_(alphabet), size_(seq.size()), mode_(mode) {
  if (alphabet == 0) throw DomainError("wavelet tree needs a non-empty alphabet");
  starts_.assign(alphabet + 1, 0);
  for (std::uint32_t s : seq) {
    if (s >= alphabet) throw DomainError("wavelet tree symbol outside alphabet");
    starts_[s + 1]++;
  }
  for (std::uint32_t k = 0; k < alphabet; ++k) starts_[k + 1] += starts_[k];

  const int depth = ceil_log2(alphabet);
  std::vector<std::uint32_t> cur(seq.begin(), seq.end());
  std::vector<std::uint32_t> next(cur.size());
  for (int l = 0; l < depth; ++l) {
    const int shift = depth - 1 - l;
    BitWriter bw;
    for (std::uint32_t s : cur) bw.put_bit((s >> shift) & 1);
    levels_.emplace_back(bw.words(), size_, mode);
    if (l + 1 == depth) break;
    // Stable counting sort on the top l+1 bits.
    std::vector<std::uint64_t> bucket((std::size_t{1} << (l + 1)) + 1, 0);
    for (std::uint32_t s : cur) bucket[(s >> shift) + 1]++;
    for (std::size_t b = 1; b < bucket.size(); ++b) bucket[b] += bucket[b - 1];
    for (std::uint32_t s : cur) next[bucket[s >> shift]++] = s;
    cur.swap(next);
  }
}

std::uint64_t WaveletTree::node_start(std::uint64_t prefix, int depth) const {
  const std::uint64_t first = prefix << (levels() - depth);
  return starts_[std::min<std::uint64_t>(first, alphabet_)];
}

std::uint32_t WaveletTree::access(std::uint64_t i) const {
  if (i >= size_) throw RangeError("WaveletTree::access out of range");
  std::uint64_t pos = i;
  std::uint64_t prefix = 0;
  for (int l = 0; l < levels(); ++l) {
    const RsBitvector& bv = levels_[l];
    const std::uint64_t start = node_start(prefix, l);
    const bool b = bv.get(pos);
    const std::uint64_t r = bv.rank(b, pos) - bv.rank(b, start);
    prefix = 2 * prefix + b;
    pos = node_start(prefix, l + 1) + r;
  }
  return static_cast<std::uint32_t>(prefix);
}

std::uint64_t WaveletTree::rank(std::uint32_t k, std::uint64_t i) const {
  if (k >= alphabet_) throw RangeError("WaveletTree::rank symbol outside alphabet");
  if (i > size_) throw RangeError("WaveletTree::rank position out of range");
  std::uint64_t pos = i;
  std::uint64_t prefix = 0;
  for (int l = 0; l < levels(); ++l) {
    const RsBitvector& bv = levels_[l];
    const std::uint64_t start = node_start(prefix, l);
    const bool b = (k >> (levels() - 1 - l)) & 1;
    const std::uint64_t r = bv.rank(b, pos) - bv.rank(b, start);
    prefix = 2 * prefix + b;
    pos = node_start(prefix, l + 1) + r;
  }
  return pos - starts_[k];
}

std::uint64_t WaveletTree::select(std::uint32_t k, std::uint64_t occ) const {
  if (k >= alphabet_) throw RangeError("WaveletTree::select symbol outside alphabet");
  if (occ >= count(k)) throw RangeError("WaveletTree::select occurrence out of range");
  std::uint64_t pos = occ;
  for (int l = levels() - 1; l >= 0; --l) {
    const RsBitvector& bv = levels_[l];
    const std::uint64_t start = node_start(k >> (levels() - l), l);
    const bool b = (k >> (levels() - 1 - l)) & 1;
    pos = bv.select(b, bv.rank(b, start) + pos) - start;
  }
  return pos;
}

std::uint64_t WaveletTree::count(std::uint32_t k) const {
  if (k >= alphabet_) throw RangeError("WaveletTree::count symbol outside alphabet");
  return starts_[k + 1] - starts_[k];
}

std::uint64_t WaveletTree::payload_bits() const {
  std::uint64_t bits = 0;
  for (const auto& bv : levels_) bits += bv.payload_bits();
  return bits;
}

std::uint64_t WaveletTree::size_in_bits() const {
  std::uint64_t bits = 64 * starts_.size();
  for (const auto& bv : levels_) bits += bv.size_in_bits();
  return bits;
}

void WaveletTree::serialize(ByteWriter& out) const {
  out.put_u32(alphabet_);
  out.put_u64(size_);
  out.put_u8(static_cast<std::uint8_t>(mode_));
  out.put_u8(static_cast<std::uint8_t>(levels_.size()));
  out.put_pod_array<std::uint64_t>(starts_);
  for (const auto& bv : levels_) bv.serialize(out);
}

WaveletTree WaveletTree::deserialize(ByteReader& in) {
  WaveletTree wt;
  wt.alphabet_ = in.get_u32();
  wt.size_ = in.get_u64();
  const std::uint8_t mode = in.get_u8();
  if (mode > 1) throw FormatError("unknown wavelet tree mode");
  wt.mode_ = static_cast<BitvectorMode>(mode);
  const int depth = in.get_u8();
  if (wt.alphabet_ == 0 || depth != ceil_log2(wt.alphabet_)) throw FormatError("wavelet tree depth mismatch");
  wt.starts_ = in.get_pod_array<std::uint64_t>(std::size_t{wt.alphabet_} + 1);
  if (wt.starts_.front() != 0 || wt.starts_.back() != wt.size_ ||
      !std::is_sorted(wt.starts_.begin(), wt.starts_.end())) {
    throw FormatError("wavelet tree count table is inconsistent");
  }
  for (int l = 0; l < depth; ++l) {
    wt.levels_.push_back(RsBitvector::deserialize(in));
    if (wt.levels_.back().size() != wt.size_) throw FormatError("wavelet tree level length mismatch");
  }
  return wt;
}

}  // namespace annzip
