#include "annzip/set_codecs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace annzip {

namespace {

void check_ids(std::span<const Id> ids, std::uint64_t universe) {
  for (Id id : ids) {
    if (id >= universe) throw DomainError("id " + std::to_string(id) + " outside universe");
  }
}

std::vector<Id> sorted_unique(std::span<const Id> ids) {
  std::vector<Id> s(ids.begin(), ids.end());
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw LogicError("duplicate id in list");
  return s;
}

}  // namespace

std::string_view to_string(IdCodec codec) {
  switch (codec) {
    case IdCodec::kUnc: return "unc";
    case IdCodec::kCompact: return "compact";
    case IdCodec::kEf: return "ef";
    case IdCodec::kRoc: return "roc";
  }
  return "?";
}

IdCodec parse_id_codec(std::string_view name) {
  if (name == "unc") return IdCodec::kUnc;
  if (name == "compact") return IdCodec::kCompact;
  if (name == "ef") return IdCodec::kEf;
  if (name == "roc") return IdCodec::kRoc;
  throw DomainError("unknown id codec: " + std::string(name));
}

void CompressedIdBlock::serialize(ByteWriter& out) const {
  out.put_u8(static_cast<std::uint8_t>(codec));
  out.put_varint(n);
  out.put_varint(bits);
  out.put_blob(payload);
}

CompressedIdBlock CompressedIdBlock::deserialize(ByteReader& in) {
  CompressedIdBlock b;
  const std::uint8_t tag = in.get_u8();
  if (tag > static_cast<std::uint8_t>(IdCodec::kRoc)) throw FormatError("unknown id codec tag");
  b.codec = static_cast<IdCodec>(tag);
  b.n = in.get_varint();
  b.bits = in.get_varint();
  auto p = in.get_blob();
  b.payload.assign(p.begin(), p.end());
  if (b.bits > 8 * b.payload.size()) throw FormatError("id block bit count exceeds payload");
  return b;
}

// ---- UNC -------------------------------------------------------------------

CompressedIdBlock unc_encode(std::span<const Id> ids, std::uint64_t universe, int width_bytes) {
  if (width_bytes != 4 && width_bytes != 8) throw DomainError("unc width must be 4 or 8 bytes");
  check_ids(ids, universe);
  CompressedIdBlock b{IdCodec::kUnc, ids.size(), 8ull * width_bytes * ids.size(), {}};
  ByteWriter out;
  for (Id id : ids) out.put_le(id, width_bytes);
  b.payload = out.take();
  return b;
}

std::vector<Id> unc_decode(const CompressedIdBlock& block) {
  if (block.n == 0) return {};
  const std::uint64_t width = block.payload.size() / block.n;
  if ((width != 4 && width != 8) || width * block.n != block.payload.size()) {
    throw FormatError("unc payload size mismatch");
  }
  ByteReader in(block.payload);
  std::vector<Id> out(block.n);
  for (auto& id : out) id = static_cast<Id>(in.get_le(static_cast<int>(width)));
  return out;
}

// ---- compact ---------------------------------------------------------------

CompressedIdBlock compact_encode(std::span<const Id> ids, std::uint64_t universe) {
  check_ids(ids, universe);
  const int w = ceil_log2(universe);
  BitWriter bw;
  for (Id id : ids) bw.put(id, w);
  return {IdCodec::kCompact, ids.size(), static_cast<std::uint64_t>(w) * ids.size(), bw.to_bytes()};
}

std::vector<Id> compact_decode(const CompressedIdBlock& block, std::uint64_t universe) {
  const int w = ceil_log2(universe);
  BitReader br(block.payload);
  std::vector<Id> out(block.n);
  for (std::uint64_t i = 0; i < block.n; ++i) {
    out[i] = static_cast<Id>(br.get(i * w, w));
    if (out[i] >= universe) throw CorruptionError("compact id outside universe");
  }
  return out;
}

Id compact_access(const CompressedIdBlock& block, std::uint64_t universe, std::uint64_t i) {
  if (i >= block.n) throw RangeError("compact_access index out of range");
  const int w = ceil_log2(universe);
  return static_cast<Id>(BitReader(block.payload).get(i * w, w));
}

// ---- Elias-Fano --------------------------------------------------------------

int ef_low_width(std::uint64_t n, std::uint64_t universe) {
  if (n == 0 || universe <= n) return 0;
  return std::bit_width(universe / n) - 1;
}

CompressedIdBlock ef_encode(std::span<const Id> ids, std::uint64_t universe) {
  check_ids(ids, universe);
  CompressedIdBlock b{IdCodec::kEf, ids.size(), 0, {}};
  if (ids.empty()) return b;
  const std::vector<Id> s = sorted_unique(ids);
  const int l = ef_low_width(s.size(), universe);
  BitWriter bw;
  for (Id v : s) bw.put(v, l);
  const std::uint64_t upper_len = s.size() + (std::uint64_t{s.back()} >> l);
  std::uint64_t pos = 0;
  for (std::uint64_t i = 0; i < s.size(); ++i) {
    const std::uint64_t one = (std::uint64_t{s[i]} >> l) + i;
    for (; pos < one; ++pos) bw.put_bit(false);
    bw.put_bit(true);
    ++pos;
  }
  b.bits = s.size() * l + upper_len;
  b.payload = bw.to_bytes();
  return b;
}

std::vector<Id> ef_decode(const CompressedIdBlock& block, std::uint64_t universe) {
  std::vector<Id> out(block.n);
  if (block.n == 0) return out;
  const int l = ef_low_width(block.n, universe);
  BitReader br(block.payload);
  const std::uint64_t upper_start = block.n * l;
  std::uint64_t pos = upper_start;
  for (std::uint64_t i = 0; i < block.n; ++i) {
    while (true) {
      if (pos >= block.bits) throw CorruptionError("EF upper stream ended early");
      if (br.get_bit(pos++)) break;
    }
    const std::uint64_t high = pos - 1 - upper_start - i;
    const std::uint64_t v = (high << l) | br.get(i * l, l);
    if (v >= universe) throw CorruptionError("EF id outside universe");
    out[i] = static_cast<Id>(v);
  }
  return out;
}

EfView::EfView(const CompressedIdBlock& block, std::uint64_t universe)
    : n_(block.n), low_width_(ef_low_width(block.n, universe)) {
  if (n_ == 0) return;
  const std::uint64_t low_bits = n_ * low_width_;
  const std::uint64_t upper_len = block.bits - low_bits;
  BitReader br(block.payload);
  BitWriter low;
  for (std::uint64_t i = 0; i < n_; ++i) low.put(br.get(i * low_width_, low_width_), low_width_);
  low_ = low.take();
  BitWriter up;
  for (std::uint64_t p = 0; p < upper_len; p += 32) {
    const int w = static_cast<int>(std::min<std::uint64_t>(32, upper_len - p));
    up.put(br.get(low_bits + p, w), w);
  }
  upper_ = RsBitvector(up.words(), upper_len, BitvectorMode::kFlat);
  if (upper_.ones() != n_) throw CorruptionError("EF upper stream count mismatch");
}

Id EfView::access(std::uint64_t i) const {
  if (i >= n_) throw RangeError("EfView::access index out of range");
  const std::uint64_t high = upper_.select1(i) - i;
  std::uint64_t low = 0;
  if (low_width_ > 0) {
    const std::uint64_t pos = i * low_width_;
    const std::uint64_t w = pos >> 6;
    const int off = static_cast<int>(pos & 63);
    low = low_[w] >> off;
    if (off + low_width_ > 64) low |= low_[w + 1] << (64 - off);
    low &= (std::uint64_t{1} << low_width_) - 1;
  }
  return static_cast<Id>((high << low_width_) | low);
}

// ---- ROC ---------------------------------------------------------------------

RocCoder::RocCoder(std::uint64_t universe, std::uint64_t seed_bits)
    : universe_(universe),
      symbols_(universe),
      initial_(AnsState::initial(seed_bits)),
      scratch_(universe) {}

CompressedIdBlock RocCoder::encode(std::span<const Id> ids) {
  check_ids(ids, universe_);
  std::size_t inserted = 0;
  try {
    for (Id id : ids) {
      scratch_.insert(id);
      ++inserted;
    }
  } catch (...) {
    for (std::size_t i = 0; i < inserted; ++i) scratch_.remove(ids[i]);
    throw;
  }
  AnsState st = initial_;
  for (std::uint64_t i = ids.size(); i >= 1; --i) {
    const std::uint64_t j = st.decode_uniform(i);
    const auto z = scratch_.select(j);
    st.encode(z, symbols_);
    scratch_.remove(z);
  }
  return {IdCodec::kRoc, ids.size(), st.bit_count(), st.to_payload()};
}

void RocCoder::decode(const CompressedIdBlock& block, std::vector<Id>& out) {
  out.clear();
  out.reserve(block.n);
  AnsState st = AnsState::from_payload(block.payload);
  try {
    for (std::uint64_t i = 1; i <= block.n; ++i) {
      const auto z = st.decode(symbols_);
      if (scratch_.contains(z)) throw CorruptionError("ROC stream decodes a repeated id");
      scratch_.insert(z);
      out.push_back(static_cast<Id>(z));
      st.encode_uniform(scratch_.rank(z), i);
    }
  } catch (...) {
    for (Id z : out) scratch_.remove(z);
    throw;
  }
  for (Id z : out) scratch_.remove(z);
  if (!(st == initial_)) throw CorruptionError("ROC final state does not match the initial state");
}

CompressedIdBlock roc_encode(std::span<const Id> ids, std::uint64_t universe) {
  return RocCoder(universe).encode(ids);
}

std::vector<Id> roc_decode(const CompressedIdBlock& block, std::uint64_t universe) {
  return RocCoder(universe).decode(block);
}

double theoretical_savings(std::uint64_t n) {
  double s = 0;
  for (std::uint64_t i = 2; i <= n; ++i) s += std::log2(static_cast<double>(i));
  return s;
}

// ---- dispatch ----------------------------------------------------------------

CompressedIdBlock encode_ids(IdCodec codec, std::span<const Id> ids, std::uint64_t universe,
                             RocCoder* roc, int unc_width_bytes) {
  switch (codec) {
    case IdCodec::kUnc: return unc_encode(ids, universe, unc_width_bytes);
    case IdCodec::kCompact: return compact_encode(ids, universe);
    case IdCodec::kEf: return ef_encode(ids, universe);
    case IdCodec::kRoc:
      if (roc != nullptr && roc->universe() == universe) return roc->encode(ids);
      return roc_encode(ids, universe);
  }
  throw DomainError("unknown id codec");
}

void decode_ids(const CompressedIdBlock& block, std::uint64_t universe, std::vector<Id>& out,
                RocCoder* roc) {
  switch (block.codec) {
    case IdCodec::kUnc: out = unc_decode(block); return;
    case IdCodec::kCompact: out = compact_decode(block, universe); return;
    case IdCodec::kEf: out = ef_decode(block, universe); return;
    case IdCodec::kRoc:
      if (roc != nullptr && roc->universe() == universe) {
        roc->decode(block, out);
      } else {
        out = roc_decode(block, universe);
      }
      return;
  }
  throw FormatError("unknown id codec");
}

}  // namespace annzip
