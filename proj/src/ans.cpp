#include "annzip/ans.hpp"

#include <algorithm>

namespace annzip {

namespace {

constexpr char kStreamMagic[5] = "ANSZ";
constexpr std::uint8_t kStreamVersion = 1;
constexpr std::size_t kStreamHeaderBytes = 4 + 1 + 8;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

int head_bytes(std::uint64_t head) { return (std::bit_width(head) + 7) / 8; }

}  // namespace

QuantizedPmf::QuantizedPmf(std::span<const std::uint64_t> masses) {
  cum_.reserve(masses.size() + 1);
  for (std::uint64_t m : masses) {
    if (cum_.back() + m < cum_.back()) throw DomainError("pmf masses overflow");
    cum_.push_back(cum_.back() + m);
  }
  if (precision() == 0) throw DomainError("pmf has zero total mass");
  if (precision() > kAnsMaxPrecision) throw DomainError("pmf precision exceeds 2^32");
}

SlotLookup QuantizedPmf::lookup(std::uint64_t slot) const {
  // First x with cum_[x + 1] > slot; zero-mass symbols are skipped.
  auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), slot);
  const auto x = static_cast<std::uint64_t>(it - cum_.begin() - 1);
  return {x, {cum_[x], cum_[x + 1] - cum_[x]}};
}

std::uint64_t ans_encode_step(std::uint64_t s, std::uint64_t x, const QuantizedPmf& model) {
  const SlotRange rg = model.range(x);
  if (rg.freq == 0) throw ModelCoverageError("symbol has zero mass");
  return model.precision() * (s / rg.freq) + rg.start + s % rg.freq;
}

std::pair<std::uint64_t, std::uint64_t> ans_decode_step(std::uint64_t s, const QuantizedPmf& model) {
  const std::uint64_t r = model.precision();
  const SlotLookup hit = model.lookup(s % r);
  return {hit.symbol, hit.range.freq * (s / r) - hit.range.start + s % r};
}

AnsState AnsState::initial(std::uint64_t seed_bits) {
  AnsState st;
  st.head_ = (std::uint64_t{1} << 63) | (splitmix64(seed_bits) >> 1);
  return st;
}

std::vector<std::uint8_t> AnsState::flush() const {
  ByteWriter out;
  out.put_tag(kStreamMagic);
  out.put_u8(kStreamVersion);
  out.put_u64(bit_count());
  append_payload(out);
  return out.take();
}

AnsState AnsState::unflush(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (bytes.size() < kStreamHeaderBytes) throw FormatError("ANS stream shorter than its header");
  if (!in.get_tag(kStreamMagic)) throw FormatError("bad ANS stream magic");
  if (in.get_u8() != kStreamVersion) throw FormatError("unsupported ANS stream version");
  const std::uint64_t bits = in.get_u64();
  // Head width is in [33, 64], so the word count is determined by the bit length.
  if (bits < 33) throw FormatError("ANS bit length below the head minimum");
  const std::uint64_t words = (bits - 33) / kAnsWordBits;
  const std::uint64_t head_bits = bits - kAnsWordBits * words;
  const std::uint64_t expect = kStreamHeaderBytes + (head_bits + 7) / 8 + 4 * words;
  if (bytes.size() != expect) throw FormatError("ANS stream length does not match its bit length");
  AnsState st = from_payload(bytes.subspan(kStreamHeaderBytes));
  if (st.bit_count() != bits) throw FormatError("ANS head width does not match the header");
  return st;
}

void AnsState::append_payload(ByteWriter& out) const {
  out.put_le(head_, head_bytes(head_));
  for (std::uint32_t w : tail_) out.put_u32(w);
}

std::vector<std::uint8_t> AnsState::to_payload() const {
  ByteWriter out;
  append_payload(out);
  return out.take();
}

AnsState AnsState::from_payload(std::span<const std::uint8_t> bytes) {
  // Head takes 5..8 bytes, so the word count follows from the length.
  if (bytes.size() < 5) throw FormatError("ANS payload too short");
  const std::size_t words = (bytes.size() - 5) / 4;
  const int hb = static_cast<int>(bytes.size() - 4 * words);
  ByteReader in(bytes);
  AnsState st;
  st.head_ = in.get_le(hb);
  if (st.head_ < kAnsLowerBound || head_bytes(st.head_) != hb) {
    throw FormatError("ANS payload head out of range");
  }
  st.tail_.resize(words);
  for (auto& w : st.tail_) w = in.get_u32();
  return st;
}

}  // namespace annzip
