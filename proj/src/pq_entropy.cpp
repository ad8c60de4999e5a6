#include "annzip/pq_entropy.hpp"

#include <cmath>

namespace annzip {

namespace {

constexpr std::uint64_t kStartBits = 33;  // bit width of the default start state

}  // namespace

double AdaptiveSymbolModel::cost_bits(std::uint64_t x) const {
  return std::log2(static_cast<double>(precision()) / static_cast<double>(range(x).freq));
}

EncodedColumn column_encode(std::span<const std::uint16_t> column, std::uint32_t alphabet) {
  AdaptiveSymbolModel model(alphabet);
  for (std::uint16_t x : column) {
    if (x >= alphabet) throw DomainError("code entry outside alphabet");
    model.add(x);
  }
  AnsState st;
  for (std::size_t i = column.size(); i-- > 0;) {
    model.remove(column[i]);
    st.encode(column[i], model);
  }
  return {st.bit_count() - kStartBits, st.to_payload()};
}

std::vector<std::uint16_t> column_decode(std::span<const std::uint8_t> payload, std::uint64_t n,
                                         std::uint32_t alphabet) {
  AdaptiveSymbolModel model(alphabet);
  AnsState st = AnsState::from_payload(payload);
  std::vector<std::uint16_t> out(n);
  try {
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto x = static_cast<std::uint16_t>(st.decode(model));
      model.add(x);
      out[i] = x;
    }
  } catch (const TruncatedStreamError&) {
    throw CorruptionError("code column holds fewer entries than requested");
  }
  if (!(st == AnsState())) throw CorruptionError("code column did not decode to the start state");
  return out;
}

double column_model_bits(std::span<const std::uint16_t> column, std::uint32_t alphabet) {
  std::vector<std::uint64_t> counts(alphabet, 0);
  double bits = 0;
  for (std::size_t i = 0; i < column.size(); ++i) {
    const std::uint16_t x = column[i];
    bits += std::log2(static_cast<double>(alphabet + i) / static_cast<double>(counts[x] + 1));
    counts[x]++;
  }
  return bits;
}

std::uint64_t ClusterCodeBlock::bits() const {
  std::uint64_t b = 0;
  for (const auto& c : columns) b += c.bits;
  return b;
}

void ClusterCodeBlock::serialize(ByteWriter& out) const {
  out.put_varint(n);
  for (const auto& c : columns) {
    out.put_varint(c.bits);
    out.put_blob(c.payload);
  }
}

ClusterCodeBlock ClusterCodeBlock::deserialize(ByteReader& in, std::uint32_t m) {
  ClusterCodeBlock b;
  b.n = in.get_varint();
  b.columns.resize(m);
  for (auto& c : b.columns) {
    c.bits = in.get_varint();
    const auto p = in.get_blob();
    c.payload.assign(p.begin(), p.end());
  }
  return b;
}

ClusterCodeBlock cluster_codes_encode(std::span<const std::uint16_t> codes, std::uint64_t n,
                                      std::uint32_t m, std::uint32_t alphabet) {
  if (codes.size() != n * m) throw DomainError("code matrix shape mismatch");
  ClusterCodeBlock b;
  b.n = n;
  b.columns.resize(m);
  std::vector<std::uint16_t> col(n);
  for (std::uint32_t j = 0; j < m; ++j) {
    for (std::uint64_t i = 0; i < n; ++i) col[i] = codes[i * m + j];
    b.columns[j] = column_encode(col, alphabet);
  }
  return b;
}

void cluster_codes_decode(const ClusterCodeBlock& block, std::uint32_t m, std::uint32_t alphabet,
                          std::vector<std::uint16_t>& out) {
  if (block.columns.size() != m) throw FormatError("code block column count mismatch");
  out.resize(block.n * m);
  for (std::uint32_t j = 0; j < m; ++j) {
    const auto col = column_decode(block.columns[j].payload, block.n, alphabet);
    for (std::uint64_t i = 0; i < block.n; ++i) out[i * m + j] = col[i];
  }
}

}  // namespace annzip
