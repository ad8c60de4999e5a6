#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "annzip/set_codecs.hpp"

using namespace annzip;

namespace {

std::vector<Id> random_set(std::uint64_t n, std::uint64_t universe, std::mt19937_64& rng) {
  std::set<Id> s;
  while (s.size() < n) s.insert(static_cast<Id>(rng() % universe));
  std::vector<Id> v(s.begin(), s.end());
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

std::vector<Id> sorted(std::vector<Id> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Bit-by-bit Elias-Fano construction used as an independent reference.
std::vector<bool> ef_reference(std::vector<Id> ids, std::uint64_t universe) {
  std::sort(ids.begin(), ids.end());
  const std::uint64_t n = ids.size();
  int l = 0;
  while (n > 0 && (std::uint64_t{1} << (l + 1)) * n <= universe) ++l;
  std::vector<bool> bits;
  for (Id v : ids)
    for (int b = 0; b < l; ++b) bits.push_back((v >> b) & 1);
  std::uint64_t prev_high = 0;
  for (Id v : ids) {
    const std::uint64_t high = v >> l;
    for (std::uint64_t g = prev_high; g < high; ++g) bits.push_back(false);
    bits.push_back(true);
    prev_high = high;
  }
  return bits;
}

double log2_factorial(std::uint64_t n) { return std::lgamma(static_cast<double>(n) + 1) / std::log(2.0); }

}  // namespace

TEST(Compact, Sizes) {
  std::mt19937_64 rng(1);
  const auto ids = random_set(1000, 1000000, rng);
  const auto b = compact_encode(ids, 1000000);
  EXPECT_EQ(b.bits, 20000u);
  EXPECT_EQ(compact_decode(b, 1000000), ids);
  const std::vector<Id> two = {0, 1};
  EXPECT_EQ(compact_encode(two, 2).bits, 2u);
  for (std::uint64_t i = 0; i < ids.size(); ++i) EXPECT_EQ(compact_access(b, 1000000, i), ids[i]);
}

TEST(Compact, OutOfUniverse) {
  const std::vector<Id> ids = {3, 10};
  EXPECT_THROW(compact_encode(ids, 10), DomainError);
  EXPECT_THROW(ef_encode(ids, 10), DomainError);
  EXPECT_THROW(roc_encode(ids, 10), DomainError);
}

TEST(EliasFano, SmallExamples) {
  const std::vector<Id> ids = {0, 1, 2, 3};
  const auto b = ef_encode(ids, 4);
  EXPECT_EQ(ef_low_width(4, 4), 0);
  // All highs are the values themselves: ones at 0,2,4,6.
  EXPECT_EQ(b.bits, 7u);
  EXPECT_EQ(ef_decode(b, 4), ids);
  const auto ref = ef_reference(ids, 4);
  EXPECT_EQ(ref.size(), b.bits);

  const std::vector<Id> single = {777777};
  const auto s = ef_encode(single, 1000000);
  EXPECT_LE(s.bits, 20u + 2u);
  EXPECT_EQ(ef_decode(s, 1000000), single);

  EXPECT_EQ(ef_encode(std::vector<Id>{}, 100).bits, 0u);
  EXPECT_TRUE(ef_encode(std::vector<Id>{}, 100).payload.empty());
}

TEST(EliasFano, MatchesBitReference) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const std::uint64_t universe = 1 + rng() % 100000;
    const std::uint64_t n = rng() % std::min<std::uint64_t>(universe, 3000);
    const auto ids = random_set(n, universe, rng);
    const auto b = ef_encode(ids, universe);
    const auto ref = ef_reference(ids, universe);
    ASSERT_EQ(b.bits, ref.size());
    for (std::uint64_t i = 0; i < ref.size(); ++i) {
      ASSERT_EQ(static_cast<bool>((b.payload[i / 8] >> (i % 8)) & 1), ref[i]) << i;
    }
    ASSERT_EQ(ef_decode(b, universe), sorted(ids));
    // floor low width: high parts stay below 2n, so the upper stream is under 3n bits.
    EXPECT_LT(b.bits - n * ef_low_width(n, universe), 3 * n + 1);
  }
}

TEST(EliasFano, ViewAccess) {
  const std::vector<Id> ids = {7, 3, 5, 2};
  const auto b = ef_encode(ids, 16);
  EfView view(b, 16);
  EXPECT_EQ(view.access(2), 5u);
  EXPECT_EQ(view.access(0), 2u);
  EXPECT_THROW(view.access(4), RangeError);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto r = random_set(1 + rng() % 5000, 1000000, rng);
    const auto blk = ef_encode(r, 1000000);
    const auto full = ef_decode(blk, 1000000);
    EfView v(blk, 1000000);
    for (std::uint64_t i = 0; i < full.size(); ++i) ASSERT_EQ(v.access(i), full[i]);
  }
}

TEST(EliasFano, RateAtOneThousand) {
  std::mt19937_64 rng(4);
  double total = 0;
  for (int t = 0; t < 20; ++t) total += ef_encode(random_set(1000, 1000000, rng), 1000000).bits;
  const double bpi = total / 20 / 1000;
  EXPECT_GE(bpi, 11.6);
  EXPECT_LE(bpi, 12.2);
}

TEST(Roc, ExhaustiveTinyUniverse) {
  int sets = 0;
  for (Id a = 0; a < 4; ++a) {
    for (Id b = a + 1; b < 4; ++b) {
      const std::vector<Id> ids = {a, b};
      const auto blk = roc_encode(ids, 4);
      EXPECT_EQ(sorted(roc_decode(blk, 4)), ids);
      ++sets;
    }
  }
  EXPECT_EQ(sets, 6);
}

TEST(Roc, EmptyAndSingleton) {
  const auto empty = roc_encode(std::vector<Id>{}, 1000);
  EXPECT_EQ(empty.payload, AnsState::initial(0).to_payload());
  EXPECT_TRUE(roc_decode(empty, 1000).empty());

  const std::vector<Id> one = {123456};
  const auto blk = roc_encode(one, 1000000);
  EXPECT_EQ(roc_decode(blk, 1000000), one);
  // 64 initial bits plus log2(10^6), no ordering saving.
  EXPECT_LE(blk.bits, 64u + 20u + 1u);
}

TEST(Roc, RoundtripRandomSizes) {
  std::mt19937_64 rng(5);
  RocCoder coder(1000000);
  std::vector<Id> out;
  for (int t = 0; t < 1000; ++t) {
    const std::uint64_t n = 1 + rng() % 4096;
    const auto ids = random_set(n, 1000000, rng);
    const auto blk = coder.encode(ids);
    coder.decode(blk, out);
    ASSERT_EQ(sorted(out), sorted(ids));
  }
}

TEST(Roc, OrderInvariantPayload) {
  std::mt19937_64 rng(6);
  auto ids = random_set(500, 100000, rng);
  const auto a = roc_encode(ids, 100000);
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto b = roc_encode(ids, 100000);
  EXPECT_EQ(a.payload, b.payload);
  EXPECT_EQ(ef_encode(ids, 100000).payload, ef_encode(sorted(ids), 100000).payload);
}

TEST(Roc, RateNearIdeal) {
  std::mt19937_64 rng(7);
  const std::uint64_t universe = 1000000;
  for (std::uint64_t n : {64, 1000, 4096, 20000}) {
    const auto ids = random_set(n, universe, rng);
    const auto blk = roc_encode(ids, universe);
    const double ideal = n * std::log2(static_cast<double>(universe)) - log2_factorial(n);
    EXPECT_GE(blk.bits, ideal);
    EXPECT_LE(blk.bits, ideal + 80 + 1e-3 * n) << n;
  }
}

TEST(Roc, BitsPerIdAndGapToEf) {
  std::mt19937_64 rng(8);
  double roc = 0, ef = 0;
  for (int t = 0; t < 20; ++t) {
    const auto ids = random_set(1000, 1000000, rng);
    roc += roc_encode(ids, 1000000).bits;
    ef += ef_encode(ids, 1000000).bits;
  }
  roc /= 20000;
  ef /= 20000;
  EXPECT_GE(roc, 11.3);
  EXPECT_LE(roc, 11.6);
  EXPECT_GE(ef - roc, 0.3);
  EXPECT_LE(ef - roc, 0.8);
}

TEST(Roc, DuplicatesRejectedAndScratchClean) {
  RocCoder coder(100);
  const std::vector<Id> dup = {4, 9, 4};
  EXPECT_THROW(coder.encode(dup), LogicError);
  const std::vector<Id> ok = {4, 9};
  EXPECT_EQ(sorted(coder.decode(coder.encode(ok))), ok);
}

TEST(Roc, CorruptionDetected) {
  std::mt19937_64 rng(9);
  const auto ids = random_set(300, 50000, rng);
  auto blk = roc_encode(ids, 50000);
  blk.payload[blk.payload.size() / 2] ^= 0x10;
  EXPECT_THROW(roc_decode(blk, 50000), Error);
  blk = roc_encode(ids, 50000);
  blk.n += 1;
  EXPECT_THROW(roc_decode(blk, 50000), Error);
}

TEST(SetCodecs, TheoreticalSavings) {
  EXPECT_DOUBLE_EQ(theoretical_savings(1), 0.0);
  EXPECT_DOUBLE_EQ(theoretical_savings(2), 1.0);
  EXPECT_NEAR(theoretical_savings(1000), log2_factorial(1000), 1e-6);
  EXPECT_NEAR(theoretical_savings(1000), 8529.4, 0.1);
}

TEST(SetCodecs, FuzzedRoundtripAllCodecs) {
  std::mt19937_64 rng(10);
  RocCoder roc(70000);
  std::vector<Id> out;
  for (int t = 0; t < 60; ++t) {
    const std::uint64_t n = t == 0 ? 0 : (t == 1 ? (1u << 16) : rng() % 3000);
    const auto ids = random_set(n, 70000, rng);
    for (IdCodec c : {IdCodec::kUnc, IdCodec::kCompact, IdCodec::kEf, IdCodec::kRoc}) {
      const auto blk = encode_ids(c, ids, 70000, &roc);
      ByteWriter w;
      blk.serialize(w);
      const auto bytes = w.take();
      ByteReader r(bytes);
      const auto back = CompressedIdBlock::deserialize(r);
      decode_ids(back, 70000, out, &roc);
      ASSERT_EQ(sorted(out), sorted(ids)) << to_string(c);
    }
  }
}

TEST(SetCodecs, ParseNames) {
  for (IdCodec c : {IdCodec::kUnc, IdCodec::kCompact, IdCodec::kEf, IdCodec::kRoc}) {
    EXPECT_EQ(parse_id_codec(to_string(c)), c);
  }
  EXPECT_THROW(parse_id_codec("zip"), DomainError);
}
