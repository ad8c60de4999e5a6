#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "annzip/ans.hpp"

using namespace annzip;

namespace {

QuantizedPmf abc_model() {
  const std::vector<std::uint64_t> m = {2, 1, 1};
  return QuantizedPmf(m);
}

// s -> r*floor(s/p) + c + s mod p, straight from the definition.
std::uint64_t reference_encode(std::uint64_t s, std::uint64_t p, std::uint64_t c, std::uint64_t r) {
  return r * (s / p) + c + s % p;
}

}  // namespace

TEST(AnsStep, WorkedExample) {
  const auto m = abc_model();
  EXPECT_EQ(ans_encode_step(5, 0, m), 9u);
  EXPECT_EQ(ans_encode_step(5, 1, m), 22u);
  EXPECT_EQ(ans_decode_step(9, m), std::make_pair(std::uint64_t{0}, std::uint64_t{5}));
  EXPECT_EQ(ans_decode_step(22, m), std::make_pair(std::uint64_t{1}, std::uint64_t{5}));
}

TEST(AnsStep, MatchesReferenceMapAndInverts) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10000; ++t) {
    std::vector<std::uint64_t> masses(1 + rng() % 20);
    for (auto& m : masses) m = 1 + rng() % 50;
    QuantizedPmf pmf(masses);
    const std::uint64_t x = rng() % masses.size();
    const std::uint64_t s = rng() % (1ull << 40);
    const std::uint64_t e = ans_encode_step(s, x, pmf);
    EXPECT_EQ(e, reference_encode(s, pmf.mass(x), pmf.cumulative(x), pmf.precision()));
    EXPECT_EQ(ans_decode_step(e, pmf), std::make_pair(x, s));
  }
}

TEST(AnsState, ZeroMassSymbolRejected) {
  const std::vector<std::uint64_t> masses = {3, 0, 1};
  QuantizedPmf pmf(masses);
  AnsState st;
  EXPECT_THROW(st.encode(1, pmf), ModelCoverageError);
  EXPECT_THROW(st.encode(3, pmf), ModelCoverageError);
}

TEST(AnsState, DeterministicSymbolIsFree) {
  const std::vector<std::uint64_t> masses = {7};
  QuantizedPmf pmf(masses);
  AnsState st = AnsState::initial(3);
  const AnsState before = st;
  st.encode(0, pmf);
  EXPECT_EQ(st, before);
  EXPECT_EQ(st.decode(pmf), 0u);
  EXPECT_EQ(st, before);
}

TEST(AnsState, LifoRoundtripMixedModels) {
  std::mt19937_64 rng(7);
  std::vector<QuantizedPmf> models;
  for (int k = 0; k < 16; ++k) {
    std::vector<std::uint64_t> masses(2 + rng() % 300);
    for (auto& m : masses) m = rng() % 4 == 0 ? 0 : 1 + rng() % 1000;
    masses[0] = 1;
    models.emplace_back(masses);
  }
  struct Op { int model; std::uint64_t x; };
  std::vector<Op> ops;
  AnsState st = AnsState::initial(0);
  const AnsState start = st;
  for (int i = 0; i < 20000; ++i) {
    const int k = static_cast<int>(rng() % models.size());
    std::uint64_t x;
    do { x = rng() % models[k].size(); } while (models[k].mass(x) == 0);
    st.encode(x, models[k]);
    ops.push_back({k, x});
  }
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    ASSERT_EQ(st.decode(models[it->model]), it->x);
  }
  EXPECT_EQ(st, start);
}

TEST(AnsState, UniformBijectionAllBounds) {
  std::mt19937_64 rng(11);
  for (std::uint64_t n = 1; n <= (1u << 16); ++n) {
    AnsState st = AnsState::initial(rng());
    st.encode_uniform(rng() % 1000, 1000);
    const AnsState before = st;
    const std::uint64_t j = st.decode_uniform(n);
    ASSERT_LT(j, n);
    st.encode_uniform(j, n);
    ASSERT_EQ(st, before) << "n=" << n;
  }
}

TEST(AnsState, UniformDomainErrors) {
  AnsState st = AnsState::initial(0);
  EXPECT_THROW(st.decode_uniform(0), DomainError);
  EXPECT_THROW(st.encode_uniform(5, 5), DomainError);
  EXPECT_THROW(st.encode_uniform(0, 0), DomainError);
  const AnsState before = st;
  EXPECT_EQ(st.decode_uniform(1), 0u);
  EXPECT_EQ(st, before);
}

TEST(AnsState, DecodeUniformIsUniform) {
  std::mt19937_64 rng(5);
  AnsState st = AnsState::initial(0);
  for (int i = 0; i < 70000; ++i) st.encode_uniform(rng() & 0xffff, 1 << 16);
  std::vector<double> counts(1024, 0.0);
  const int calls = 100000;
  for (int i = 0; i < calls; ++i) counts[st.decode_uniform(1024)] += 1;
  double chi2 = 0;
  const double expect = calls / 1024.0;
  for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
  // 1023 dof: the p = 0.001 critical value is about 1168.
  EXPECT_LT(chi2, 1168.0);
}

TEST(AnsState, TruncatedStream) {
  AnsState st;
  EXPECT_THROW(
      {
        for (int i = 0; i < 100; ++i) st.decode_uniform(1000);
      },
      TruncatedStreamError);
}

TEST(AnsState, InitialStateProperties) {
  const AnsState a = AnsState::initial(0);
  const AnsState b = AnsState::initial(0);
  EXPECT_EQ(a.flush(), b.flush());
  EXPECT_LE(a.bit_count(), 64u);
  EXPECT_EQ(AnsState::unflush(a.flush()), a);
  EXPECT_TRUE(a.tail().empty());
  EXPECT_NE(AnsState::initial(1).head(), a.head());
}

TEST(AnsState, FlushRoundtripAndLength) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 1000; ++t) {
    AnsState st = AnsState::initial(rng());
    const int n = static_cast<int>(rng() % 200);
    for (int i = 0; i < n; ++i) st.encode_uniform(rng() % 1000003, 1000003);
    const auto bytes = st.flush();
    EXPECT_EQ(bytes.size(), 13 + (st.bit_count() + 7) / 8);
    EXPECT_EQ(AnsState::unflush(bytes), st);
    const auto payload = st.to_payload();
    EXPECT_EQ(AnsState::from_payload(payload), st);
  }
}

TEST(AnsState, MalformedStreams) {
  auto bytes = AnsState::initial(0).flush();
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(AnsState::unflush(bad), FormatError);
  bad = bytes;
  bad[5] += 32;  // bit length no longer matches the byte count
  EXPECT_THROW(AnsState::unflush(bad), FormatError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(AnsState::unflush(bad), FormatError);
  EXPECT_THROW(AnsState::unflush(std::vector<std::uint8_t>(4, 0)), FormatError);
}

TEST(AnsState, RateMatchesInformationContent) {
  const std::vector<std::uint64_t> masses = {1000, 500, 250, 125, 60, 40, 20, 5};
  QuantizedPmf pmf(masses);
  std::vector<double> cdf;
  for (auto m : masses) cdf.push_back(static_cast<double>(m));
  std::mt19937_64 rng(9);
  std::discrete_distribution<int> draw(cdf.begin(), cdf.end());
  AnsState st;
  const std::uint64_t start = st.bit_count();
  double ideal = 0;
  for (int i = 0; i < 100000; ++i) {
    const int x = draw(rng);
    ideal -= std::log2(static_cast<double>(masses[x]) / pmf.precision());
    st.encode(x, pmf);
  }
  const double used = static_cast<double>(st.bit_count() - start);
  EXPECT_LE(used, ideal * 1.001 + 64);
  EXPECT_GE(used, ideal - 64);
}

TEST(AnsState, RateUniformNonPowerOfTwo) {
  std::mt19937_64 rng(13);
  const std::uint64_t n = 1000000;
  AnsState st;
  for (int i = 0; i < 100000; ++i) st.encode_uniform(rng() % n, n);
  const double ideal = 100000 * std::log2(static_cast<double>(n));
  EXPECT_LE(st.bit_count(), ideal * 1.001 + 64);
}
