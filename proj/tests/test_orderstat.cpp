#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "annzip/orderstat.hpp"

using namespace annzip;

TEST(OrderStatSet, SmallExample) {
  OrderStatSet s(8);
  for (int v : {1, 4, 6}) s.insert(v);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.rank(4), 1u);
  EXPECT_EQ(s.rank(0), 0u);
  EXPECT_EQ(s.rank(7), 3u);
  EXPECT_EQ(s.select(0), 1u);
  EXPECT_EQ(s.select(2), 6u);
  s.remove(4);
  EXPECT_EQ(s.rank(6), 1u);
}

TEST(OrderStatSet, Errors) {
  OrderStatSet s(8);
  s.insert(3);
  EXPECT_THROW(s.insert(3), LogicError);
  EXPECT_THROW(s.remove(2), LogicError);
  EXPECT_THROW(s.insert(8), DomainError);
  EXPECT_THROW(s.rank(9), DomainError);
  EXPECT_THROW(s.select(1), RangeError);
}

TEST(OrderStatSet, MatchesSortedOracleOnBulkInsert) {
  std::mt19937_64 rng(2);
  const std::uint64_t universe = 1000000;
  OrderStatSet s(universe);
  std::set<std::uint64_t> oracle;
  while (oracle.size() < 10000) {
    const std::uint64_t v = rng() % universe;
    if (oracle.insert(v).second) s.insert(v);
  }
  std::vector<std::uint64_t> sorted(oracle.begin(), oracle.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    ASSERT_EQ(s.rank(sorted[i]), i);
    ASSERT_EQ(s.select(i), sorted[i]);
  }
}

TEST(OrderStatSet, RandomInterleavedWorkload) {
  std::mt19937_64 rng(4);
  const std::uint64_t universe = 1 << 16;
  OrderStatSet s(universe);
  std::vector<std::uint64_t> oracle;  // kept sorted
  for (int op = 0; op < 100000; ++op) {
    const std::uint64_t v = rng() % universe;
    auto it = std::lower_bound(oracle.begin(), oracle.end(), v);
    const bool present = it != oracle.end() && *it == v;
    switch (rng() % 4) {
      case 0:
        if (!present) {
          s.insert(v);
          oracle.insert(it, v);
        }
        break;
      case 1:
        if (present) {
          s.remove(v);
          oracle.erase(it);
        }
        break;
      case 2:
        ASSERT_EQ(s.rank(v), static_cast<std::uint64_t>(it - oracle.begin()));
        break;
      default:
        if (!oracle.empty()) {
          const std::uint64_t j = rng() % oracle.size();
          ASSERT_EQ(s.select(j), oracle[j]);
        }
    }
    ASSERT_EQ(s.size(), oracle.size());
  }
}

TEST(FenwickTree, SearchAffineInvertsCumulative) {
  std::mt19937_64 rng(6);
  const std::uint64_t n = 300;
  FenwickTree t(n);
  std::vector<std::uint64_t> counts(n, 0);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t v = rng() % n;
    counts[v]++;
    t.add(v, 1);
  }
  const std::uint64_t scale = 16;
  const std::uint64_t offset = 3;
  std::uint64_t cum = 0;
  for (std::uint64_t v = 0; v < n; ++v) {
    const std::uint64_t mass = scale * counts[v] + offset;
    EXPECT_EQ(t.search_affine(cum, scale, offset), v);
    EXPECT_EQ(t.search_affine(cum + mass - 1, scale, offset), v);
    cum += mass;
  }
}
