#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <queue>

#include "annzip/dataset.hpp"
#include "annzip/graph_index.hpp"

using namespace annzip;

namespace {

FloatMatrix grid_10x10() {
  FloatMatrix x(100, 2);
  for (int i = 0; i < 100; ++i) {
    x.row(i)[0] = static_cast<float>(i % 10);
    x.row(i)[1] = static_cast<float>(i / 10);
  }
  return x;
}

std::uint64_t reachable_from(const std::vector<std::vector<Id>>& adj, Id s) {
  std::vector<char> seen(adj.size(), 0);
  std::queue<Id> q;
  q.push(s);
  seen[s] = 1;
  std::uint64_t count = 1;
  while (!q.empty()) {
    const Id u = q.front();
    q.pop();
    for (Id v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push(v);
      }
  }
  return count;
}

Neighbor true_nearest(const FloatMatrix& x, const float* q) {
  Neighbor best{0, INFINITY};
  for (std::uint64_t i = 0; i < x.rows; ++i) {
    float d = 0;
    for (std::uint32_t j = 0; j < x.dim; ++j) d += (q[j] - x.row(i)[j]) * (q[j] - x.row(i)[j]);
    if (d < best.distance || (d == best.distance && i < best.id)) best = {static_cast<Id>(i), d};
  }
  return best;
}

const SyntheticData& data() {
  static const SyntheticData d = gen_synthetic({3000, 12, 20, 0.1f, 21});
  return d;
}

}  // namespace

TEST(GraphIndex, GridReachableAndDegreeBounded) {
  const auto g = GraphIndex::build(grid_10x10(), {8, 0, 100000, IdCodec::kEf, 1});
  const auto adj = g.adjacency();
  EXPECT_EQ(reachable_from(adj, g.entry()), 100u);
  for (std::size_t i = 0; i < adj.size(); ++i) {
    EXPECT_LE(adj[i].size(), 8u);
    EXPECT_TRUE(std::is_sorted(adj[i].begin(), adj[i].end()));
    EXPECT_EQ(std::count(adj[i].begin(), adj[i].end(), static_cast<Id>(i)), 0);
  }
}

TEST(GraphIndex, DeterministicAndRejectsSmallDegree) {
  const auto a = GraphIndex::build(data().vectors, {16, 0, 100000, IdCodec::kRoc, 3});
  const auto b = GraphIndex::build(data().vectors, {16, 0, 100000, IdCodec::kRoc, 3});
  EXPECT_EQ(a.adjacency(), b.adjacency());
  EXPECT_EQ(a.entry(), b.entry());
  EXPECT_THROW(GraphIndex::build(data().vectors, {1, 0, 100000, IdCodec::kRoc, 3}), DomainError);
}

TEST(GraphIndex, SampledCandidatesStillConnected) {
  const auto g = GraphIndex::build(data().vectors, {12, 0, 500, IdCodec::kCompact, 4});
  EXPECT_EQ(reachable_from(g.adjacency(), g.entry()), 3000u);
}

TEST(GraphIndex, FullBeamFindsTrueNearest) {
  const auto& d = data();
  const auto g = GraphIndex::build(d.vectors, {12, 0, 100000, IdCodec::kRoc, 5});
  const auto q = gen_synthetic({50, 12, 20, 0.1f, 22}).vectors;
  for (std::uint64_t i = 0; i < q.rows; ++i) {
    const auto res = g.search(q.row(i), 1, d.vectors.rows);
    EXPECT_EQ(res[0], true_nearest(d.vectors, q.row(i)));
  }
  const auto self = g.search(d.vectors.row(1234), 1, 32);
  EXPECT_EQ(self[0].id, 1234u);
  EXPECT_EQ(self[0].distance, 0.0f);
}

TEST(GraphIndex, FriendBackendsGiveIdenticalResults) {
  const auto& d = data();
  const auto base = GraphIndex::build(d.vectors, {16, 0, 100000, IdCodec::kUnc, 6});
  const auto q = gen_synthetic({200, 12, 20, 0.1f, 23}).vectors;
  const auto ref = base.search(q, 10, 16);
  for (auto c : {IdCodec::kCompact, IdCodec::kEf, IdCodec::kRoc}) {
    const auto g = base.with_friend_backend(c);
    EXPECT_EQ(g.adjacency(), base.adjacency());
    EXPECT_EQ(g.search(q, 10, 16), ref) << to_string(c);
  }
}

TEST(GraphIndex, RecExportImportAndContainer) {
  const auto& d = data();
  const auto g = GraphIndex::build(d.vectors, {16, 0, 100000, IdCodec::kRoc, 7});
  const auto q = gen_synthetic({100, 12, 20, 0.1f, 24}).vectors;
  const auto ref = g.search(q, 5, 20);
  const auto blob = g.export_rec();
  const auto back = g.import_rec(blob);
  EXPECT_TRUE(same_edge_set(back.graph(), g.graph()));
  EXPECT_EQ(back.search(q, 5, 20), ref);
  for (bool offline : {false, true}) {
    const auto bytes = g.to_container(offline).to_bytes();
    const auto loaded = GraphIndex::from_container(Container::from_bytes(bytes));
    EXPECT_EQ(loaded.adjacency(), g.adjacency());
    EXPECT_EQ(loaded.search(q, 5, 20), ref);
  }
}

TEST(GraphIndex, StatsMatchAccountingOracle) {
  const auto& d = data();
  const auto g = GraphIndex::build(d.vectors, {16, 0, 100000, IdCodec::kRoc, 8});
  const auto st = g.stats();
  const auto adj = g.adjacency();
  double savings = 0;
  std::uint64_t edges = 0;
  for (const auto& l : adj) {
    edges += l.size();
    for (std::size_t i = 2; i <= l.size(); ++i) savings += std::log2(static_cast<double>(i));
  }
  EXPECT_EQ(st.num_edges, edges);
  EXPECT_NEAR(st.savings_bits, savings, 1e-6 * savings);
  EXPECT_LE(st.max_out_degree, 16u);
  // Per-list overhead is at most 80 bits plus a small per-id term.
  EXPECT_LE(st.overhead_bits, 80.0 * st.num_nodes + 1e-3 * edges);
  EXPECT_EQ(g.with_friend_backend(IdCodec::kUnc).stats().bits_per_id, 32.0);
  EXPECT_EQ(g.with_friend_backend(IdCodec::kCompact).stats().bits_per_id, 12.0);
}

TEST(GraphIndex, TheoreticalSavingAtDegree64) {
  EXPECT_NEAR(theoretical_savings(64) / 64, 4.63, 0.01);
}
