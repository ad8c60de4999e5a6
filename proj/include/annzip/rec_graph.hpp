#pragma once

// Random Edge Coding for directed graphs, plus a delta/varint baseline.
//
// REC treats the edge list as a set: the encoder repeatedly samples the next
// edge to remove (by decoding a uniform index into the canonical (u, v) order
// of the remaining edges), codes its endpoints, and the decoder undoes this by
// re-encoding each decoded edge's rank. Only |E| and N are stored in the clear.

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "annzip/ans.hpp"
#include "annzip/orderstat.hpp"
#include "annzip/set_codecs.hpp"

namespace annzip {

struct Edge {
  Id u = 0;
  Id v = 0;
  auto operator<=>(const Edge&) const = default;
};

struct DirectedGraph {
  std::uint64_t num_nodes = 0;
  std::vector<Edge> edges;

  static DirectedGraph from_adjacency(const std::vector<std::vector<Id>>& adj);
  /// Out-neighbors per node, ascending.
  std::vector<std::vector<Id>> adjacency() const;
  /// Throws DomainError on self-loops, duplicate edges or endpoints >= num_nodes.
  void validate() const;
};

/// True when both graphs have the same node count and edge set.
bool same_edge_set(const DirectedGraph& a, const DirectedGraph& b);

/// Every node gets `degree` distinct random out-neighbors other than itself.
DirectedGraph random_out_regular_digraph(std::uint64_t num_nodes, std::uint32_t degree, std::uint64_t seed);

enum class VertexModelKind : std::uint8_t { kUniform = 0, kPolya = 1 };

struct VertexModel {
  VertexModelKind kind = VertexModelKind::kUniform;
  double alpha = 1.0;  // POLYA pseudo-count
};

/// Polya urn over [N): mass(v) = scale * count(v) + prior, exact integer masses.
class PolyaVertexModel {
 public:
  static constexpr std::uint64_t kScale = 16;

  PolyaVertexModel(std::uint64_t num_nodes, double alpha);

  std::uint64_t precision() const { return kScale * total_ + prior_ * counts_.size(); }
  SlotRange range(std::uint64_t v) const {
    return {kScale * tree_.prefix(v) + prior_ * v, kScale * counts_[v] + prior_};
  }
  SlotLookup lookup(std::uint64_t slot) const {
    const std::uint64_t v = tree_.search_affine(slot, kScale, prior_);
    return {v, range(v)};
  }

  void add(std::uint64_t v) { update(v, +1); }
  void remove(std::uint64_t v) { update(v, -1); }

 private:
  void update(std::uint64_t v, std::int64_t delta);

  std::uint64_t prior_;
  std::uint64_t total_ = 0;
  std::vector<std::uint32_t> counts_;
  FenwickTree tree_;
};

/// Blob: magic "RECG", version, N (u64), |E| (u64), model kind (u8),
/// alpha (f64, POLYA only), then the ANS state payload.
std::vector<std::uint8_t> rec_encode(const DirectedGraph& g, VertexModel model = {});
DirectedGraph rec_decode(std::span<const std::uint8_t> blob);
/// Size of the coded state inside a blob, excluding the header.
std::uint64_t rec_state_bits(std::span<const std::uint8_t> blob);

/// Ideal REC size under the uniform model: |E| * 2 log2 N - log2 |E|!.
double rec_uniform_ideal_bits(std::uint64_t num_nodes, std::uint64_t num_edges);

/// Baseline: varint N, then per node varint degree and the ascending
/// neighbors as gaps (first gap = v_0, then v_i - v_{i-1} - 1).
std::vector<std::uint8_t> delta_varint_encode(const DirectedGraph& g);
DirectedGraph delta_varint_decode(std::span<const std::uint8_t> bytes);

}  // namespace annzip
