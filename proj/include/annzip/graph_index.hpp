#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "annzip/container.hpp"
#include "annzip/quantizer.hpp"
#include "annzip/rec_graph.hpp"
#include "annzip/set_codecs.hpp"
#include "annzip/topk.hpp"

namespace annzip {

struct GraphBuildParams {
  std::uint32_t degree = 32;  // R, max out-degree
  /// kNN candidate pool per node before pruning (0 = 2R).
  std::uint32_t candidates = 0;
  /// Above this many nodes, candidates come from a random sample of this size.
  std::uint64_t brute_force_limit = 100000;
  IdCodec friend_ids = IdCodec::kRoc;
  std::uint64_t seed = 0;
};

struct GraphStats {
  std::uint64_t num_nodes = 0;
  std::uint64_t num_edges = 0;
  std::uint32_t max_degree = 0;
  std::uint32_t min_out_degree = 0;
  std::uint32_t max_out_degree = 0;
  IdCodec backend = IdCodec::kUnc;
  std::uint64_t id_bits = 0;
  double bits_per_id = 0;     // per stored friend id
  double savings_bits = 0;    // sum over nodes of log2(m_i!)
  double overhead_bits = 0;   // id_bits - (sum m_i log2 N - savings)
};

class GraphIndex {
 public:
  GraphIndex() = default;

  /// Exact (or sampled) kNN candidates, occlusion pruning, reverse edges while
  /// degree allows, and edges from the reachable set until every node is
  /// reachable from the medoid. A second pass re-prunes each node over its kNN
  /// pool plus the nodes a search for it visits on the first graph.
  static GraphIndex build(const FloatMatrix& x, const GraphBuildParams& params);
  /// Index over a given adjacency (friend lists are deduplicated and sorted).
  static GraphIndex from_adjacency(FloatMatrix x, const std::vector<std::vector<Id>>& adj, std::uint32_t degree,
                                   Id entry, IdCodec backend);

  std::uint64_t size() const { return vectors_.rows; }
  std::uint32_t degree() const { return degree_; }
  Id entry() const { return entry_; }
  IdCodec backend() const { return backend_; }
  const FloatMatrix& vectors() const { return vectors_; }

  /// Ascending friend list of node i.
  void friends(Id i, std::vector<Id>& out, RocCoder* roc = nullptr) const;
  std::vector<std::vector<Id>> adjacency() const;
  DirectedGraph graph() const { return DirectedGraph::from_adjacency(adjacency()); }

  GraphIndex with_friend_backend(IdCodec backend) const;

  /// Best-first beam search from the entry point; beam is raised to k if smaller.
  std::vector<Neighbor> search(const float* query, std::size_t k, std::size_t beam) const;
  std::vector<std::vector<Neighbor>> search(const FloatMatrix& queries, std::size_t k, std::size_t beam) const;

  GraphStats stats() const;

  /// Whole-graph REC blob of the friend lists.
  std::vector<std::uint8_t> export_rec(VertexModel model = {}) const;
  /// Same vectors and entry point, friend lists taken from a REC blob.
  GraphIndex import_rec(std::span<const std::uint8_t> blob) const;

  /// Sections GMET, VECS and either FRND (per-list blocks) or RECG (offline).
  Container to_container(bool offline = false, VertexModel model = {}) const;
  static GraphIndex from_container(const Container& c);

 private:
  struct Scratch;
  std::vector<Neighbor> search_one(const float* q, std::size_t k, std::size_t beam, Scratch& s) const;

  FloatMatrix vectors_;
  std::uint32_t degree_ = 0;
  Id entry_ = 0;
  IdCodec backend_ = IdCodec::kUnc;
  std::vector<CompressedIdBlock> lists_;
};

}  // namespace annzip
