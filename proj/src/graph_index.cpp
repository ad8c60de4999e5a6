#include "annzip/graph_index.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <queue>
#include <random>

#include "annzip/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace annzip {

namespace {

constexpr std::uint8_t kGraphVersion = 1;
constexpr int kUncWidthBytes = 4;

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int thread_id() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

/// Occlusion pruning over candidates sorted by (distance, id).
std::vector<Id> prune(const FloatMatrix& x, const std::vector<Neighbor>& cand, std::uint32_t r) {
  std::vector<Id> kept;
  for (const auto& c : cand) {
    if (kept.size() == r) break;
    bool occluded = false;
    for (Id n : kept) {
      if (l2_sqr(x.row(n), x.row(c.id), x.dim) < c.distance) {
        occluded = true;
        break;
      }
    }
    if (!occluded) kept.push_back(c.id);
  }
  return kept;
}

/// Adds v -> u for each pruned edge u -> v while v has spare degree.
void add_reverse_edges(std::vector<std::vector<Id>>& adj, std::uint32_t r) {
  const std::vector<std::vector<Id>> forward = adj;
  for (Id u = 0; u < forward.size(); ++u)
    for (Id v : forward[u])
      if (adj[v].size() < r && std::find(adj[v].begin(), adj[v].end(), u) == adj[v].end()) adj[v].push_back(u);
}

Id medoid(const FloatMatrix& x) {
  std::vector<double> mean(x.dim, 0.0);
  for (std::uint64_t i = 0; i < x.rows; ++i)
    for (std::uint32_t j = 0; j < x.dim; ++j) mean[j] += x.row(i)[j];
  std::vector<float> m(x.dim);
  for (std::uint32_t j = 0; j < x.dim; ++j) m[j] = static_cast<float>(mean[j] / x.rows);
  return static_cast<Id>(nearest_centroid(x.data.data(), static_cast<std::uint32_t>(x.rows), x.dim, m.data()).first);
}

/// Adds edges until every node is reachable from `entry`. A node that is not
/// reached gets an in-edge from its nearest reached node with spare degree
/// (or, when all are full, replaces that node's farthest friend).
void repair_connectivity(const FloatMatrix& x, std::vector<std::vector<Id>>& adj, Id entry, std::uint32_t r) {
  const std::uint64_t n = x.rows;
  for (int round = 0; round < 64; ++round) {
    std::vector<char> reached(n, 0);
    std::vector<Id> reached_list;
    std::queue<Id> q;
    auto visit = [&](Id s) {
      reached[s] = 1;
      reached_list.push_back(s);
      q.push(s);
      while (!q.empty()) {
        const Id u = q.front();
        q.pop();
        for (Id v : adj[u])
          if (!reached[v]) {
            reached[v] = 1;
            reached_list.push_back(v);
            q.push(v);
          }
      }
    };
    visit(entry);
    if (reached_list.size() == n) return;
    bool replaced = false;
    for (Id u = 0; u < n; ++u) {
      if (reached[u]) continue;
      Id best = 0, best_any = 0;
      float bd = INFINITY, bd_any = INFINITY;
      for (Id s : reached_list) {
        const float d = l2_sqr(x.row(s), x.row(u), x.dim);
        if (d < bd_any || (d == bd_any && s < best_any)) bd_any = d, best_any = s;
        if (adj[s].size() < r && (d < bd || (d == bd && s < best))) bd = d, best = s;
      }
      if (bd < INFINITY) {
        adj[best].push_back(u);
      } else {
        adj[best_any].back() = u;
        replaced = true;
      }
      visit(u);
    }
    if (!replaced) return;
  }
  throw Error("graph connectivity repair did not converge");
}

/// Best-first search with a bounded result beam; friends(i) returns node i's
/// friend list. Every evaluated node is appended to `evaluated` when given.
template <class Friends>
std::vector<Neighbor> beam_search(const FloatMatrix& x, const float* q, Id entry, std::size_t beam,
                                  std::vector<std::uint32_t>& visited, std::uint32_t& epoch, Friends&& friends,
                                  std::vector<Neighbor>* evaluated = nullptr) {
  if (visited.size() != x.rows) {
    visited.assign(x.rows, 0);
    epoch = 0;
  }
  if (++epoch == 0) {
    std::fill(visited.begin(), visited.end(), 0);
    epoch = 1;
  }
  auto greater = [](const Neighbor& a, const Neighbor& b) { return neighbor_less(b, a); };
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(greater)> frontier(greater);
  TopK best(beam);
  const Neighbor start{entry, l2_sqr(q, x.row(entry), x.dim)};
  visited[entry] = epoch;
  best.push(start.distance, entry);
  frontier.push(start);
  if (evaluated) evaluated->push_back(start);
  while (!frontier.empty()) {
    const Neighbor c = frontier.top();
    frontier.pop();
    if (best.full() && neighbor_less(best.worst(), c)) break;
    for (Id f : friends(c.id)) {
      if (visited[f] == epoch) continue;
      visited[f] = epoch;
      const float d = l2_sqr(q, x.row(f), x.dim);
      if (evaluated) evaluated->push_back({f, d});
      if (best.push(d, f)) frontier.push({f, d});
    }
  }
  return best.sorted();
}

}  // namespace

struct GraphIndex::Scratch {
  std::vector<std::uint32_t> visited;
  std::uint32_t epoch = 0;
  std::vector<Id> ids;
  std::unique_ptr<RocCoder> roc;
};

GraphIndex GraphIndex::build(const FloatMatrix& x, const GraphBuildParams& params) {
  const std::uint64_t n = x.rows;
  const std::uint32_t r = params.degree;
  if (r < 2) throw DomainError("graph degree must be at least 2");
  if (n < 2) throw DomainError("graph needs at least two nodes");
  if (n > (std::uint64_t{1} << 32)) throw DomainError("ids are 32-bit");
  const std::uint64_t pool_size = std::min<std::uint64_t>(params.candidates ? params.candidates : 2ull * r, n - 1);

  std::vector<Id> pool;
  if (n > params.brute_force_limit) {
    std::vector<Id> all(n);
    std::iota(all.begin(), all.end(), Id{0});
    std::mt19937_64 rng(params.seed);
    for (std::uint64_t i = 0; i < params.brute_force_limit; ++i) std::swap(all[i], all[i + rng() % (n - i)]);
    pool.assign(all.begin(), all.begin() + params.brute_force_limit);
    std::sort(pool.begin(), pool.end());
  }

  std::vector<std::vector<Id>> adj(n);
  std::vector<std::vector<Neighbor>> knn(n);
  const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < nn; ++i) {
    std::vector<Neighbor> cand;
    auto consider = [&](Id j) {
      if (j != static_cast<Id>(i)) cand.push_back({j, l2_sqr(x.row(i), x.row(j), x.dim)});
    };
    if (pool.empty())
      for (Id j = 0; j < n; ++j) consider(j);
    else
      for (Id j : pool) consider(j);
    const std::size_t c = std::min<std::size_t>(pool_size, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + c, cand.end(), neighbor_less);
    cand.resize(c);
    adj[i] = prune(x, cand, r);
    knn[i] = std::move(cand);
  }

  add_reverse_edges(adj, r);
  const Id entry = medoid(x);
  repair_connectivity(x, adj, entry, r);

  // Second pass: candidates are the kNN pool plus every node evaluated by a
  // search for the node itself on the first-pass graph.
  std::vector<std::vector<Id>> refined(n);
  std::vector<std::vector<std::uint32_t>> visited(thread_count());
  std::vector<std::uint32_t> epochs(thread_count(), 0);
  const std::size_t search_beam = std::max<std::size_t>(pool_size, 2ull * r);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < nn; ++i) {
    const int t = thread_id();
    std::vector<Neighbor> cand = knn[i];
    beam_search(x, x.row(i), entry, search_beam, visited[t], epochs[t],
                [&](Id u) -> const std::vector<Id>& { return adj[u]; }, &cand);
    std::sort(cand.begin(), cand.end(), neighbor_less);
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    std::erase_if(cand, [&](const Neighbor& c) { return c.id == static_cast<Id>(i); });
    refined[i] = prune(x, cand, r);
  }
  adj = std::move(refined);
  add_reverse_edges(adj, r);
  repair_connectivity(x, adj, entry, r);
  return from_adjacency(x, adj, r, entry, params.friend_ids);
}

GraphIndex GraphIndex::from_adjacency(FloatMatrix x, const std::vector<std::vector<Id>>& adj, std::uint32_t degree,
                                      Id entry, IdCodec backend) {
  if (adj.size() != x.rows) throw DomainError("adjacency size does not match vector count");
  if (entry >= x.rows) throw DomainError("entry point out of range");
  GraphIndex g;
  g.vectors_ = std::move(x);
  g.degree_ = degree;
  g.entry_ = entry;
  g.backend_ = backend;
  const std::uint64_t n = g.vectors_.rows;
  std::unique_ptr<RocCoder> roc;
  if (backend == IdCodec::kRoc) roc = std::make_unique<RocCoder>(n);
  g.lists_.reserve(n);
  std::vector<Id> list;
  for (std::uint64_t i = 0; i < n; ++i) {
    list = adj[i];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    if (list.size() > degree) throw DomainError("friend list longer than the degree bound");
    for (Id v : list)
      if (v >= n || v == i) throw DomainError("friend id out of range or self-loop");
    g.lists_.push_back(encode_ids(backend, list, n, roc.get(), kUncWidthBytes));
  }
  return g;
}

void GraphIndex::friends(Id i, std::vector<Id>& out, RocCoder* roc) const {
  decode_ids(lists_.at(i), size(), out, roc);
  if (backend_ == IdCodec::kRoc) std::sort(out.begin(), out.end());
}

std::vector<std::vector<Id>> GraphIndex::adjacency() const {
  std::vector<std::vector<Id>> adj(size());
  std::unique_ptr<RocCoder> roc;
  if (backend_ == IdCodec::kRoc) roc = std::make_unique<RocCoder>(size());
  for (std::uint64_t i = 0; i < size(); ++i) friends(static_cast<Id>(i), adj[i], roc.get());
  return adj;
}

GraphIndex GraphIndex::with_friend_backend(IdCodec backend) const {
  return from_adjacency(vectors_, adjacency(), degree_, entry_, backend);
}

std::vector<Neighbor> GraphIndex::search_one(const float* q, std::size_t k, std::size_t beam, Scratch& s) const {
  if (k == 0) throw DomainError("k must be positive");
  if (backend_ == IdCodec::kRoc && !s.roc) s.roc = std::make_unique<RocCoder>(size());
  auto out = beam_search(vectors_, q, entry_, std::max(beam, k), s.visited, s.epoch,
                         [&](Id i) -> const std::vector<Id>& {
                           friends(i, s.ids, s.roc.get());
                           return s.ids;
                         });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<Neighbor> GraphIndex::search(const float* query, std::size_t k, std::size_t beam) const {
  Scratch s;
  return search_one(query, k, beam, s);
}

std::vector<std::vector<Neighbor>> GraphIndex::search(const FloatMatrix& queries, std::size_t k,
                                                      std::size_t beam) const {
  if (queries.dim != vectors_.dim) throw DomainError("query dimension mismatch");
  if (k == 0) throw DomainError("k must be positive");
  std::vector<std::vector<Neighbor>> out(queries.rows);
  std::vector<Scratch> scratch(thread_count());
  const auto nq = static_cast<std::int64_t>(queries.rows);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < nq; ++i) out[i] = search_one(queries.row(i), k, beam, scratch[thread_id()]);
  return out;
}

GraphStats GraphIndex::stats() const {
  GraphStats st;
  st.num_nodes = size();
  st.max_degree = degree_;
  st.backend = backend_;
  st.min_out_degree = degree_;
  double ideal = 0;
  const double log_n = std::log2(static_cast<double>(std::max<std::uint64_t>(size(), 1)));
  for (const auto& b : lists_) {
    st.num_edges += b.n;
    st.id_bits += b.bits;
    st.savings_bits += theoretical_savings(b.n);
    ideal += b.n * log_n;
    st.min_out_degree = std::min<std::uint32_t>(st.min_out_degree, static_cast<std::uint32_t>(b.n));
    st.max_out_degree = std::max<std::uint32_t>(st.max_out_degree, static_cast<std::uint32_t>(b.n));
  }
  st.bits_per_id = st.num_edges == 0 ? 0.0 : static_cast<double>(st.id_bits) / st.num_edges;
  st.overhead_bits = static_cast<double>(st.id_bits) - (ideal - st.savings_bits);
  return st;
}

std::vector<std::uint8_t> GraphIndex::export_rec(VertexModel model) const { return rec_encode(graph(), model); }

GraphIndex GraphIndex::import_rec(std::span<const std::uint8_t> blob) const {
  const DirectedGraph g = rec_decode(blob);
  if (g.num_nodes != size()) throw FormatError("REC graph node count does not match the index");
  return from_adjacency(vectors_, g.adjacency(), degree_, entry_, backend_);
}

Container GraphIndex::to_container(bool offline, VertexModel model) const {
  Container c;
  {
    ByteWriter w;
    w.put_u8(kGraphVersion);
    w.put_u64(size());
    w.put_u32(vectors_.dim);
    w.put_u32(degree_);
    w.put_u32(entry_);
    w.put_u8(static_cast<std::uint8_t>(backend_));
    c.add(Container::tag("GMET"), w.take());
  }
  {
    ByteWriter w;
    w.put_pod_array(std::span<const float>(vectors_.data));
    c.add(Container::tag("VECS"), w.take());
  }
  if (offline) {
    c.add(Container::tag("RECG"), export_rec(model));
  } else {
    ByteWriter w;
    for (const auto& b : lists_) b.serialize(w);
    c.add(Container::tag("FRND"), w.take());
  }
  return c;
}

GraphIndex GraphIndex::from_container(const Container& c) {
  ByteReader meta(c.get(Container::tag("GMET")));
  if (meta.get_u8() != kGraphVersion) throw FormatError("unsupported graph metadata version");
  const std::uint64_t n = meta.get_u64();
  const std::uint32_t dim = meta.get_u32();
  const std::uint32_t degree = meta.get_u32();
  const Id entry = meta.get_u32();
  const std::uint8_t backend = meta.get_u8();
  if (backend > static_cast<std::uint8_t>(IdCodec::kRoc)) throw FormatError("unknown friend-list codec");
  if (n == 0 || dim == 0 || entry >= n) throw FormatError("bad graph metadata");
  const auto vecs = c.get(Container::tag("VECS"));
  if (vecs.size() != n * dim * 4) throw FormatError("vector section size mismatch");
  FloatMatrix x(n, dim);
  ByteReader vr(vecs);
  x.data = vr.get_pod_array<float>(n * dim);

  if (c.has(Container::tag("RECG"))) {
    const DirectedGraph g = rec_decode(c.get(Container::tag("RECG")));
    if (g.num_nodes != n) throw FormatError("REC graph node count does not match metadata");
    return from_adjacency(std::move(x), g.adjacency(), degree, entry, static_cast<IdCodec>(backend));
  }
  GraphIndex g;
  g.vectors_ = std::move(x);
  g.degree_ = degree;
  g.entry_ = entry;
  g.backend_ = static_cast<IdCodec>(backend);
  ByteReader fr(c.get(Container::tag("FRND")));
  g.lists_.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    g.lists_.push_back(CompressedIdBlock::deserialize(fr));
    if (g.lists_.back().codec != g.backend_ || g.lists_.back().n > degree)
      throw FormatError("friend list does not match metadata");
  }
  if (!fr.done()) throw FormatError("trailing bytes in friend-list section");
  return g;
}

}  // namespace annzip
