#include "annzip/rec_graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <variant>

namespace annzip {

namespace {

constexpr char kRecMagic[5] = "RECG";
constexpr std::uint8_t kRecVersion = 1;

struct RecHeader {
  std::uint64_t num_nodes = 0;
  std::uint64_t num_edges = 0;
  VertexModel model;
  std::size_t payload_offset = 0;
};

RecHeader read_header(std::span<const std::uint8_t> blob) {
  ByteReader in(blob);
  if (!in.get_tag(kRecMagic)) throw FormatError("bad REC magic");
  if (in.get_u8() != kRecVersion) throw FormatError("unsupported REC version");
  RecHeader h;
  h.num_nodes = in.get_u64();
  h.num_edges = in.get_u64();
  const std::uint8_t kind = in.get_u8();
  if (kind > 1) throw FormatError("unknown REC vertex model");
  h.model.kind = static_cast<VertexModelKind>(kind);
  if (h.model.kind == VertexModelKind::kPolya) h.model.alpha = in.get_f64();
  h.payload_offset = in.position();
  return h;
}

// Out-lists that support removal/insertion at a rank; degrees are small for
// ANN graphs, so a sorted vector per source is enough.
class EdgeOrder {
 public:
  explicit EdgeOrder(std::uint64_t n) : lists_(n), degree_(n) {}

  std::uint64_t size() const { return size_; }

  void insert_sorted_lists(std::vector<std::vector<Id>> lists) {
    lists_ = std::move(lists);
    for (std::uint64_t u = 0; u < lists_.size(); ++u) {
      degree_.add(u, static_cast<std::int64_t>(lists_[u].size()));
      size_ += lists_[u].size();
    }
  }

  /// Removes and returns the j-th edge in (u, v) order.
  Edge take(std::uint64_t j) {
    const std::uint64_t u = degree_.select(j);
    auto& list = lists_[u];
    const std::uint64_t at = j - degree_.prefix(u);
    const Edge e{static_cast<Id>(u), list[at]};
    list.erase(list.begin() + static_cast<std::ptrdiff_t>(at));
    degree_.add(u, -1);
    --size_;
    return e;
  }

  /// Inserts an edge and returns its rank in (u, v) order, or nothing if present.
  bool insert(Edge e, std::uint64_t& rank) {
    auto& list = lists_[e.u];
    auto it = std::lower_bound(list.begin(), list.end(), e.v);
    if (it != list.end() && *it == e.v) return false;
    rank = degree_.prefix(e.u) + static_cast<std::uint64_t>(it - list.begin());
    list.insert(it, e.v);
    degree_.add(e.u, +1);
    ++size_;
    return true;
  }

  std::vector<std::vector<Id>>& lists() { return lists_; }

 private:
  std::vector<std::vector<Id>> lists_;
  FenwickTree degree_;
  std::uint64_t size_ = 0;
};

}  // namespace

DirectedGraph DirectedGraph::from_adjacency(const std::vector<std::vector<Id>>& adj) {
  DirectedGraph g;
  g.num_nodes = adj.size();
  for (std::uint64_t u = 0; u < adj.size(); ++u) {
    for (Id v : adj[u]) g.edges.push_back({static_cast<Id>(u), v});
  }
  return g;
}

std::vector<std::vector<Id>> DirectedGraph::adjacency() const {
  std::vector<std::vector<Id>> adj(num_nodes);
  for (const Edge& e : edges) {
    if (e.u >= num_nodes || e.v >= num_nodes) throw DomainError("edge endpoint outside graph");
    adj[e.u].push_back(e.v);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

void DirectedGraph::validate() const {
  const auto adj = adjacency();
  for (std::uint64_t u = 0; u < adj.size(); ++u) {
    if (std::adjacent_find(adj[u].begin(), adj[u].end()) != adj[u].end()) {
      throw DomainError("duplicate edge");
    }
    if (std::binary_search(adj[u].begin(), adj[u].end(), static_cast<Id>(u))) throw DomainError("self-loop");
  }
}

bool same_edge_set(const DirectedGraph& a, const DirectedGraph& b) {
  if (a.num_nodes != b.num_nodes || a.edges.size() != b.edges.size()) return false;
  auto ea = a.edges;
  auto eb = b.edges;
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  return ea == eb;
}

DirectedGraph random_out_regular_digraph(std::uint64_t num_nodes, std::uint32_t degree, std::uint64_t seed) {
  if (degree >= num_nodes) throw DomainError("degree must be below the node count");
  std::mt19937_64 rng(seed);
  DirectedGraph g;
  g.num_nodes = num_nodes;
  g.edges.reserve(num_nodes * degree);
  std::vector<Id> picked;
  for (std::uint64_t u = 0; u < num_nodes; ++u) {
    picked.clear();
    while (picked.size() < degree) {
      const auto v = static_cast<Id>(rng() % num_nodes);
      if (v == u || std::find(picked.begin(), picked.end(), v) != picked.end()) continue;
      picked.push_back(v);
    }
    for (Id v : picked) g.edges.push_back({static_cast<Id>(u), v});
  }
  return g;
}

PolyaVertexModel::PolyaVertexModel(std::uint64_t num_nodes, double alpha)
    : prior_(static_cast<std::uint64_t>(std::max(1.0, std::round(alpha * kScale)))),
      counts_(num_nodes, 0),
      tree_(num_nodes) {
  if (!(alpha > 0)) throw DomainError("POLYA alpha must be positive");
}

void PolyaVertexModel::update(std::uint64_t v, std::int64_t delta) {
  if (delta < 0 && counts_[v] == 0) throw LogicError("POLYA count underflow");
  counts_[v] = static_cast<std::uint32_t>(static_cast<std::int64_t>(counts_[v]) + delta);
  total_ = static_cast<std::uint64_t>(static_cast<std::int64_t>(total_) + delta);
  tree_.add(v, delta);
}

std::vector<std::uint8_t> rec_encode(const DirectedGraph& g, VertexModel model) {
  g.validate();
  const std::uint64_t n = g.num_nodes;
  const std::uint64_t m = g.edges.size();
  if (m > 0 && n > kAnsMaxPrecision) throw DomainError("REC supports at most 2^32 nodes");

  std::variant<UniformModel, PolyaVertexModel> vm = UniformModel(std::max<std::uint64_t>(n, 1));
  if (model.kind == VertexModelKind::kPolya) {
    auto& p = vm.emplace<PolyaVertexModel>(n, model.alpha);
    for (const Edge& e : g.edges) {
      p.add(e.u);
      p.add(e.v);
    }
    if (p.precision() > kAnsMaxPrecision) throw DomainError("POLYA model precision exceeds 2^32");
  }

  EdgeOrder order(n);
  order.insert_sorted_lists(g.adjacency());
  AnsState st = AnsState::initial(0);
  for (std::uint64_t i = m; i >= 1; --i) {
    const Edge e = order.take(st.decode_uniform(i));
    if (auto* p = std::get_if<PolyaVertexModel>(&vm)) {
      p->remove(e.v);
      st.encode(e.v, *p);
      p->remove(e.u);
      st.encode(e.u, *p);
    } else {
      const auto& u = std::get<UniformModel>(vm);
      st.encode(e.v, u);
      st.encode(e.u, u);
    }
  }

  ByteWriter out;
  out.put_tag(kRecMagic);
  out.put_u8(kRecVersion);
  out.put_u64(n);
  out.put_u64(m);
  out.put_u8(static_cast<std::uint8_t>(model.kind));
  if (model.kind == VertexModelKind::kPolya) out.put_f64(model.alpha);
  st.append_payload(out);
  return out.take();
}

DirectedGraph rec_decode(std::span<const std::uint8_t> blob) {
  const RecHeader h = read_header(blob);
  const std::uint64_t n = h.num_nodes;
  if (h.num_edges > 0 && n < 2) throw FormatError("REC edges without enough nodes");
  AnsState st = AnsState::from_payload(blob.subspan(h.payload_offset));

  std::variant<UniformModel, PolyaVertexModel> vm = UniformModel(std::max<std::uint64_t>(n, 1));
  if (h.model.kind == VertexModelKind::kPolya) vm.emplace<PolyaVertexModel>(n, h.model.alpha);

  EdgeOrder order(n);
  for (std::uint64_t i = 1; i <= h.num_edges; ++i) {
    Edge e;
    if (auto* p = std::get_if<PolyaVertexModel>(&vm)) {
      e.u = static_cast<Id>(st.decode(*p));
      p->add(e.u);
      e.v = static_cast<Id>(st.decode(*p));
      p->add(e.v);
    } else {
      const auto& u = std::get<UniformModel>(vm);
      e.u = static_cast<Id>(st.decode(u));
      e.v = static_cast<Id>(st.decode(u));
    }
    std::uint64_t rank = 0;
    if (e.u == e.v || !order.insert(e, rank)) throw CorruptionError("REC stream decodes an invalid edge");
    st.encode_uniform(rank, i);
  }
  if (!(st == AnsState::initial(0))) throw CorruptionError("REC final state does not match the initial state");

  DirectedGraph g = DirectedGraph::from_adjacency(order.lists());
  g.num_nodes = n;
  return g;
}

std::uint64_t rec_state_bits(std::span<const std::uint8_t> blob) {
  const RecHeader h = read_header(blob);
  return AnsState::from_payload(blob.subspan(h.payload_offset)).bit_count();
}

double rec_uniform_ideal_bits(std::uint64_t num_nodes, std::uint64_t num_edges) {
  return static_cast<double>(num_edges) * 2.0 * std::log2(static_cast<double>(num_nodes)) -
         theoretical_savings(num_edges);
}

std::vector<std::uint8_t> delta_varint_encode(const DirectedGraph& g) {
  ByteWriter out;
  out.put_varint(g.num_nodes);
  for (const auto& list : g.adjacency()) {
    out.put_varint(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
      out.put_varint(i == 0 ? list[0] : list[i] - list[i - 1] - 1);
    }
  }
  return out.take();
}

DirectedGraph delta_varint_decode(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  DirectedGraph g;
  g.num_nodes = in.get_varint();
  for (std::uint64_t u = 0; u < g.num_nodes; ++u) {
    const std::uint64_t deg = in.get_varint();
    std::uint64_t v = 0;
    for (std::uint64_t i = 0; i < deg; ++i) {
      const std::uint64_t gap = in.get_varint();
      v = i == 0 ? gap : v + gap + 1;
      if (v >= g.num_nodes) throw FormatError("delta list neighbor outside graph");
      g.edges.push_back({static_cast<Id>(u), static_cast<Id>(v)});
    }
  }
  if (!in.done()) throw FormatError("trailing bytes after delta-coded graph");
  return g;
}

}  // namespace annzip
