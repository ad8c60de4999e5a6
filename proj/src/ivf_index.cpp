#include "annzip/ivf_index.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>

#include "annzip/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace annzip {

namespace {

constexpr std::uint8_t kMetaVersion = 1;

std::vector<std::vector<Id>> members_by_cluster(std::span<const std::uint32_t> assignment, std::uint32_t nlist) {
  std::vector<std::uint64_t> sizes(nlist, 0);
  for (auto k : assignment) {
    if (k >= nlist) throw DomainError("cluster assignment outside [0, nlist)");
    sizes[k]++;
  }
  std::vector<std::vector<Id>> members(nlist);
  for (std::uint32_t k = 0; k < nlist; ++k) members[k].reserve(sizes[k]);
  for (std::uint64_t i = 0; i < assignment.size(); ++i) members[assignment[i]].push_back(static_cast<Id>(i));
  return members;
}

std::uint32_t parse_u32(std::string_view s, const char* what) {
  std::uint32_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw DomainError(std::string("bad ") + what + ": " + std::string(s));
  return v;
}

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

}  // namespace

std::string_view to_string(IdBackend b) {
  switch (b) {
    case IdBackend::kUnc: return "unc";
    case IdBackend::kCompact: return "compact";
    case IdBackend::kEf: return "ef";
    case IdBackend::kRoc: return "roc";
    case IdBackend::kWt: return "wt";
    case IdBackend::kWt1: return "wt1";
  }
  return "?";
}

IdBackend parse_id_backend(std::string_view name) {
  for (auto b : kAllIdBackends)
    if (to_string(b) == name) return b;
  throw DomainError("unknown id backend: " + std::string(name));
}

IdStorage IdStorage::build(IdBackend backend, std::span<const std::uint32_t> assignment, std::uint32_t nlist) {
  if (nlist == 0) throw DomainError("nlist must be positive");
  if (assignment.size() > (std::uint64_t{1} << 32)) throw DomainError("ids are 32-bit");
  IdStorage s;
  s.backend_ = backend;
  s.num_ids_ = assignment.size();
  const auto members = members_by_cluster(assignment, nlist);
  s.sizes_.resize(nlist);
  for (std::uint32_t k = 0; k < nlist; ++k) s.sizes_[k] = members[k].size();

  if (backend == IdBackend::kWt || backend == IdBackend::kWt1) {
    s.wt_ = WaveletTree(assignment, nlist, backend == IdBackend::kWt ? BitvectorMode::kFlat : BitvectorMode::kCompressed);
    return s;
  }
  const IdCodec codec = backend == IdBackend::kUnc       ? IdCodec::kUnc
                        : backend == IdBackend::kCompact ? IdCodec::kCompact
                        : backend == IdBackend::kEf      ? IdCodec::kEf
                                                         : IdCodec::kRoc;
  std::unique_ptr<RocCoder> roc;
  if (codec == IdCodec::kRoc) roc = std::make_unique<RocCoder>(std::max<std::uint64_t>(s.num_ids_, 1));
  s.blocks_.reserve(nlist);
  for (std::uint32_t k = 0; k < nlist; ++k)
    s.blocks_.push_back(encode_ids(codec, members[k], std::max<std::uint64_t>(s.num_ids_, 1), roc.get(), 8));
  s.build_views();
  return s;
}

void IdStorage::build_views() {
  ef_views_.clear();
  if (backend_ != IdBackend::kEf) return;
  ef_views_.reserve(blocks_.size());
  for (const auto& b : blocks_) ef_views_.emplace_back(b, std::max<std::uint64_t>(num_ids_, 1));
}

void IdStorage::decode_cluster(std::uint32_t k, std::vector<Id>& out, RocCoder* roc) const {
  if (k >= nlist()) throw RangeError("cluster out of range");
  if (backend_ == IdBackend::kWt || backend_ == IdBackend::kWt1) {
    out.resize(sizes_[k]);
    for (std::uint64_t o = 0; o < sizes_[k]; ++o) out[o] = static_cast<Id>(wt_.select(k, o));
    return;
  }
  decode_ids(blocks_[k], std::max<std::uint64_t>(num_ids_, 1), out, roc);
  if (backend_ == IdBackend::kRoc) std::sort(out.begin(), out.end());
}

bool IdStorage::random_access() const {
  return backend_ == IdBackend::kWt || backend_ == IdBackend::kWt1 || backend_ == IdBackend::kEf;
}

Id IdStorage::resolve(std::uint32_t k, std::uint64_t offset) const {
  if (k >= nlist() || offset >= sizes_[k]) throw RangeError("candidate reference out of range");
  switch (backend_) {
    case IdBackend::kWt:
    case IdBackend::kWt1: return static_cast<Id>(wt_.select(k, offset));
    case IdBackend::kEf: return ef_views_[k].access(offset);
    default: throw CapabilityError("id backend " + std::string(to_string(backend_)) + " has no random access");
  }
}

std::uint64_t IdStorage::bits() const {
  if (backend_ == IdBackend::kWt || backend_ == IdBackend::kWt1) return wt_.size_in_bits();
  std::uint64_t b = 0;
  for (const auto& blk : blocks_) b += blk.bits;
  return b;
}

std::vector<std::uint32_t> IdStorage::assignment() const {
  std::vector<std::uint32_t> a(num_ids_, 0);
  std::unique_ptr<RocCoder> roc;
  if (backend_ == IdBackend::kRoc) roc = std::make_unique<RocCoder>(std::max<std::uint64_t>(num_ids_, 1));
  std::vector<Id> ids;
  for (std::uint32_t k = 0; k < nlist(); ++k) {
    decode_cluster(k, ids, roc.get());
    for (auto id : ids) a[id] = k;
  }
  return a;
}

void IdStorage::serialize(ByteWriter& out) const {
  out.put_u8(static_cast<std::uint8_t>(backend_));
  out.put_varint(num_ids_);
  out.put_varint(nlist());
  if (backend_ == IdBackend::kWt || backend_ == IdBackend::kWt1) {
    wt_.serialize(out);
    return;
  }
  for (const auto& b : blocks_) b.serialize(out);
}

IdStorage IdStorage::deserialize(ByteReader& in) {
  IdStorage s;
  const std::uint8_t tag = in.get_u8();
  if (tag > static_cast<std::uint8_t>(IdBackend::kWt1)) throw FormatError("unknown id backend tag");
  s.backend_ = static_cast<IdBackend>(tag);
  s.num_ids_ = in.get_varint();
  const std::uint64_t nlist = in.get_varint();
  if (nlist == 0 || nlist > (std::uint64_t{1} << 32)) throw FormatError("bad nlist");
  s.sizes_.resize(nlist);
  if (s.backend_ == IdBackend::kWt || s.backend_ == IdBackend::kWt1) {
    s.wt_ = WaveletTree::deserialize(in);
    if (s.wt_.size() != s.num_ids_ || s.wt_.alphabet() != nlist) throw FormatError("wavelet tree shape mismatch");
    for (std::uint32_t k = 0; k < nlist; ++k) s.sizes_[k] = s.wt_.count(k);
    return s;
  }
  std::uint64_t total = 0;
  s.blocks_.reserve(nlist);
  for (std::uint64_t k = 0; k < nlist; ++k) {
    s.blocks_.push_back(CompressedIdBlock::deserialize(in));
    s.sizes_[k] = s.blocks_.back().n;
    total += s.sizes_[k];
  }
  if (total != s.num_ids_) throw FormatError("cluster sizes do not sum to N");
  s.build_views();
  return s;
}

std::string to_string(const CodeSpec& spec) {
  if (spec.kind == CodeKind::kFlat) return "flat";
  return std::string(spec.kind == CodeKind::kPq ? "pq " : "pq-cond ") + std::to_string(spec.m) + "x" +
         std::to_string(spec.nbits);
}

CodeSpec parse_code_spec(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)) && c != ':') s.push_back(static_cast<char>(std::tolower(c)));
  CodeSpec spec;
  if (s == "flat") return spec;
  std::string_view rest = s;
  if (rest.starts_with("pq-cond")) {
    spec.kind = CodeKind::kPqCond;
    rest.remove_prefix(7);
  } else if (rest.starts_with("pq")) {
    spec.kind = CodeKind::kPq;
    rest.remove_prefix(2);
  } else {
    throw DomainError("unknown code spec: " + std::string(text));
  }
  const auto x = rest.find('x');
  spec.m = parse_u32(rest.substr(0, x), "PQ sub-quantizer count");
  if (x != std::string_view::npos) spec.nbits = parse_u32(rest.substr(x + 1), "PQ bits");
  if (spec.m == 0 || spec.nbits == 0 || spec.nbits > 16) throw DomainError("bad code spec: " + std::string(text));
  return spec;
}

struct IvfIndex::Scratch {
  std::vector<Id> ids;
  std::vector<std::uint16_t> codes;
  std::unique_ptr<RocCoder> roc;
};

IvfIndex IvfIndex::build(const FloatMatrix& x, const IvfBuildParams& params, const std::vector<float>* centroids) {
  if (x.rows == 0 || x.dim == 0) throw DomainError("empty training set");
  if (params.nlist == 0 || params.nlist > x.rows) throw DomainError("nlist must be in [1, N]");
  IvfIndex idx;
  idx.dim_ = x.dim;
  idx.codes_ = params.codes;
  if (centroids) {
    if (centroids->size() != std::size_t{params.nlist} * x.dim) throw DomainError("centroid matrix shape mismatch");
    idx.centroids_ = *centroids;
  } else {
    idx.centroids_ = kmeans_train(x.data.data(), x.rows, x.dim, params.nlist, params.kmeans);
  }
  const auto assignment = assign_nearest(idx.centroids_.data(), params.nlist, x.dim, x.data.data(), x.rows);
  idx.ids_ = IdStorage::build(params.ids, assignment, params.nlist);
  const auto members = members_by_cluster(assignment, params.nlist);

  if (params.codes.kind == CodeKind::kFlat) {
    idx.flat_.resize(params.nlist);
    for (std::uint32_t k = 0; k < params.nlist; ++k) {
      auto& f = idx.flat_[k];
      f.resize(members[k].size() * x.dim);
      for (std::size_t o = 0; o < members[k].size(); ++o) std::copy_n(x.row(members[k][o]), x.dim, f.data() + o * x.dim);
    }
    return idx;
  }

  if (x.dim % params.codes.m != 0) throw DomainError("PQ sub-quantizer count must divide D");
  idx.pq_ = ProductQuantizer(x.dim, params.codes.m, params.codes.nbits);
  idx.pq_.train(x.data.data(), x.rows, {params.pq_iterations, params.kmeans.seed + 1, params.pq_train_points});
  const std::uint32_t m = params.codes.m;
  std::vector<std::uint16_t> codes;
  if (params.codes.kind == CodeKind::kPq)
    idx.packed_.resize(params.nlist);
  else
    idx.cond_.resize(params.nlist);
  for (std::uint32_t k = 0; k < params.nlist; ++k) {
    const std::size_t n = members[k].size();
    codes.resize(n * m);
    for (std::size_t o = 0; o < n; ++o) idx.pq_.encode(x.row(members[k][o]), codes.data() + o * m);
    if (params.codes.kind == CodeKind::kPq) {
      auto& p = idx.packed_[k];
      p.resize(n * idx.pq_.code_size());
      for (std::size_t o = 0; o < n; ++o) idx.pq_.pack(codes.data() + o * m, p.data() + o * idx.pq_.code_size());
    } else {
      idx.cond_[k] = cluster_codes_encode(codes, n, m, idx.pq_.ksub());
    }
  }
  return idx;
}

IvfIndex IvfIndex::with_id_backend(IdBackend backend) const {
  IvfIndex out = *this;
  if (backend != ids_.backend()) out.ids_ = IdStorage::build(backend, ids_.assignment(), nlist());
  return out;
}

IvfIndex IvfIndex::with_code_kind(CodeKind kind) const {
  if (kind == codes_.kind) return *this;
  if (codes_.kind == CodeKind::kFlat || kind == CodeKind::kFlat)
    throw CapabilityError("flat codes cannot be converted to or from PQ codes");
  IvfIndex out = *this;
  out.codes_.kind = kind;
  const std::uint32_t m = pq_.m();
  std::vector<std::uint16_t> codes;
  if (kind == CodeKind::kPqCond) {
    out.packed_.clear();
    out.cond_.resize(nlist());
    for (std::uint32_t k = 0; k < nlist(); ++k) {
      const std::uint64_t n = ids_.cluster_size(k);
      codes.resize(n * m);
      for (std::uint64_t o = 0; o < n; ++o)
        pq_.unpack(packed_[k].data() + o * pq_.code_size(), codes.data() + o * m);
      out.cond_[k] = cluster_codes_encode(codes, n, m, pq_.ksub());
    }
  } else {
    out.cond_.clear();
    out.packed_.resize(nlist());
    for (std::uint32_t k = 0; k < nlist(); ++k) {
      cluster_codes_decode(cond_[k], m, pq_.ksub(), codes);
      const std::uint64_t n = ids_.cluster_size(k);
      out.packed_[k].resize(n * pq_.code_size());
      for (std::uint64_t o = 0; o < n; ++o) pq_.pack(codes.data() + o * m, out.packed_[k].data() + o * pq_.code_size());
    }
  }
  return out;
}

std::vector<std::uint32_t> IvfIndex::probe(const float* q, std::uint32_t nprobe) const {
  const std::uint32_t k = nlist();
  nprobe = std::min(nprobe, k);
  std::vector<std::pair<float, std::uint32_t>> d(k);
  for (std::uint32_t c = 0; c < k; ++c) d[c] = {l2_sqr(q, centroids_.data() + std::size_t{c} * dim_, dim_), c};
  std::partial_sort(d.begin(), d.begin() + nprobe, d.end());
  std::vector<std::uint32_t> out(nprobe);
  for (std::uint32_t i = 0; i < nprobe; ++i) out[i] = d[i].second;
  return out;
}

std::vector<float> IvfIndex::query_table(const float* q) const {
  if (codes_.kind == CodeKind::kFlat) return {};
  return pq_.adc_table(q);
}

template <class F>
void IvfIndex::scan_cluster(std::uint32_t k, const float* q, const float* table, Scratch& s, F&& f) const {
  const std::uint64_t n = ids_.cluster_size(k);
  switch (codes_.kind) {
    case CodeKind::kFlat: {
      const float* base = flat_[k].data();
      for (std::uint64_t o = 0; o < n; ++o) f(o, l2_sqr(q, base + o * dim_, dim_));
      break;
    }
    case CodeKind::kPq: {
      const std::uint8_t* base = packed_[k].data();
      const std::uint32_t cs = pq_.code_size();
      for (std::uint64_t o = 0; o < n; ++o) f(o, pq_.adc_distance_packed(table, base + o * cs));
      break;
    }
    case CodeKind::kPqCond: {
      cluster_codes_decode(cond_[k], pq_.m(), pq_.ksub(), s.codes);
      const std::uint32_t m = pq_.m();
      for (std::uint64_t o = 0; o < n; ++o) f(o, pq_.adc_distance(table, s.codes.data() + o * m));
      break;
    }
  }
}

void IvfIndex::check_params(const SearchParams& params) const {
  if (params.k == 0) throw DomainError("k must be positive");
  if (params.nprobe == 0) throw DomainError("nprobe must be positive");
}

std::vector<std::vector<Neighbor>> IvfIndex::search(const FloatMatrix& queries, const SearchParams& params) const {
  check_params(params);
  if (ids_.backend() == IdBackend::kWt || ids_.backend() == IdBackend::kWt1) return search_deferred(queries, params);
  if (queries.dim != dim_) throw DomainError("query dimension mismatch");
  std::vector<std::vector<Neighbor>> results(queries.rows);
  std::vector<Scratch> scratch(thread_count());
  const auto nq = static_cast<std::int64_t>(queries.rows);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t qi = 0; qi < nq; ++qi) {
    Scratch& s = scratch[thread_id()];
    if (ids_.backend() == IdBackend::kRoc && !s.roc) s.roc = std::make_unique<RocCoder>(std::max<std::uint64_t>(size(), 1));
    const float* q = queries.row(qi);
    const auto table = query_table(q);
    TopK top(params.k);
    for (auto k : probe(q, params.nprobe)) {
      ids_.decode_cluster(k, s.ids, s.roc.get());
      scan_cluster(k, q, table.data(), s, [&](std::uint64_t o, float d) { top.push(d, s.ids[o]); });
    }
    results[qi] = top.sorted();
  }
  return results;
}

std::vector<std::vector<Neighbor>> IvfIndex::search_deferred(const FloatMatrix& queries, const SearchParams& params,
                                                             std::uint64_t* resolutions) const {
  check_params(params);
  if (!ids_.random_access())
    throw CapabilityError("deferred search needs a wt, wt1 or ef id backend, not " + std::string(to_string(ids_.backend())));
  if (queries.dim != dim_) throw DomainError("query dimension mismatch");
  std::vector<std::vector<Neighbor>> results(queries.rows);
  std::vector<Scratch> scratch(thread_count());
  std::uint64_t total = 0;
  const auto nq = static_cast<std::int64_t>(queries.rows);
  auto resolve = [this](std::uint32_t k, std::uint32_t o) { return ids_.resolve(k, o); };
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : total)
  for (std::int64_t qi = 0; qi < nq; ++qi) {
    Scratch& s = scratch[thread_id()];
    const float* q = queries.row(qi);
    const auto table = query_table(q);
    DeferredTopK<decltype(resolve)> top(params.k, resolve);
    for (auto k : probe(q, params.nprobe))
      scan_cluster(k, q, table.data(), s,
                   [&](std::uint64_t o, float d) { top.push(d, k, static_cast<std::uint32_t>(o)); });
    results[qi] = top.resolve_sorted();
    total += top.resolutions();
  }
  if (resolutions) *resolutions = total;
  return results;
}

IvfStats IvfIndex::stats() const {
  IvfStats st;
  st.num_ids = size();
  st.nlist = nlist();
  st.backend = ids_.backend();
  st.id_bits = ids_.bits();
  st.bits_per_id = ids_.bits_per_id();
  st.min_cluster = st.num_ids;
  for (std::uint32_t k = 0; k < nlist(); ++k) {
    const std::uint64_t n = ids_.cluster_size(k);
    st.savings_bits += theoretical_savings(n);
    st.min_cluster = std::min(st.min_cluster, n);
    st.max_cluster = std::max(st.max_cluster, n);
  }
  st.codes = codes_;
  switch (codes_.kind) {
    case CodeKind::kFlat:
      st.code_entries = size() * dim_;
      st.code_bits = st.code_entries * 32;
      break;
    case CodeKind::kPq:
      st.code_entries = size() * pq_.m();
      st.code_bits = st.code_entries * pq_.nbits();
      break;
    case CodeKind::kPqCond:
      st.code_entries = size() * pq_.m();
      for (const auto& c : cond_) st.code_bits += c.bits();
      break;
  }
  st.code_bpe = st.code_entries == 0 ? 0.0 : static_cast<double>(st.code_bits) / st.code_entries;
  return st;
}

Container IvfIndex::to_container() const {
  Container c;
  {
    ByteWriter w;
    w.put_u8(kMetaVersion);
    w.put_u32(dim_);
    w.put_u32(nlist());
    w.put_u64(size());
    w.put_u8(static_cast<std::uint8_t>(codes_.kind));
    w.put_u32(codes_.m);
    w.put_u32(codes_.nbits);
    c.add(Container::tag("META"), w.take());
  }
  {
    ByteWriter w;
    w.put_pod_array(std::span<const float>(centroids_));
    c.add(Container::tag("CENT"), w.take());
  }
  {
    ByteWriter w;
    ids_.serialize(w);
    c.add(Container::tag("IDS "), w.take());
  }
  ByteWriter w;
  switch (codes_.kind) {
    case CodeKind::kFlat:
      for (const auto& f : flat_) w.put_pod_array(std::span<const float>(f));
      break;
    case CodeKind::kPq:
      for (const auto& p : packed_) w.put_bytes(p);
      break;
    case CodeKind::kPqCond:
      for (const auto& b : cond_) b.serialize(w);
      break;
  }
  c.add(Container::tag("CODE"), w.take());
  if (codes_.kind != CodeKind::kFlat) {
    ByteWriter pw;
    pq_.serialize(pw);
    c.add(Container::tag("PQCB"), pw.take());
  }
  return c;
}

IvfIndex IvfIndex::from_container(const Container& c) {
  IvfIndex idx;
  ByteReader meta(c.get(Container::tag("META")));
  if (meta.get_u8() != kMetaVersion) throw FormatError("unsupported IVF metadata version");
  idx.dim_ = meta.get_u32();
  const std::uint32_t nlist = meta.get_u32();
  const std::uint64_t n = meta.get_u64();
  const std::uint8_t kind = meta.get_u8();
  if (kind > static_cast<std::uint8_t>(CodeKind::kPqCond)) throw FormatError("unknown code kind");
  idx.codes_ = {static_cast<CodeKind>(kind), meta.get_u32(), meta.get_u32()};
  if (idx.dim_ == 0 || nlist == 0) throw FormatError("bad IVF metadata");

  const auto cent = c.get(Container::tag("CENT"));
  if (cent.size() != std::size_t{nlist} * idx.dim_ * 4) throw FormatError("centroid section size mismatch");
  ByteReader cr(cent);
  idx.centroids_ = cr.get_pod_array<float>(std::size_t{nlist} * idx.dim_);

  ByteReader ir(c.get(Container::tag("IDS ")));
  idx.ids_ = IdStorage::deserialize(ir);
  if (idx.ids_.num_ids() != n || idx.ids_.nlist() != nlist) throw FormatError("id section does not match metadata");

  ByteReader code(c.get(Container::tag("CODE")));
  if (idx.codes_.kind != CodeKind::kFlat) {
    ByteReader pr(c.get(Container::tag("PQCB")));
    idx.pq_ = ProductQuantizer::deserialize(pr);
    if (idx.pq_.dim() != idx.dim_ || idx.pq_.m() != idx.codes_.m || idx.pq_.nbits() != idx.codes_.nbits)
      throw FormatError("PQ codebook does not match metadata");
  }
  for (std::uint32_t k = 0; k < nlist; ++k) {
    const std::uint64_t nk = idx.ids_.cluster_size(k);
    switch (idx.codes_.kind) {
      case CodeKind::kFlat:
        idx.flat_.push_back(code.get_pod_array<float>(nk * idx.dim_));
        break;
      case CodeKind::kPq: {
        const auto b = code.get_bytes(nk * idx.pq_.code_size());
        idx.packed_.emplace_back(b.begin(), b.end());
        break;
      }
      case CodeKind::kPqCond:
        idx.cond_.push_back(ClusterCodeBlock::deserialize(code, idx.codes_.m));
        if (idx.cond_.back().n != nk) throw FormatError("code block size does not match id list");
        break;
    }
  }
  if (!code.done()) throw FormatError("trailing bytes in code section");
  return idx;
}

}  // namespace annzip
