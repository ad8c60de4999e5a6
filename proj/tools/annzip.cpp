#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "annzip/dataset.hpp"
#include "annzip/errors.hpp"
#include "annzip/graph_index.hpp"
#include "annzip/ivf_index.hpp"
#include "report.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace annzip;
using annzip::cli::fmt;
using annzip::cli::Report;

namespace {

using Results = std::vector<std::vector<Neighbor>>;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<IdBackend> parse_backends(const std::string& s) {
  if (s == "all") return {std::begin(kAllIdBackends), std::end(kAllIdBackends)};
  std::vector<IdBackend> out;
  for (const auto& x : split_list(s)) out.push_back(parse_id_backend(x));
  return out;
}

std::vector<IdCodec> parse_codecs(const std::string& s) {
  if (s == "all") return {IdCodec::kUnc, IdCodec::kCompact, IdCodec::kEf, IdCodec::kRoc};
  std::vector<IdCodec> out;
  for (const auto& x : split_list(s)) out.push_back(parse_id_codec(x));
  return out;
}

VertexModel parse_model(const std::string& name, double alpha) {
  if (name == "uniform") return {VertexModelKind::kUniform, alpha};
  if (name == "polya") return {VertexModelKind::kPolya, alpha};
  throw DomainError("unknown vertex model: " + name);
}

template <class F>
double median_ms(int runs, F&& f) {
  f();  // warm-up, not timed
  std::vector<double> t;
  for (int r = 0; r < runs; ++r) {
    const auto a = std::chrono::steady_clock::now();
    f();
    t.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - a).count());
  }
  std::sort(t.begin(), t.end());
  return t.empty() ? 0.0 : t[t.size() / 2];
}

double recall_at_k(const Results& res, const std::vector<std::vector<std::int32_t>>& gt, std::size_t k) {
  if (gt.size() < res.size()) throw DomainError("ground truth has fewer rows than queries");
  std::uint64_t hit = 0, total = 0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    const std::size_t kk = std::min(k, gt[i].size());
    for (const auto& n : res[i])
      hit += std::find(gt[i].begin(), gt[i].begin() + kk, static_cast<std::int32_t>(n.id)) != gt[i].begin() + kk;
    total += kk;
  }
  return total == 0 ? 0.0 : static_cast<double>(hit) / total;
}

void write_results(const std::string& path, const Results& res) {
  std::vector<std::vector<std::int32_t>> rows;
  for (const auto& r : res) {
    rows.emplace_back();
    for (const auto& n : r) rows.back().push_back(static_cast<std::int32_t>(n.id));
  }
  write_ivecs(path, rows);
}

struct Common {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
};

void apply_threads(const Common& c) {
#ifdef _OPENMP
  if (c.threads > 0) omp_set_num_threads(c.threads);
#else
  (void)c;
#endif
}

void add_common(CLI::App* app, Common& c, bool needs_out) {
  app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads (0 = runtime default)")->capture_default_str();
  auto* o = app->add_option("--out", c.out, "Output path");
  if (needs_out) o->required();
}

bool is_ivf(const Container& c) { return c.has(Container::tag("META")); }

// gen-synthetic ---------------------------------------------------------------

struct GenArgs {
  Common common;
  std::uint64_t n = 10000;
  std::uint32_t dim = 16;
  std::uint32_t clusters = 64;
  float spread = 0.05f;
  std::uint64_t queries = 0;
  std::string queries_out;
};

int cmd_gen(const GenArgs& a) {
  const auto data = gen_synthetic({a.n + a.queries, a.dim, a.clusters, a.spread, a.common.seed});
  FloatMatrix base(a.n, a.dim), q(a.queries, a.dim);
  std::copy_n(data.vectors.data.begin(), a.n * a.dim, base.data.begin());
  std::copy(data.vectors.data.begin() + a.n * a.dim, data.vectors.data.end(), q.data.begin());
  write_fvecs(a.common.out, base);
  std::vector<std::vector<std::int32_t>> labels(a.n);
  for (std::uint64_t i = 0; i < a.n; ++i) labels[i] = {static_cast<std::int32_t>(data.labels[i])};
  const std::string label_path = a.common.out + ".labels.ivecs";
  write_ivecs(label_path, labels);
  Report r;
  r.kv("out", a.common.out);
  r.kv("labels", label_path);
  r.kv("n", a.n);
  r.kv("dim", a.dim);
  r.kv("clusters", a.clusters);
  if (a.queries > 0) {
    const std::string qp = a.queries_out.empty() ? a.common.out + ".queries.fvecs" : a.queries_out;
    write_fvecs(qp, q);
    r.kv("queries", qp);
    r.kv("num_queries", a.queries);
  }
  r.print();
  return 0;
}

// build-ivf -------------------------------------------------------------------

struct BuildIvfArgs {
  Common common;
  std::string data;
  std::uint64_t max_rows = 0;
  std::uint32_t nlist = 1024;
  std::string ids = "roc";
  std::string codes = "flat";
  std::uint64_t train_points = 65536;
  int iterations = 25;
};

int cmd_build_ivf(const BuildIvfArgs& a) {
  apply_threads(a.common);
  const auto x = load_vectors(a.data, a.max_rows);
  IvfBuildParams p;
  p.nlist = a.nlist;
  p.ids = parse_id_backend(a.ids);
  p.codes = parse_code_spec(a.codes);
  p.kmeans = {a.iterations, a.common.seed, a.train_points};
  p.pq_train_points = a.train_points;
  p.pq_iterations = a.iterations;
  const auto t0 = std::chrono::steady_clock::now();
  const auto idx = IvfIndex::build(x, p);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto c = idx.to_container();
  c.write_file(a.common.out);
  const auto st = idx.stats();
  Report r;
  r.kv("out", a.common.out);
  r.kv("n", st.num_ids);
  r.kv("dim", idx.dim());
  r.kv("nlist", st.nlist);
  r.kv("ids", to_string(st.backend));
  r.kv("codes", to_string(st.codes));
  r.kv("bits_per_id", st.bits_per_id, 4);
  r.kv("code_bpe", st.code_bpe, 4);
  r.kv("build_seconds", secs, 2);  // timing
  r.print();
  return 0;
}

// build-graph -----------------------------------------------------------------

struct BuildGraphArgs {
  Common common;
  std::string data;
  std::uint64_t max_rows = 0;
  std::uint32_t degree = 32;
  std::uint32_t candidates = 0;
  std::uint64_t brute_limit = 100000;
  std::string friend_ids = "roc";
};

int cmd_build_graph(const BuildGraphArgs& a) {
  apply_threads(a.common);
  const auto x = load_vectors(a.data, a.max_rows);
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = GraphIndex::build(x, {a.degree, a.candidates, a.brute_limit, parse_id_codec(a.friend_ids), a.common.seed});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  g.to_container().write_file(a.common.out);
  const auto st = g.stats();
  Report r;
  r.kv("out", a.common.out);
  r.kv("n", st.num_nodes);
  r.kv("degree", st.max_degree);
  r.kv("edges", st.num_edges);
  r.kv("entry", g.entry());
  r.kv("friend_ids", to_string(st.backend));
  r.kv("bits_per_id", st.bits_per_id, 4);
  r.kv("build_seconds", secs, 2);  // timing
  r.print();
  return 0;
}

// search ----------------------------------------------------------------------

struct SearchArgs {
  Common common;
  std::string index;
  std::string queries;
  std::string gt;
  std::size_t k = 10;
  std::uint32_t nprobe = 16;
  std::size_t beam = 16;
  bool check = false;
  bool deferred = false;
};

/// Runs every backend variant of the index and compares against `ref`.
bool check_ivf(const IvfIndex& idx, const FloatMatrix& q, const SearchParams& sp, const Results& ref, Report& r) {
  bool ok = true;
  r.header({"variant", "bits/id", "code bpe", "equal"});
  std::vector<IvfIndex> code_variants = {idx};
  if (idx.code_spec().kind != CodeKind::kFlat)
    code_variants.push_back(
        idx.with_code_kind(idx.code_spec().kind == CodeKind::kPq ? CodeKind::kPqCond : CodeKind::kPq));
  for (const auto& cv : code_variants) {
    for (auto b : kAllIdBackends) {
      const auto v = cv.with_id_backend(b);
      const auto st = v.stats();
      const bool eq = v.search(q, sp) == ref;
      ok &= eq;
      r.row({std::string(to_string(b)) + " / " + to_string(cv.code_spec()), fmt(st.bits_per_id), fmt(st.code_bpe),
             eq ? "yes" : "NO"});
      if (v.ids().random_access()) {
        const bool deq = v.search_deferred(q, sp) == ref;
        ok &= deq;
        r.row({std::string(to_string(b)) + " deferred / " + to_string(cv.code_spec()), fmt(st.bits_per_id),
               fmt(st.code_bpe), deq ? "yes" : "NO"});
      }
    }
  }
  return ok;
}

bool check_graph(const GraphIndex& g, const FloatMatrix& q, std::size_t k, std::size_t beam, const Results& ref,
                 Report& r) {
  bool ok = true;
  r.header({"friend ids", "bits/id", "equal"});
  for (auto c : {IdCodec::kUnc, IdCodec::kCompact, IdCodec::kEf, IdCodec::kRoc}) {
    const auto v = g.with_friend_backend(c);
    const bool eq = v.search(q, k, beam) == ref;
    ok &= eq;
    r.row({std::string(to_string(c)), fmt(v.stats().bits_per_id), eq ? "yes" : "NO"});
  }
  const auto rec = g.import_rec(g.export_rec());
  const bool eq = rec.search(q, k, beam) == ref;
  ok &= eq;
  r.row({"rec import", "-", eq ? "yes" : "NO"});
  return ok;
}

int cmd_search(const SearchArgs& a) {
  apply_threads(a.common);
  const auto c = Container::read_file(a.index);
  const auto q = load_vectors(a.queries);
  Report r;
  Results res;
  bool ok = true;
  const auto t0 = std::chrono::steady_clock::now();
  if (is_ivf(c)) {
    const auto idx = IvfIndex::from_container(c);
    const SearchParams sp{a.k, a.nprobe};
    res = a.deferred ? idx.search_deferred(q, sp) : idx.search(q, sp);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    r.kv("index", "ivf");
    r.kv("ids", to_string(idx.ids().backend()));
    r.kv("codes", to_string(idx.code_spec()));
    r.kv("nprobe", a.nprobe);
    r.kv("search_ms", ms, 2);  // timing
    if (a.check) ok = check_ivf(idx, q, sp, res, r);
  } else {
    const auto g = GraphIndex::from_container(c);
    res = g.search(q, a.k, a.beam);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    r.kv("index", "graph");
    r.kv("friend_ids", to_string(g.backend()));
    r.kv("beam", a.beam);
    r.kv("search_ms", ms, 2);  // timing
    if (a.check) ok = check_graph(g, q, a.k, a.beam, res, r);
  }
  r.kv("queries", q.rows);
  r.kv("k", a.k);
  if (!a.gt.empty()) r.kv("recall_at_k", recall_at_k(res, load_ivecs(a.gt), a.k), 4);
  if (a.check) r.kv("check", ok ? "pass" : "fail");
  if (!a.common.out.empty()) {
    write_results(a.common.out, res);
    r.kv("out", a.common.out);
  }
  r.print();
  return ok ? 0 : 2;
}

// stats -----------------------------------------------------------------------

struct StatsArgs {
  Common common;
  std::string index;
  std::string ids;
};

void ivf_stats_row(const IvfIndex& idx, Report& r) {
  const auto st = idx.stats();
  const double n = static_cast<double>(std::max<std::uint64_t>(st.num_ids, 1));
  r.row({std::string(to_string(st.backend)), fmt(st.bits_per_id), fmt(st.savings_bits / n),
         fmt(std::ceil(std::log2(n))), to_string(st.codes), fmt(st.code_bpe)});
}

int cmd_stats(const StatsArgs& a) {
  apply_threads(a.common);
  const auto c = Container::read_file(a.index);
  Report r;
  if (is_ivf(c)) {
    const auto idx = IvfIndex::from_container(c);
    const auto st = idx.stats();
    r.kv("index", "ivf");
    r.kv("n", st.num_ids);
    r.kv("nlist", st.nlist);
    r.kv("ids", to_string(st.backend));
    r.kv("id_bits", st.id_bits);
    r.kv("bits_per_id", st.bits_per_id, 4);
    r.kv("savings_bits", st.savings_bits, 1);
    r.kv("savings_per_id", st.savings_bits / std::max<std::uint64_t>(st.num_ids, 1), 4);
    r.kv("min_cluster", st.min_cluster);
    r.kv("max_cluster", st.max_cluster);
    r.kv("codes", to_string(st.codes));
    r.kv("code_bits", st.code_bits);
    r.kv("code_bpe", st.code_bpe, 4);
    r.header({"ids", "bits/id", "log N_k! per id", "ceil log2 N", "codes", "code bpe"});
    if (a.ids.empty()) {
      ivf_stats_row(idx, r);
    } else {
      for (auto b : parse_backends(a.ids)) ivf_stats_row(idx.with_id_backend(b), r);
    }
  } else {
    const auto g = GraphIndex::from_container(c);
    const auto st = g.stats();
    r.kv("index", "graph");
    r.kv("n", st.num_nodes);
    r.kv("degree", st.max_degree);
    r.kv("edges", st.num_edges);
    r.kv("friend_ids", to_string(st.backend));
    r.kv("bits_per_id", st.bits_per_id, 4);
    r.kv("savings_bits", st.savings_bits, 1);
    r.kv("overhead_bits", st.overhead_bits, 1);
    r.header({"friend ids", "bits/id", "log m_i! per id", "overhead/list"});
    auto row = [&](const GraphIndex& v) {
      const auto s = v.stats();
      const double e = static_cast<double>(std::max<std::uint64_t>(s.num_edges, 1));
      r.row({std::string(to_string(s.backend)), fmt(s.bits_per_id), fmt(s.savings_bits / e),
             fmt(s.overhead_bits / std::max<std::uint64_t>(s.num_nodes, 1), 1)});
    };
    if (a.ids.empty()) {
      row(g);
    } else {
      for (auto codec : parse_codecs(a.ids)) row(g.with_friend_backend(codec));
    }
  }
  r.print();
  return 0;
}

// bench -----------------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::string type = "ivf";
  std::string data;
  std::string queries;
  std::uint64_t max_rows = 0;
  std::uint32_t nlist = 1024;
  std::string ids = "all";
  std::vector<std::string> codes = {"flat"};
  std::uint32_t nprobe = 16;
  std::size_t k = 10;
  int runs = 100;
  std::uint32_t degree = 32;
  std::size_t beam = 16;
  std::uint64_t train_points = 65536;
  int iterations = 25;
};

int cmd_bench(const BenchArgs& a) {
  apply_threads(a.common);
  const auto x = load_vectors(a.data, a.max_rows);
  const auto q = load_vectors(a.queries);
  Report r;
  r.kv("type", a.type);
  r.kv("n", x.rows);
  r.kv("dim", x.dim);
  r.kv("queries", q.rows);
  r.kv("runs", a.runs);
  r.kv("k", a.k);
#ifdef _OPENMP
  r.kv("threads", omp_get_max_threads());
#endif
  bool all_equal = true;
  int row_id = 0;
  auto emit = [&](const std::string& config, double bpi, double savings, double code_bpe, double ms, bool eq) {
    const std::string p = "row" + std::to_string(row_id++) + ".";
    r.kv(p + "config", config);
    r.kv(p + "bits_per_id", bpi, 4);
    r.kv(p + "savings_per_id", savings, 4);
    r.kv(p + "code_bpe", code_bpe, 4);
    r.kv(p + "median_ms", ms, 3);  // timing
    r.kv(p + "equal", eq ? "yes" : "no");
    r.row({config, fmt(bpi), fmt(savings), fmt(code_bpe), fmt(ms), eq ? "yes" : "NO"});
    all_equal &= eq;
  };
  r.header({"config", "bits/id", "savings/id", "code bpe", "median ms", "equal"});
  if (a.type == "ivf") {
    r.kv("nlist", a.nlist);
    r.kv("nprobe", a.nprobe);
    const SearchParams sp{a.k, a.nprobe};
    for (const auto& code_text : a.codes) {
      IvfBuildParams p;
      p.nlist = a.nlist;
      p.ids = IdBackend::kUnc;
      p.codes = parse_code_spec(code_text);
      p.kmeans = {a.iterations, a.common.seed, a.train_points};
      p.pq_train_points = a.train_points;
      p.pq_iterations = a.iterations;
      const auto base = IvfIndex::build(x, p);
      const auto ref = base.search(q, sp);
      std::vector<IvfIndex> variants = {base};
      if (p.codes.kind == CodeKind::kPq) variants.push_back(base.with_code_kind(CodeKind::kPqCond));
      if (p.codes.kind == CodeKind::kPqCond) variants.push_back(base.with_code_kind(CodeKind::kPq));
      for (const auto& cv : variants) {
        for (auto b : parse_backends(a.ids)) {
          const auto v = cv.with_id_backend(b);
          Results res;
          const double ms = median_ms(a.runs, [&] { res = v.search(q, sp); });
          const auto st = v.stats();
          emit(std::string(to_string(b)) + " / " + to_string(cv.code_spec()), st.bits_per_id,
               st.savings_bits / std::max<std::uint64_t>(st.num_ids, 1), st.code_bpe, ms, res == ref);
        }
      }
    }
  } else if (a.type == "graph") {
    r.kv("degree", a.degree);
    r.kv("beam", a.beam);
    const auto base = GraphIndex::build(x, {a.degree, 0, 100000, IdCodec::kUnc, a.common.seed});
    const auto ref = base.search(q, a.k, a.beam);
    const std::string ids = a.ids == "all" ? "all" : a.ids;
    for (auto c : parse_codecs(ids)) {
      const auto v = base.with_friend_backend(c);
      Results res;
      const double ms = median_ms(a.runs, [&] { res = v.search(q, a.k, a.beam); });
      const auto st = v.stats();
      emit(std::string(to_string(c)), st.bits_per_id, st.savings_bits / std::max<std::uint64_t>(st.num_edges, 1), 32.0,
           ms, res == ref);
    }
    const auto blob = base.export_rec();
    const double rec_bits = static_cast<double>(rec_state_bits(blob));
    r.kv("rec_bits_per_edge", rec_bits / std::max<std::uint64_t>(base.stats().num_edges, 1), 4);
  } else {
    throw DomainError("bench type must be ivf or graph");
  }
  r.kv("check", all_equal ? "pass" : "fail");
  r.print();
  if (!a.common.out.empty()) {
    std::ofstream f(a.common.out);
    r.print(f);
  }
  return all_equal ? 0 : 2;
}

// compress-graph / decompress-graph ---------------------------------------------

struct CompressArgs {
  Common common;
  std::string index;
  std::string model = "uniform";
  double alpha = 1.0;
};

int cmd_compress_graph(const CompressArgs& a) {
  const auto c = Container::read_file(a.index);
  if (is_ivf(c)) throw DomainError("compress-graph needs a graph index");
  const auto g = GraphIndex::from_container(c);
  const auto model = parse_model(a.model, a.alpha);
  const auto out = g.to_container(true, model);
  out.write_file(a.common.out);
  const auto st = g.stats();
  const auto blob = out.get(Container::tag("RECG"));
  const double e = static_cast<double>(std::max<std::uint64_t>(st.num_edges, 1));
  const auto dv = delta_varint_encode(g.graph());
  Report r;
  r.kv("out", a.common.out);
  r.kv("n", st.num_nodes);
  r.kv("edges", st.num_edges);
  r.kv("model", a.model);
  r.kv("rec_bits", rec_state_bits(blob));
  r.kv("rec_bits_per_edge", rec_state_bits(blob) / e, 4);
  r.kv("rec_ideal_uniform_bits_per_edge", rec_uniform_ideal_bits(st.num_nodes, st.num_edges) / e, 4);
  r.kv("per_list_bits_per_edge", st.bits_per_id, 4);
  r.kv("per_list_backend", to_string(st.backend));
  r.kv("delta_varint_bits_per_edge", 8.0 * dv.size() / e, 4);
  r.kv("compact_bits_per_edge", std::ceil(std::log2(static_cast<double>(st.num_nodes))), 0);
  r.print();
  return 0;
}

struct DecompressArgs {
  Common common;
  std::string index;
  std::string friend_ids;
};

int cmd_decompress_graph(const DecompressArgs& a) {
  const auto c = Container::read_file(a.index);
  if (!c.has(Container::tag("RECG"))) throw DomainError("decompress-graph needs a REC-compressed graph index");
  auto g = GraphIndex::from_container(c);
  if (!a.friend_ids.empty()) g = g.with_friend_backend(parse_id_codec(a.friend_ids));
  g.to_container().write_file(a.common.out);
  const auto st = g.stats();
  Report r;
  r.kv("out", a.common.out);
  r.kv("n", st.num_nodes);
  r.kv("edges", st.num_edges);
  r.kv("friend_ids", to_string(st.backend));
  r.kv("bits_per_id", st.bits_per_id, 4);
  r.print();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"annzip: lossless compression of ANN index ids and links"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-synthetic", "Write a Gaussian-mixture fvecs dataset with a label sidecar");
  add_common(g, gen.common, true);
  g->add_option("--n", gen.n, "Database vectors")->capture_default_str();
  g->add_option("--dim", gen.dim, "Dimension")->capture_default_str();
  g->add_option("--clusters", gen.clusters, "Mixture components")->capture_default_str();
  g->add_option("--spread", gen.spread, "Per-coordinate standard deviation")->capture_default_str();
  g->add_option("--queries", gen.queries, "Query vectors drawn from the same mixture")->capture_default_str();
  g->add_option("--queries-out", gen.queries_out, "Query file (default <out>.queries.fvecs)");

  BuildIvfArgs bi;
  auto* b = app.add_subcommand("build-ivf", "Build an IVF index container");
  add_common(b, bi.common, true);
  b->add_option("--data", bi.data, "fvecs/bvecs database")->required();
  b->add_option("--max-rows", bi.max_rows, "Read at most this many vectors (0 = all)");
  b->add_option("--nlist", bi.nlist, "Number of clusters K")->capture_default_str();
  b->add_option("--ids", bi.ids, "unc, compact, ef, roc, wt or wt1")->capture_default_str();
  b->add_option("--codes", bi.codes, "flat, \"pq MxB\" or \"pq-cond MxB\"")->capture_default_str();
  b->add_option("--train-points", bi.train_points, "k-means training sample")->capture_default_str();
  b->add_option("--iterations", bi.iterations, "k-means iterations")->capture_default_str();

  BuildGraphArgs bg;
  auto* gr = app.add_subcommand("build-graph", "Build a graph index container");
  add_common(gr, bg.common, true);
  gr->add_option("--data", bg.data, "fvecs/bvecs database")->required();
  gr->add_option("--max-rows", bg.max_rows, "Read at most this many vectors (0 = all)");
  gr->add_option("--degree", bg.degree, "Max out-degree R")->capture_default_str();
  gr->add_option("--candidates", bg.candidates, "kNN pool per node (0 = 2R)");
  gr->add_option("--brute-limit", bg.brute_limit, "Sample candidates above this many nodes")->capture_default_str();
  gr->add_option("--friend-ids", bg.friend_ids, "unc, compact, ef or roc")->capture_default_str();

  SearchArgs se;
  auto* s = app.add_subcommand("search", "Search an index; --check cross-validates every backend");
  add_common(s, se.common, false);
  s->add_option("--index", se.index, "Index container")->required();
  s->add_option("--queries", se.queries, "fvecs/bvecs queries")->required();
  s->add_option("--gt", se.gt, "ivecs ground truth for recall");
  s->add_option("--k", se.k, "Neighbors per query")->capture_default_str();
  s->add_option("--nprobe", se.nprobe, "IVF clusters to scan")->capture_default_str();
  s->add_option("--beam", se.beam, "Graph search beam width")->capture_default_str();
  s->add_flag("--check", se.check, "Compare all backends; exit 2 on divergence");
  s->add_flag("--deferred", se.deferred, "Deferred id resolution (wt, wt1, ef)");

  StatsArgs st;
  auto* sts = app.add_subcommand("stats", "Print size accounting for an index");
  add_common(sts, st.common, false);
  sts->add_option("--index", st.index, "Index container")->required();
  sts->add_option("--ids", st.ids, "Re-encode under these backends (comma list or all)");
  sts->add_option("--friend-ids", st.ids, "Alias of --ids for graph indexes");

  BenchArgs be;
  auto* bn = app.add_subcommand("bench", "Timed matrix of backends and code configurations");
  add_common(bn, be.common, false);
  bn->add_option("--type", be.type, "ivf or graph")->capture_default_str();
  bn->add_option("--data", be.data, "fvecs/bvecs database")->required();
  bn->add_option("--queries", be.queries, "fvecs/bvecs queries")->required();
  bn->add_option("--max-rows", be.max_rows, "Read at most this many vectors (0 = all)");
  bn->add_option("--nlist", be.nlist, "Number of clusters K")->capture_default_str();
  bn->add_option("--ids,--friend-ids", be.ids, "Backends (comma list or all)")->capture_default_str();
  bn->add_option("--codes", be.codes, "Code configurations (repeatable)");
  bn->add_option("--nprobe", be.nprobe, "IVF clusters to scan")->capture_default_str();
  bn->add_option("--k", be.k, "Neighbors per query")->capture_default_str();
  bn->add_option("--runs", be.runs, "Timed runs per row (median reported)")->capture_default_str();
  bn->add_option("--degree", be.degree, "Graph max out-degree")->capture_default_str();
  bn->add_option("--beam", be.beam, "Graph search beam width")->capture_default_str();
  bn->add_option("--train-points", be.train_points, "k-means training sample")->capture_default_str();
  bn->add_option("--iterations", be.iterations, "k-means iterations")->capture_default_str();

  CompressArgs co;
  auto* cg = app.add_subcommand("compress-graph", "Re-encode a graph index's friend lists as one REC stream");
  add_common(cg, co.common, true);
  cg->add_option("--index", co.index, "Graph index container")->required();
  cg->add_option("--model", co.model, "uniform or polya")->capture_default_str();
  cg->add_option("--alpha", co.alpha, "Polya pseudo-count")->capture_default_str();

  DecompressArgs de;
  auto* dg = app.add_subcommand("decompress-graph", "Restore per-list friend storage from a REC stream");
  add_common(dg, de.common, true);
  dg->add_option("--index", de.index, "REC-compressed graph container")->required();
  dg->add_option("--friend-ids", de.friend_ids, "Per-list backend (default: the one recorded at build)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*g) return cmd_gen(gen);
    if (*b) return cmd_build_ivf(bi);
    if (*gr) return cmd_build_graph(bg);
    if (*s) return cmd_search(se);
    if (*sts) return cmd_stats(st);
    if (*bn) return cmd_bench(be);
    if (*cg) return cmd_compress_graph(co);
    if (*dg) return cmd_decompress_graph(de);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
