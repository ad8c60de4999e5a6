#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "annzip/container.hpp"
#include "annzip/pq_entropy.hpp"
#include "annzip/quantizer.hpp"
#include "annzip/set_codecs.hpp"
#include "annzip/topk.hpp"
#include "annzip/wavelet_tree.hpp"

namespace annzip {

enum class IdBackend : std::uint8_t { kUnc = 0, kCompact = 1, kEf = 2, kRoc = 3, kWt = 4, kWt1 = 5 };

std::string_view to_string(IdBackend b);
IdBackend parse_id_backend(std::string_view name);
inline constexpr IdBackend kAllIdBackends[] = {IdBackend::kUnc, IdBackend::kCompact, IdBackend::kEf,
                                               IdBackend::kRoc, IdBackend::kWt,      IdBackend::kWt1};

/// Vector ids of every inverted list. Members of a cluster are always exposed
/// in ascending id order, so offsets line up with the code storage.
class IdStorage {
 public:
  IdStorage() = default;
  /// assignment[i] is the cluster of vector i.
  static IdStorage build(IdBackend backend, std::span<const std::uint32_t> assignment, std::uint32_t nlist);

  IdBackend backend() const { return backend_; }
  std::uint64_t num_ids() const { return num_ids_; }
  std::uint32_t nlist() const { return static_cast<std::uint32_t>(sizes_.size()); }
  std::uint64_t cluster_size(std::uint32_t k) const { return sizes_[k]; }

  /// Ascending member ids of cluster k. `roc` is scratch for ROC decoding.
  void decode_cluster(std::uint32_t k, std::vector<Id>& out, RocCoder* roc = nullptr) const;
  /// True for WT, WT1 and EF, which can map (cluster, offset) to an id directly.
  bool random_access() const;
  Id resolve(std::uint32_t k, std::uint64_t offset) const;

  /// Id payload bits: block payloads, or the whole wavelet tree with directories.
  std::uint64_t bits() const;
  double bits_per_id() const { return num_ids_ == 0 ? 0.0 : static_cast<double>(bits()) / num_ids_; }
  const CompressedIdBlock& block(std::uint32_t k) const { return blocks_[k]; }
  const WaveletTree& wavelet_tree() const { return wt_; }

  std::vector<std::uint32_t> assignment() const;

  void serialize(ByteWriter& out) const;
  static IdStorage deserialize(ByteReader& in);

 private:
  void build_views();

  IdBackend backend_ = IdBackend::kUnc;
  std::uint64_t num_ids_ = 0;
  std::vector<std::uint64_t> sizes_;
  std::vector<CompressedIdBlock> blocks_;
  std::vector<EfView> ef_views_;
  WaveletTree wt_;
};

enum class CodeKind : std::uint8_t { kFlat = 0, kPq = 1, kPqCond = 2 };

struct CodeSpec {
  CodeKind kind = CodeKind::kFlat;
  std::uint32_t m = 0;
  std::uint32_t nbits = 8;
};

std::string to_string(const CodeSpec& spec);
/// "flat", "pq16x8", "pq-cond 16x8", "pq:16x8", ...
CodeSpec parse_code_spec(std::string_view text);

struct IvfBuildParams {
  std::uint32_t nlist = 1024;
  IdBackend ids = IdBackend::kRoc;
  CodeSpec codes;
  KMeansParams kmeans{25, 0, 65536};
  std::uint64_t pq_train_points = 65536;
  int pq_iterations = 25;
};

struct SearchParams {
  std::size_t k = 10;
  std::uint32_t nprobe = 16;
};

struct IvfStats {
  std::uint64_t num_ids = 0;
  std::uint32_t nlist = 0;
  IdBackend backend = IdBackend::kUnc;
  std::uint64_t id_bits = 0;
  double bits_per_id = 0;
  double savings_bits = 0;  // sum over clusters of log2(N_k!)
  std::uint64_t min_cluster = 0;
  std::uint64_t max_cluster = 0;
  CodeSpec codes;
  std::uint64_t code_bits = 0;
  std::uint64_t code_entries = 0;
  double code_bpe = 0;  // bits per code entry
};

class IvfIndex {
 public:
  IvfIndex() = default;

  /// Trains the coarse quantizer unless `centroids` (nlist x D) is given.
  static IvfIndex build(const FloatMatrix& x, const IvfBuildParams& params,
                        const std::vector<float>* centroids = nullptr);

  std::uint64_t size() const { return ids_.num_ids(); }
  std::uint32_t dim() const { return dim_; }
  std::uint32_t nlist() const { return ids_.nlist(); }
  const IdStorage& ids() const { return ids_; }
  const CodeSpec& code_spec() const { return codes_; }
  const std::vector<float>& centroids() const { return centroids_; }
  const ProductQuantizer& pq() const { return pq_; }

  /// Same index with the ids re-encoded under another backend.
  IvfIndex with_id_backend(IdBackend backend) const;
  /// Switches between raw and conditional PQ code storage (same codebook).
  IvfIndex with_code_kind(CodeKind kind) const;

  /// Streaming search: ids are decoded per probed cluster. WT backends go
  /// through the deferred path, since they have no per-cluster lists.
  std::vector<std::vector<Neighbor>> search(const FloatMatrix& queries, const SearchParams& params) const;
  /// Scans with (cluster, offset) candidates and resolves only the survivors.
  /// Needs a random-access backend (WT, WT1, EF); `resolutions` gets the total count.
  std::vector<std::vector<Neighbor>> search_deferred(const FloatMatrix& queries, const SearchParams& params,
                                                     std::uint64_t* resolutions = nullptr) const;

  IvfStats stats() const;

  Container to_container() const;
  static IvfIndex from_container(const Container& c);

 private:
  struct Scratch;

  std::vector<std::uint32_t> probe(const float* q, std::uint32_t nprobe) const;
  std::vector<float> query_table(const float* q) const;
  /// Calls f(offset, distance) for every member of cluster k.
  template <class F>
  void scan_cluster(std::uint32_t k, const float* q, const float* table, Scratch& s, F&& f) const;
  void check_params(const SearchParams& params) const;

  std::uint32_t dim_ = 0;
  std::vector<float> centroids_;
  IdStorage ids_;
  CodeSpec codes_;
  ProductQuantizer pq_;
  std::vector<std::vector<float>> flat_;                // per cluster, rows in id order
  std::vector<std::vector<std::uint8_t>> packed_;       // per cluster, packed PQ rows
  std::vector<ClusterCodeBlock> cond_;                  // per cluster, conditional columns
};

}  // namespace annzip
