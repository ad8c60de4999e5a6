#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "annzip/set_codecs.hpp"

namespace annzip {

struct Neighbor {
  Id id = 0;
  float distance = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Result order: distance ascending, ties by ascending id.
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

/// Bounded max-heap keeping the k smallest neighbors.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

  /// Returns true when the neighbor was kept.
  bool push(float distance, Id id) {
    const Neighbor n{id, distance};
    if (heap_.size() < k_) {
      heap_.push_back(n);
      std::push_heap(heap_.begin(), heap_.end(), neighbor_less);
      return true;
    }
    if (k_ == 0 || !neighbor_less(n, heap_.front())) return false;
    std::pop_heap(heap_.begin(), heap_.end(), neighbor_less);
    heap_.back() = n;
    std::push_heap(heap_.begin(), heap_.end(), neighbor_less);
    return true;
  }

  bool full() const { return heap_.size() >= k_; }
  /// Largest kept neighbor; only valid when non-empty.
  const Neighbor& worst() const { return heap_.front(); }

  /// Largest kept distance, or +inf while not full.
  float threshold() const {
    return heap_.size() < k_ ? std::numeric_limits<float>::infinity() : heap_.front().distance;
  }

  std::vector<Neighbor> sorted() const {
    std::vector<Neighbor> out = heap_;
    std::sort(out.begin(), out.end(), neighbor_less);
    return out;
  }

 private:
  std::size_t k_;
  std::vector<Neighbor> heap_;
};

/// A scanned entry whose id is not known yet: (cluster, offset) plus distance.
struct CandidateRef {
  std::uint32_t cluster = 0;
  std::uint32_t offset = 0;
  float distance = 0;
  std::int64_t id = -1;  // filled on first resolution
};

/// Top-k over candidate refs. Ids are resolved only when two distances from
/// different clusters tie, and at the end for the survivors; every resolution
/// goes through `resolve`.
template <class Resolver>
class DeferredTopK {
 public:
  DeferredTopK(std::size_t k, Resolver resolve) : k_(k), resolve_(std::move(resolve)) { heap_.reserve(k); }

  void push(float distance, std::uint32_t cluster, std::uint32_t offset) {
    CandidateRef c{cluster, offset, distance, -1};
    auto less = [this](CandidateRef& a, CandidateRef& b) { return ref_less(a, b); };
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end(), less);
    } else if (k_ > 0 && distance <= heap_.front().distance && ref_less(c, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), less);
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end(), less);
    }
  }

  std::vector<Neighbor> resolve_sorted() {
    std::vector<Neighbor> out;
    out.reserve(heap_.size());
    for (auto& c : heap_) out.push_back({id_of(c), c.distance});
    std::sort(out.begin(), out.end(), neighbor_less);
    return out;
  }

  std::uint64_t resolutions() const { return resolutions_; }

 private:
  Id id_of(CandidateRef& c) {
    if (c.id < 0) {
      c.id = resolve_(c.cluster, c.offset);
      ++resolutions_;
    }
    return static_cast<Id>(c.id);
  }

  bool ref_less(CandidateRef& a, CandidateRef& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.cluster == b.cluster) return a.offset < b.offset;  // lists are stored in ascending id order
    return id_of(a) < id_of(b);
  }

  std::size_t k_;
  Resolver resolve_;
  std::vector<CandidateRef> heap_;
  std::uint64_t resolutions_ = 0;
};

}  // namespace annzip
