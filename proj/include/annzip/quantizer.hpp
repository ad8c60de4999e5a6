#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "annzip/bytes.hpp"

namespace annzip {

/// Row-major N x D float matrix.
struct FloatMatrix {
  std::uint64_t rows = 0;
  std::uint32_t dim = 0;
  std::vector<float> data;

  FloatMatrix() = default;
  FloatMatrix(std::uint64_t n, std::uint32_t d) : rows(n), dim(d), data(n * d, 0.0f) {}

  const float* row(std::uint64_t i) const { return data.data() + i * dim; }
  float* row(std::uint64_t i) { return data.data() + i * dim; }
};

float l2_sqr(const float* a, const float* b, std::uint32_t d);

struct KMeansParams {
  int iterations = 25;
  std::uint64_t seed = 0;
  /// Train on a random subsample of at most this many points (0 = all).
  std::uint64_t max_train_points = 0;
};

/// Lloyd's k-means, L2. Initial centroids are a random sample without
/// replacement; clusters left empty are refilled by splitting the largest one.
std::vector<float> kmeans_train(const float* x, std::uint64_t n, std::uint32_t d, std::uint32_t k,
                                const KMeansParams& params = {});

/// Index and squared distance of the nearest of k centroids.
std::pair<std::uint32_t, float> nearest_centroid(const float* centroids, std::uint32_t k,
                                                 std::uint32_t d, const float* x);
std::vector<std::uint32_t> assign_nearest(const float* centroids, std::uint32_t k, std::uint32_t d,
                                          const float* x, std::uint64_t n);

/// Product quantizer: m sub-quantizers of 2^nbits centroids over D/m dims each.
class ProductQuantizer {
 public:
  ProductQuantizer() = default;
  ProductQuantizer(std::uint32_t dim, std::uint32_t m, std::uint32_t nbits);

  std::uint32_t dim() const { return dim_; }
  std::uint32_t m() const { return m_; }
  std::uint32_t nbits() const { return nbits_; }
  std::uint32_t ksub() const { return 1u << nbits_; }
  std::uint32_t dsub() const { return dim_ / m_; }
  /// Bytes of one packed code row: m bytes for 8-bit codes, else ceil(m * nbits / 8).
  std::uint32_t code_size() const { return (m_ * nbits_ + 7) / 8; }

  void train(const float* x, std::uint64_t n, const KMeansParams& params = {});
  bool trained() const { return !centroids_.empty(); }

  const float* centroid(std::uint32_t sub, std::uint32_t c) const {
    return centroids_.data() + (std::size_t{sub} * ksub() + c) * dsub();
  }
  std::vector<float>& centroids() { return centroids_; }

  /// One code entry per sub-quantizer.
  void encode(const float* x, std::uint16_t* code) const;
  void decode(const std::uint16_t* code, float* x) const;
  /// n x m code matrix.
  std::vector<std::uint16_t> encode_batch(const float* x, std::uint64_t n) const;

  void pack(const std::uint16_t* code, std::uint8_t* out) const;
  void unpack(const std::uint8_t* packed, std::uint16_t* code) const;

  /// m x ksub table of squared distances from each query sub-vector to each centroid.
  std::vector<float> adc_table(const float* query) const;
  float adc_distance(const float* table, const std::uint16_t* code) const {
    float s = 0;
    for (std::uint32_t j = 0; j < m_; ++j) s += table[std::size_t{j} * ksub() + code[j]];
    return s;
  }
  /// Same, reading a packed row.
  float adc_distance_packed(const float* table, const std::uint8_t* packed) const;

  void serialize(ByteWriter& out) const;
  static ProductQuantizer deserialize(ByteReader& in);

 private:
  std::uint32_t dim_ = 0;
  std::uint32_t m_ = 0;
  std::uint32_t nbits_ = 0;
  std::vector<float> centroids_;  // m x ksub x dsub
};

}  // namespace annzip
