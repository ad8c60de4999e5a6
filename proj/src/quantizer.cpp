#include "annzip/quantizer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "annzip/errors.hpp"

namespace annzip {

namespace {

// Partial Fisher-Yates over [0, n); raw generator output keeps it portable.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::uint64_t i = 0; i < k; ++i) std::swap(perm[i], perm[i + rng() % (n - i)]);
  perm.resize(k);
  return perm;
}

}  // namespace

float l2_sqr(const float* a, const float* b, std::uint32_t d) {
  float s = 0;
  for (std::uint32_t i = 0; i < d; ++i) {
    const float t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

std::pair<std::uint32_t, float> nearest_centroid(const float* centroids, std::uint32_t k, std::uint32_t d,
                                                 const float* x) {
  std::uint32_t best = 0;
  float best_d = std::numeric_limits<float>::infinity();
  for (std::uint32_t c = 0; c < k; ++c) {
    const float dist = l2_sqr(x, centroids + std::size_t{c} * d, d);
    if (dist < best_d) {
      best_d = dist;
      best = c;
    }
  }
  return {best, best_d};
}

std::vector<std::uint32_t> assign_nearest(const float* centroids, std::uint32_t k, std::uint32_t d,
                                          const float* x, std::uint64_t n) {
  std::vector<std::uint32_t> out(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    out[i] = nearest_centroid(centroids, k, d, x + static_cast<std::size_t>(i) * d).first;
  }
  return out;
}

std::vector<float> kmeans_train(const float* x, std::uint64_t n, std::uint32_t d, std::uint32_t k,
                                const KMeansParams& params) {
  if (k == 0 || k > n) throw DomainError("k-means needs 1 <= k <= n");
  if (d == 0) throw DomainError("k-means needs a positive dimension");

  std::vector<float> sub;
  if (params.max_train_points != 0 && n > params.max_train_points) {
    const std::uint64_t tn = std::max<std::uint64_t>(params.max_train_points, k);
    const auto pick = sample_without_replacement(n, tn, params.seed ^ 0x5eedull);
    sub.resize(tn * d);
    for (std::uint64_t i = 0; i < tn; ++i) std::copy_n(x + pick[i] * d, d, sub.data() + i * d);
    x = sub.data();
    n = tn;
  }

  std::vector<float> cent(std::size_t{k} * d);
  const auto init = sample_without_replacement(n, k, params.seed);
  for (std::uint32_t c = 0; c < k; ++c) std::copy_n(x + init[c] * d, d, cent.data() + std::size_t{c} * d);

  std::vector<std::uint32_t> assign(n, k);
  std::vector<double> sums(std::size_t{k} * d);
  std::vector<std::uint64_t> sizes(k);
  for (int it = 0; it < params.iterations; ++it) {
    const auto next = assign_nearest(cent.data(), k, d, x, n);
    if (next == assign) break;
    assign = next;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::uint32_t c = assign[i];
      sizes[c]++;
      for (std::uint32_t j = 0; j < d; ++j) sums[std::size_t{c} * d + j] += x[i * d + j];
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      for (std::uint32_t j = 0; j < d; ++j) {
        cent[std::size_t{c} * d + j] = static_cast<float>(sums[std::size_t{c} * d + j] / sizes[c]);
      }
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      const auto big = static_cast<std::uint32_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      if (sizes[big] < 2) break;
      constexpr float eps = 1.0f / 1024;
      float* dst = cent.data() + std::size_t{c} * d;
      float* src = cent.data() + std::size_t{big} * d;
      for (std::uint32_t j = 0; j < d; ++j) {
        const float s = (j % 2 == 0) ? eps : -eps;
        dst[j] = src[j] * (1 + s) + s;
        src[j] = src[j] * (1 - s) - s;
      }
      sizes[c] = sizes[big] / 2;
      sizes[big] -= sizes[c];
    }
  }
  return cent;
}

ProductQuantizer::ProductQuantizer(std::uint32_t dim, std::uint32_t m, std::uint32_t nbits)
    : dim_(dim), m_(m), nbits_(nbits) {
  if (m == 0 || dim == 0 || dim % m != 0) throw DomainError("PQ needs D divisible by m");
  if (nbits == 0 || nbits > 16) throw DomainError("PQ bits per entry must be in [1, 16]");
}

void ProductQuantizer::train(const float* x, std::uint64_t n, const KMeansParams& params) {
  if (n < ksub()) throw DomainError("PQ training needs at least 2^nbits points");
  const std::uint32_t ds = dsub();
  centroids_.assign(std::size_t{m_} * ksub() * ds, 0.0f);
  std::vector<float> slice(n * ds);
  for (std::uint32_t j = 0; j < m_; ++j) {
    for (std::uint64_t i = 0; i < n; ++i) std::copy_n(x + i * dim_ + j * ds, ds, slice.data() + i * ds);
    KMeansParams p = params;
    p.seed = params.seed + 1000003ull * j;
    const auto c = kmeans_train(slice.data(), n, ds, ksub(), p);
    std::copy(c.begin(), c.end(), centroids_.begin() + std::size_t{j} * ksub() * ds);
  }
}

void ProductQuantizer::encode(const float* x, std::uint16_t* code) const {
  for (std::uint32_t j = 0; j < m_; ++j) {
    code[j] = static_cast<std::uint16_t>(nearest_centroid(centroid(j, 0), ksub(), dsub(), x + j * dsub()).first);
  }
}

void ProductQuantizer::decode(const std::uint16_t* code, float* x) const {
  for (std::uint32_t j = 0; j < m_; ++j) std::copy_n(centroid(j, code[j]), dsub(), x + j * dsub());
}

std::vector<std::uint16_t> ProductQuantizer::encode_batch(const float* x, std::uint64_t n) const {
  std::vector<std::uint16_t> codes(n * m_);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    encode(x + static_cast<std::size_t>(i) * dim_, codes.data() + static_cast<std::size_t>(i) * m_);
  }
  return codes;
}

void ProductQuantizer::pack(const std::uint16_t* code, std::uint8_t* out) const {
  if (nbits_ == 8) {
    for (std::uint32_t j = 0; j < m_; ++j) out[j] = static_cast<std::uint8_t>(code[j]);
    return;
  }
  std::fill_n(out, code_size(), 0);
  std::uint64_t pos = 0;
  for (std::uint32_t j = 0; j < m_; ++j, pos += nbits_) {
    for (std::uint32_t b = 0; b < nbits_; ++b) {
      if ((code[j] >> b) & 1) out[(pos + b) >> 3] |= static_cast<std::uint8_t>(1u << ((pos + b) & 7));
    }
  }
}

void ProductQuantizer::unpack(const std::uint8_t* packed, std::uint16_t* code) const {
  if (nbits_ == 8) {
    for (std::uint32_t j = 0; j < m_; ++j) code[j] = packed[j];
    return;
  }
  BitReader br(std::span<const std::uint8_t>(packed, code_size()));
  for (std::uint32_t j = 0; j < m_; ++j) code[j] = static_cast<std::uint16_t>(br.get(std::uint64_t{j} * nbits_, nbits_));
}

std::vector<float> ProductQuantizer::adc_table(const float* query) const {
  std::vector<float> table(std::size_t{m_} * ksub());
  for (std::uint32_t j = 0; j < m_; ++j) {
    for (std::uint32_t c = 0; c < ksub(); ++c) {
      table[std::size_t{j} * ksub() + c] = l2_sqr(query + j * dsub(), centroid(j, c), dsub());
    }
  }
  return table;
}

float ProductQuantizer::adc_distance_packed(const float* table, const std::uint8_t* packed) const {
  float s = 0;
  if (nbits_ == 8) {
    for (std::uint32_t j = 0; j < m_; ++j) s += table[std::size_t{j} * 256 + packed[j]];
    return s;
  }
  std::uint64_t pos = 0;
  const std::uint32_t mask = ksub() - 1;
  for (std::uint32_t j = 0; j < m_; ++j, pos += nbits_) {
    std::uint32_t v = 0;
    const std::uint64_t byte = pos >> 3;
    const int nb = static_cast<int>(((pos & 7) + nbits_ + 7) / 8);
    for (int i = 0; i < nb; ++i) v |= std::uint32_t{packed[byte + i]} << (8 * i);
    s += table[std::size_t{j} * ksub() + ((v >> (pos & 7)) & mask)];
  }
  return s;
}

void ProductQuantizer::serialize(ByteWriter& out) const {
  out.put_u32(dim_);
  out.put_u32(m_);
  out.put_u32(nbits_);
  out.put_pod_array<float>(centroids_);
}

ProductQuantizer ProductQuantizer::deserialize(ByteReader& in) {
  const std::uint32_t dim = in.get_u32();
  const std::uint32_t m = in.get_u32();
  const std::uint32_t nbits = in.get_u32();
  ProductQuantizer pq(dim, m, nbits);
  pq.centroids_ = in.get_pod_array<float>(std::size_t{m} * pq.ksub() * pq.dsub());
  return pq;
}

}  // namespace annzip
