#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "annzip/quantizer.hpp"

using namespace annzip;

namespace {

FloatMatrix gaussian(std::uint64_t n, std::uint32_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  FloatMatrix m(n, d);
  for (auto& v : m.data) v = g(rng);
  return m;
}

double mean_reconstruction_error(const ProductQuantizer& pq, const FloatMatrix& x) {
  std::vector<std::uint16_t> code(pq.m());
  std::vector<float> back(x.dim);
  double err = 0;
  for (std::uint64_t i = 0; i < x.rows; ++i) {
    pq.encode(x.row(i), code.data());
    pq.decode(code.data(), back.data());
    err += l2_sqr(x.row(i), back.data(), x.dim);
  }
  return err / static_cast<double>(x.rows);
}

}  // namespace

TEST(KMeans, KEqualsNIsExact) {
  const FloatMatrix x = gaussian(50, 4, 1);
  const auto c = kmeans_train(x.data.data(), 50, 4, 50);
  const auto a = assign_nearest(c.data(), 50, 4, x.data.data(), 50);
  for (std::uint64_t i = 0; i < 50; ++i) {
    EXPECT_EQ(l2_sqr(x.row(i), c.data() + a[i] * 4, 4), 0.0f);
  }
  EXPECT_THROW(kmeans_train(x.data.data(), 50, 4, 51), DomainError);
}

TEST(KMeans, RecoversSeparatedBlobs) {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> g(0.0f, 1.0f);
  const std::uint64_t n = 2000;
  FloatMatrix x(n, 8);
  std::vector<int> label(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    label[i] = static_cast<int>(i % 2);
    for (std::uint32_t j = 0; j < 8; ++j) x.row(i)[j] = g(rng) + (label[i] ? 20.0f : -20.0f);
  }
  const auto c = kmeans_train(x.data.data(), n, 8, 2, {25, 3, 0});
  const auto a = assign_nearest(c.data(), 2, 8, x.data.data(), n);
  std::uint64_t agree = 0;
  for (std::uint64_t i = 0; i < n; ++i) agree += static_cast<int>(a[i]) == label[i];
  const std::uint64_t best = std::max(agree, n - agree);
  EXPECT_GE(best, n * 99 / 100);
}

TEST(KMeans, DeterministicAndNoEmptyClusters) {
  const FloatMatrix x = gaussian(3000, 8, 4);
  const auto a = kmeans_train(x.data.data(), 3000, 8, 64, {25, 9, 1000});
  const auto b = kmeans_train(x.data.data(), 3000, 8, 64, {25, 9, 1000});
  EXPECT_EQ(a, b);
  // Duplicate points force empty clusters that need repair.
  FloatMatrix dup(400, 2);
  for (std::uint64_t i = 0; i < 400; ++i) dup.row(i)[0] = static_cast<float>(i % 4);
  const auto c = kmeans_train(dup.data.data(), 400, 2, 8, {25, 1, 0});
  const auto asg = assign_nearest(c.data(), 8, 2, dup.data.data(), 400);
  std::vector<int> used(8, 0);
  for (auto v : asg) used[v] = 1;
  EXPECT_GE(std::accumulate(used.begin(), used.end(), 0), 4);
}

TEST(ProductQuantizer, RejectsBadShapes) {
  EXPECT_THROW(ProductQuantizer(10, 3, 8), DomainError);
  EXPECT_THROW(ProductQuantizer(8, 1, 0), DomainError);
  EXPECT_THROW(ProductQuantizer(8, 0, 8), DomainError);
}

TEST(ProductQuantizer, CentroidConcatenationIsFixedPoint) {
  const FloatMatrix x = gaussian(2000, 16, 5);
  ProductQuantizer pq(16, 4, 6);
  pq.train(x.data.data(), 2000, {10, 1, 0});
  const std::uint16_t code[4] = {3, 60, 0, 17};
  std::vector<float> v(16);
  pq.decode(code, v.data());
  std::uint16_t again[4];
  pq.encode(v.data(), again);
  std::vector<float> w(16);
  pq.decode(again, w.data());
  EXPECT_EQ(v, w);
}

TEST(ProductQuantizer, ErrorDecreasesWithBits) {
  const FloatMatrix x = gaussian(4000, 16, 6);
  double prev = 1e30;
  for (std::uint32_t b : {4u, 6u, 8u}) {
    ProductQuantizer pq(16, 4, b);
    pq.train(x.data.data(), x.rows, {15, 2, 0});
    const double err = mean_reconstruction_error(pq, x);
    EXPECT_LT(err, prev) << b;
    prev = err;
  }
}

TEST(ProductQuantizer, AdcMatchesDecodedDistance) {
  const FloatMatrix x = gaussian(3000, 32, 7);
  ProductQuantizer pq(32, 8, 8);
  pq.train(x.data.data(), x.rows, {10, 3, 0});
  const auto codes = pq.encode_batch(x.data.data(), x.rows);
  const FloatMatrix q = gaussian(1000, 32, 8);
  std::vector<float> dec(32);
  std::vector<std::uint8_t> packed(pq.code_size());
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto table = pq.adc_table(q.row(i));
    const std::uint16_t* code = codes.data() + (i % x.rows) * 8;
    pq.decode(code, dec.data());
    const float exact = l2_sqr(q.row(i), dec.data(), 32);
    EXPECT_NEAR(pq.adc_distance(table.data(), code), exact, 1e-4f * std::max(1.0f, exact));
    pq.pack(code, packed.data());
    EXPECT_EQ(pq.adc_distance_packed(table.data(), packed.data()), pq.adc_distance(table.data(), code));
  }
  // Query equal to a decoded code.
  pq.decode(codes.data(), dec.data());
  const auto t0 = pq.adc_table(dec.data());
  EXPECT_NEAR(pq.adc_distance(t0.data(), codes.data()), 0.0f, 1e-6f);
}

TEST(ProductQuantizer, TenBitTablesAndPacking) {
  const FloatMatrix x = gaussian(2048, 16, 9);
  ProductQuantizer pq8(16, 8, 8);
  ProductQuantizer pq10(16, 8, 10);
  pq8.train(x.data.data(), x.rows, {2, 1, 0});
  pq10.train(x.data.data(), x.rows, {2, 1, 0});
  EXPECT_EQ(pq10.adc_table(x.row(0)).size(), 4 * pq8.adc_table(x.row(0)).size());
  EXPECT_EQ(pq10.code_size(), 10u);
  std::mt19937_64 rng(10);
  std::vector<std::uint16_t> code(8), back(8);
  std::vector<std::uint8_t> packed(10);
  for (int t = 0; t < 1000; ++t) {
    for (auto& c : code) c = static_cast<std::uint16_t>(rng() % 1024);
    pq10.pack(code.data(), packed.data());
    pq10.unpack(packed.data(), back.data());
    ASSERT_EQ(code, back);
  }
  ByteWriter out;
  pq10.serialize(out);
  const auto bytes = out.take();
  ByteReader in(bytes);
  const auto again = ProductQuantizer::deserialize(in);
  EXPECT_EQ(again.adc_table(x.row(3)), pq10.adc_table(x.row(3)));
}
