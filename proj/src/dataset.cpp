#include "annzip/dataset.hpp"

#include <cstring>
#include <fstream>
#include <random>

#include "annzip/errors.hpp"

namespace annzip {

namespace {

std::size_t value_size(VecFormat f) { return f == VecFormat::kBvecs ? 1 : 4; }

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  return f;
}

/// Reads records until EOF. Calls row(values_bytes) per record.
template <class F>
std::uint32_t read_records(std::ifstream& f, VecFormat format, std::uint64_t max_rows, F&& row) {
  std::uint32_t dim = 0;
  std::vector<char> buf;
  for (std::uint64_t r = 0; max_rows == 0 || r < max_rows; ++r) {
    std::uint32_t d = 0;
    f.read(reinterpret_cast<char*>(&d), 4);
    if (f.gcount() == 0 && f.eof()) break;
    if (f.gcount() != 4) throw FormatError("truncated record header");
    if (d == 0) throw FormatError("record with zero dimension");
    if (r == 0) dim = d;
    if (d != dim) throw FormatError("record " + std::to_string(r) + " has dimension " + std::to_string(d) +
                                    ", expected " + std::to_string(dim));
    buf.resize(std::size_t{d} * value_size(format));
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(f.gcount()) != buf.size()) throw FormatError("truncated record");
    row(buf);
  }
  return dim;
}

}  // namespace

VecFormat vec_format_of(std::string_view path) {
  if (path.ends_with(".fvecs")) return VecFormat::kFvecs;
  if (path.ends_with(".bvecs")) return VecFormat::kBvecs;
  if (path.ends_with(".ivecs")) return VecFormat::kIvecs;
  throw DomainError("unknown vector file extension: " + std::string(path));
}

FloatMatrix load_vectors(const std::string& path, std::uint64_t max_rows) {
  return load_vectors(path, vec_format_of(path), max_rows);
}

FloatMatrix load_vectors(const std::string& path, VecFormat format, std::uint64_t max_rows) {
  if (format == VecFormat::kIvecs) throw DomainError("ivecs holds integer rows; use load_ivecs");
  auto f = open_in(path);
  FloatMatrix x;
  const std::uint32_t dim = read_records(f, format, max_rows, [&](const std::vector<char>& b) {
    const std::size_t old = x.data.size();
    if (format == VecFormat::kFvecs) {
      x.data.resize(old + b.size() / 4);
      std::memcpy(x.data.data() + old, b.data(), b.size());
    } else {
      for (char c : b) x.data.push_back(static_cast<float>(static_cast<unsigned char>(c)));
    }
    x.rows++;
  });
  x.dim = dim;
  return x;
}

std::vector<std::vector<std::int32_t>> load_ivecs(const std::string& path) {
  auto f = open_in(path);
  std::vector<std::vector<std::int32_t>> rows;
  read_records(f, VecFormat::kIvecs, 0, [&](const std::vector<char>& b) {
    rows.emplace_back(b.size() / 4);
    std::memcpy(rows.back().data(), b.data(), b.size());
  });
  return rows;
}

void write_fvecs(const std::string& path, const FloatMatrix& x) {
  auto f = open_out(path);
  for (std::uint64_t i = 0; i < x.rows; ++i) {
    f.write(reinterpret_cast<const char*>(&x.dim), 4);
    f.write(reinterpret_cast<const char*>(x.row(i)), std::streamsize{4} * x.dim);
  }
  if (!f) throw Error("write failed for " + path);
}

void write_bvecs(const std::string& path, const FloatMatrix& x) {
  auto f = open_out(path);
  std::vector<unsigned char> b(x.dim);
  for (std::uint64_t i = 0; i < x.rows; ++i) {
    for (std::uint32_t j = 0; j < x.dim; ++j) {
      const float v = x.row(i)[j];
      if (!(v >= 0.0f && v <= 255.0f)) throw DomainError("bvecs values must lie in [0, 255]");
      b[j] = static_cast<unsigned char>(v + 0.5f);
    }
    f.write(reinterpret_cast<const char*>(&x.dim), 4);
    f.write(reinterpret_cast<const char*>(b.data()), x.dim);
  }
  if (!f) throw Error("write failed for " + path);
}

void write_ivecs(const std::string& path, const std::vector<std::vector<std::int32_t>>& rows) {
  auto f = open_out(path);
  for (const auto& r : rows) {
    const auto d = static_cast<std::uint32_t>(r.size());
    f.write(reinterpret_cast<const char*>(&d), 4);
    f.write(reinterpret_cast<const char*>(r.data()), std::streamsize{4} * d);
  }
  if (!f) throw Error("write failed for " + path);
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.dim == 0 || spec.clusters == 0) throw DomainError("synthetic spec must be non-empty");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::normal_distribution<float> noise(0.0f, spec.spread);
  SyntheticData out;
  out.centers = FloatMatrix(spec.clusters, spec.dim);
  for (auto& v : out.centers.data) v = unit(rng);
  out.vectors = FloatMatrix(spec.n, spec.dim);
  out.labels.resize(spec.n);
  for (std::uint64_t i = 0; i < spec.n; ++i) {
    const auto c = static_cast<std::uint32_t>(rng() % spec.clusters);
    out.labels[i] = c;
    for (std::uint32_t j = 0; j < spec.dim; ++j) out.vectors.row(i)[j] = out.centers.row(c)[j] + noise(rng);
  }
  return out;
}

std::vector<std::uint32_t> uniform_assignment(std::uint64_t n, std::uint32_t k, std::uint64_t seed) {
  if (k == 0) throw DomainError("k must be positive");
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> a(n);
  for (auto& x : a) x = static_cast<std::uint32_t>(rng() % k);
  return a;
}

}  // namespace annzip
