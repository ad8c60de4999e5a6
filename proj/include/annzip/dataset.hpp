#pragma once

// Vector files: every record is a little-endian u32 dimension followed by D
// values (fvecs: f32, bvecs: u8, ivecs: i32). All records share D.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "annzip/quantizer.hpp"

namespace annzip {

enum class VecFormat { kFvecs, kBvecs, kIvecs };

/// Format from the file extension.
VecFormat vec_format_of(std::string_view path);

/// Loads fvecs or bvecs as floats. `max_rows` = 0 reads everything.
FloatMatrix load_vectors(const std::string& path, std::uint64_t max_rows = 0);
FloatMatrix load_vectors(const std::string& path, VecFormat format, std::uint64_t max_rows = 0);
/// ivecs rows (e.g. ground truth), one vector per record.
std::vector<std::vector<std::int32_t>> load_ivecs(const std::string& path);

void write_fvecs(const std::string& path, const FloatMatrix& x);
void write_bvecs(const std::string& path, const FloatMatrix& x);
void write_ivecs(const std::string& path, const std::vector<std::vector<std::int32_t>>& rows);

struct SyntheticSpec {
  std::uint64_t n = 10000;
  std::uint32_t dim = 16;
  std::uint32_t clusters = 64;
  float spread = 0.05f;  // per-coordinate standard deviation around a center in [0,1)^D
  std::uint64_t seed = 0;
};

struct SyntheticData {
  FloatMatrix vectors;
  FloatMatrix centers;
  std::vector<std::uint32_t> labels;  // generating center of each vector
};

/// Gaussian mixture with equal weights; deterministic in the seed.
SyntheticData gen_synthetic(const SyntheticSpec& spec);

/// n i.i.d. uniform cluster labels in [0, k).
std::vector<std::uint32_t> uniform_assignment(std::uint64_t n, std::uint32_t k, std::uint64_t seed);

}  // namespace annzip
