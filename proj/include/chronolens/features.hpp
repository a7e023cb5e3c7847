#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "chronolens/common.hpp"

namespace chronolens {

// Row-major matrix of per-sample feature vectors. Stored as f32, matching
// the on-disk format; solvers accumulate in double.
struct FeatureMatrix {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<float> values;

  static FeatureMatrix zeros(std::size_t n, std::size_t dim) {
    FeatureMatrix m;
    m.n = n;
    m.dim = dim;
    m.values.assign(n * dim, 0.0f);
    return m;
  }

  std::span<const float> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  std::span<float> row(std::size_t i) {
    return {values.data() + i * dim, dim};
  }
};

// ---------------------------------------------------------------------------
// Feature file: "CHRN" magic, u16 version, u64 n, u64 dim, then n*dim
// little-endian f32. Round-trips byte-exactly.
// ---------------------------------------------------------------------------

inline constexpr char kFeatureMagic[4] = {'C', 'H', 'R', 'N'};
inline constexpr std::uint16_t kFeatureVersion = 1;

inline void save_features(const std::filesystem::path& path,
                          const FeatureMatrix& m) {
  std::ostringstream out(std::ios::binary);
  io::write_bytes(out, kFeatureMagic, 4);
  io::write_le<std::uint16_t>(out, kFeatureVersion);
  io::write_le<std::uint64_t>(out, m.n);
  io::write_le<std::uint64_t>(out, m.dim);
  for (float v : m.values) io::write_f32_le(out, v);
  io::commit_bytes(path, out.str());
}

// expected_n / expected_dim of 0 accept any size.
inline FeatureMatrix load_features(const std::filesystem::path& path,
                                   std::size_t expected_n = 0,
                                   std::size_t expected_dim = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptFile("cannot open features " + path.string());
  char magic[4] = {};
  if (!io::read_bytes(in, magic, 4) || std::memcmp(magic, kFeatureMagic, 4)) {
    throw CorruptFile("bad magic in " + path.string());
  }
  std::uint16_t version = 0;
  std::uint64_t n = 0, dim = 0;
  if (!io::read_le(in, version) || !io::read_le(in, n) || !io::read_le(in, dim)) {
    throw CorruptFile("truncated header in " + path.string());
  }
  if (version != kFeatureVersion) {
    throw VersionMismatch("feature file version " + std::to_string(version) +
                          ", expected " + std::to_string(kFeatureVersion));
  }
  if ((expected_n && n != expected_n) || (expected_dim && dim != expected_dim)) {
    throw ShapeMismatch("feature file is " + std::to_string(n) + "x" +
                        std::to_string(dim) + ", expected " +
                        std::to_string(expected_n) + "x" +
                        std::to_string(expected_dim));
  }
  FeatureMatrix m;
  m.n = n;
  m.dim = dim;
  m.values.resize(n * dim);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    if (!io::read_f32_le(in, m.values[i])) {
      throw ShapeMismatch("feature payload ends at value " +
                          std::to_string(i) + " of " +
                          std::to_string(m.values.size()));
    }
    if (!std::isfinite(m.values[i])) {
      throw NonFiniteValue("non-finite feature at flat index " +
                           std::to_string(i));
    }
  }
  return m;
}

// Scales every row to unit L2 norm; zero rows are left untouched. Optional
// preprocessing behind a flag; the default pipeline is the identity.
inline void l2_normalize_rows(FeatureMatrix& m) {
  for (std::size_t i = 0; i < m.n; ++i) {
    auto r = m.row(i);
    double sq = 0.0;
    for (float v : r) sq += static_cast<double>(v) * v;
    if (sq <= 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (float& v : r) v = static_cast<float>(v * inv);
  }
}

}  // namespace chronolens
