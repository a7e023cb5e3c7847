#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chronolens/common.hpp"
#include "chronolens/linear.hpp"
#include "chronolens/net.hpp"

namespace chronolens {

// Model container: "CHRM" magic, u16 version, u16 kind, kind-specific
// payload, then a CRC32 over everything before it. All integers little
// endian, all parameters f64.
inline constexpr char kModelMagic[4] = {'C', 'H', 'R', 'M'};
inline constexpr std::uint16_t kModelVersion = 1;

enum class ModelKind : std::uint16_t {
  linear_svm = 1,
  linear_svr = 2,
  micronet = 3,
};

namespace detail {

// Serialized bytes are staged in memory so the CRC can cover the whole
// record before anything touches the filesystem.
inline void commit_file(const std::filesystem::path& path,
                        const std::string& body) {
  std::ostringstream out(std::ios::binary);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  io::write_le<std::uint32_t>(out, io::crc32(body.data(), body.size()));
  io::commit_bytes(path, out.str());
}

inline std::string read_checked(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptFile("cannot open " + path.string());
  std::ostringstream buf(std::ios::binary);
  buf << in.rdbuf();
  std::string data = buf.str();
  if (data.size() < 4 + 2 + 2 + 4) {
    throw CorruptFile(path.string() + ": too short for a model record");
  }
  const std::size_t body_len = data.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<std::uint32_t>(
                  static_cast<unsigned char>(data[body_len + i]))
              << (8 * i);
  }
  if (io::crc32(data.data(), body_len) != stored) {
    throw CorruptFile(path.string() + ": checksum mismatch");
  }
  data.resize(body_len);
  return data;
}

inline void write_header(std::ostream& out, ModelKind kind) {
  io::write_bytes(out, kModelMagic, 4);
  io::write_le<std::uint16_t>(out, kModelVersion);
  io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(kind));
}

inline ModelKind read_header(std::istream& in, const std::string& origin) {
  char magic[4];
  if (!io::read_bytes(in, magic, 4) || std::string(magic, 4) != "CHRM") {
    throw CorruptFile(origin + ": bad magic");
  }
  std::uint16_t version = 0, kind = 0;
  if (!io::read_le(in, version) || !io::read_le(in, kind)) {
    throw CorruptFile(origin + ": truncated header");
  }
  if (version != kModelVersion) {
    throw VersionMismatch(origin + ": model version " +
                          std::to_string(version) + ", expected " +
                          std::to_string(kModelVersion));
  }
  if (kind < 1 || kind > 3) {
    throw CorruptFile(origin + ": unknown model kind " + std::to_string(kind));
  }
  return static_cast<ModelKind>(kind);
}

inline void expect_kind(ModelKind got, ModelKind want,
                        const std::string& origin) {
  if (got != want) {
    throw CorruptFile(origin + ": model kind " +
                      std::to_string(static_cast<int>(got)) + ", expected " +
                      std::to_string(static_cast<int>(want)));
  }
}

inline void write_f64_block(std::ostream& out, const std::vector<double>& v) {
  io::write_le<std::uint64_t>(out, v.size());
  for (double x : v) io::write_f64_le(out, x);
}

inline std::vector<double> read_f64_block(std::istream& in,
                                          const std::string& origin) {
  std::uint64_t n = 0;
  if (!io::read_le(in, n)) throw CorruptFile(origin + ": truncated block");
  std::vector<double> v(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!io::read_f64_le(in, v[i])) {
      throw CorruptFile(origin + ": truncated block payload");
    }
  }
  return v;
}

}  // namespace detail

inline ModelKind peek_model_kind(const std::filesystem::path& path) {
  const std::string body = detail::read_checked(path);
  std::istringstream in(body, std::ios::binary);
  return detail::read_header(in, path.string());
}

inline void save_svm(const LinearSvmModel& model,
                     const std::filesystem::path& path) {
  std::ostringstream out(std::ios::binary);
  detail::write_header(out, ModelKind::linear_svm);
  io::write_le<std::uint64_t>(out, model.n_classes);
  io::write_le<std::uint64_t>(out, model.dim);
  io::write_le<std::int32_t>(out, model.binning.origin_year);
  io::write_le<std::int32_t>(out, model.binning.bin_width_years);
  io::write_le<std::int32_t>(out, model.binning.n_bins);
  detail::write_f64_block(out, model.weights);
  detail::write_f64_block(out, model.biases);
  detail::commit_file(path, out.str());
}

inline LinearSvmModel load_svm(const std::filesystem::path& path) {
  const std::string origin = path.string();
  std::istringstream in(detail::read_checked(path), std::ios::binary);
  detail::expect_kind(detail::read_header(in, origin), ModelKind::linear_svm,
                      origin);
  LinearSvmModel model;
  std::uint64_t n_classes = 0, dim = 0;
  std::int32_t origin_year = 0, width = 0, bins = 0;
  if (!io::read_le(in, n_classes) || !io::read_le(in, dim) ||
      !io::read_le(in, origin_year) || !io::read_le(in, width) ||
      !io::read_le(in, bins)) {
    throw CorruptFile(origin + ": truncated header fields");
  }
  model.n_classes = n_classes;
  model.dim = dim;
  model.binning = TemporalBinning{origin_year, width, bins};
  model.weights = detail::read_f64_block(in, origin);
  model.biases = detail::read_f64_block(in, origin);
  if (model.weights.size() != model.n_classes * model.dim ||
      model.biases.size() != model.n_classes ||
      static_cast<std::uint64_t>(bins) != n_classes) {
    throw CorruptFile(origin + ": parameter counts disagree with header");
  }
  return model;
}

inline void save_svr(const LinearSvrModel& model,
                     const std::filesystem::path& path) {
  std::ostringstream out(std::ios::binary);
  detail::write_header(out, ModelKind::linear_svr);
  io::write_le<std::uint64_t>(out, model.dim);
  detail::write_f64_block(out, model.weight);
  io::write_f64_le(out, model.bias);
  detail::commit_file(path, out.str());
}

inline LinearSvrModel load_svr(const std::filesystem::path& path) {
  const std::string origin = path.string();
  std::istringstream in(detail::read_checked(path), std::ios::binary);
  detail::expect_kind(detail::read_header(in, origin), ModelKind::linear_svr,
                      origin);
  LinearSvrModel model;
  std::uint64_t dim = 0;
  if (!io::read_le(in, dim)) throw CorruptFile(origin + ": truncated header");
  model.dim = dim;
  model.weight = detail::read_f64_block(in, origin);
  if (!io::read_f64_le(in, model.bias)) {
    throw CorruptFile(origin + ": missing bias");
  }
  if (model.weight.size() != model.dim) {
    throw CorruptFile(origin + ": weight length disagrees with header");
  }
  return model;
}

inline void save_network(const Network& net,
                         const std::filesystem::path& path) {
  std::ostringstream out(std::ios::binary);
  detail::write_header(out, ModelKind::micronet);
  io::write_le<std::int32_t>(out, net.input_height);
  io::write_le<std::int32_t>(out, net.input_width);
  io::write_le<std::int32_t>(out, net.input_channels);
  io::write_le<std::int32_t>(out, net.n_classes);
  io::write_le<std::uint64_t>(out, net.layers.size());
  for (const Layer& L : net.layers) {
    io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(L.kind));
    io::write_le<std::uint16_t>(out,
                                static_cast<std::uint16_t>(L.name.size()));
    io::write_bytes(out, L.name.data(), L.name.size());
    io::write_le<std::int32_t>(out, L.in_channels);
    io::write_le<std::int32_t>(out, L.out_channels);
    io::write_le<std::int32_t>(out, L.kernel);
    io::write_le<std::int32_t>(out, L.pad);
    io::write_le<std::int32_t>(out, L.window);
    io::write_le<std::int32_t>(out, L.in_dim);
    io::write_le<std::int32_t>(out, L.out_dim);
    detail::write_f64_block(out, L.weights);
    detail::write_f64_block(out, L.bias);
  }
  detail::commit_file(path, out.str());
}

inline Network load_network(const std::filesystem::path& path) {
  const std::string origin = path.string();
  std::istringstream in(detail::read_checked(path), std::ios::binary);
  detail::expect_kind(detail::read_header(in, origin), ModelKind::micronet,
                      origin);
  Network net;
  std::int32_t h = 0, w = 0, c = 0, classes = 0;
  std::uint64_t n_layers = 0;
  if (!io::read_le(in, h) || !io::read_le(in, w) || !io::read_le(in, c) ||
      !io::read_le(in, classes) || !io::read_le(in, n_layers)) {
    throw CorruptFile(origin + ": truncated network header");
  }
  net.input_height = h;
  net.input_width = w;
  net.input_channels = c;
  net.n_classes = classes;
  net.layers.reserve(n_layers);
  for (std::uint64_t li = 0; li < n_layers; ++li) {
    Layer L;
    std::uint16_t kind = 0, name_len = 0;
    if (!io::read_le(in, kind) || !io::read_le(in, name_len)) {
      throw CorruptFile(origin + ": truncated layer header");
    }
    if (kind < 1 || kind > 5) {
      throw CorruptFile(origin + ": unknown layer kind " +
                        std::to_string(kind));
    }
    L.kind = static_cast<LayerKind>(kind);
    L.name.resize(name_len);
    if (!io::read_bytes(in, L.name.data(), name_len)) {
      throw CorruptFile(origin + ": truncated layer name");
    }
    if (!io::read_le(in, L.in_channels) || !io::read_le(in, L.out_channels) ||
        !io::read_le(in, L.kernel) || !io::read_le(in, L.pad) ||
        !io::read_le(in, L.window) || !io::read_le(in, L.in_dim) ||
        !io::read_le(in, L.out_dim)) {
      throw CorruptFile(origin + ": truncated layer fields");
    }
    L.weights = detail::read_f64_block(in, origin);
    L.bias = detail::read_f64_block(in, origin);
    net.layers.push_back(std::move(L));
  }
  return net;
}

}  // namespace chronolens
