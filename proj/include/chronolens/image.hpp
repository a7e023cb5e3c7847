#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chronolens/common.hpp"

namespace chronolens {

// Small dense image, channel-major (plane per channel), values in [0, 1].
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;  // channels * height * width

  static ImageTensor zeros(int h, int w, int c) {
    ImageTensor img;
    img.height = h;
    img.width = w;
    img.channels = c;
    img.values.assign(static_cast<std::size_t>(c) * h * w, 0.0);
    return img;
  }

  double& at(int c, int y, int x) {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * width;
  }
};

// Rec. 601 luma; collapses a 3-channel image to a single channel.
inline ImageTensor grayscale_transform(const ImageTensor& img) {
  if (img.channels == 1) {
    throw AlreadyGrayscale("image already has a single channel");
  }
  if (img.channels != 3) {
    throw ShapeMismatch("grayscale_transform expects 3 channels, got " +
                        std::to_string(img.channels));
  }
  ImageTensor out = ImageTensor::zeros(img.height, img.width, 1);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      out.at(0, y, x) = 0.299 * img.at(0, y, x) + 0.587 * img.at(1, y, x) +
                        0.114 * img.at(2, y, x);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary PGM/PPM (P5/P6, maxval 255) - the on-disk image format for tests
// and the CLI.
// ---------------------------------------------------------------------------

namespace detail {

inline int pnm_next_int(std::istream& in) {
  // Skips whitespace and '#'-comments between header fields.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) return -1;
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

}  // namespace detail

inline ImageTensor read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptFile("cannot open image " + path.string());
  char p = 0, kind = 0;
  in.get(p);
  in.get(kind);
  if (p != 'P' || (kind != '5' && kind != '6')) {
    throw CorruptFile("not a binary PGM/PPM file: " + path.string());
  }
  const int channels = kind == '5' ? 1 : 3;
  const int width = detail::pnm_next_int(in);
  const int height = detail::pnm_next_int(in);
  const int maxval = detail::pnm_next_int(in);
  if (width <= 0 || height <= 0 || maxval != 255) {
    throw CorruptFile("unsupported PNM header in " + path.string());
  }
  // Header ends with exactly one whitespace byte before the raster.
  std::vector<unsigned char> raster(static_cast<std::size_t>(width) * height *
                                    channels);
  if (!io::read_bytes(in, raster.data(), raster.size())) {
    throw CorruptFile("truncated raster in " + path.string());
  }
  ImageTensor img = ImageTensor::zeros(height, width, channels);
  std::size_t i = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        img.at(c, y, x) = raster[i++] / 255.0;
      }
    }
  }
  return img;
}

inline void write_pnm(const std::filesystem::path& path,
                      const ImageTensor& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw ShapeMismatch("PNM writer supports 1 or 3 channels, got " +
                        std::to_string(img.channels));
  }
  std::ostringstream out(std::ios::binary);
  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raster;
  raster.reserve(img.pixel_count() * img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
        raster.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
      }
    }
  }
  io::write_bytes(out, raster.data(), raster.size());
  io::commit_bytes(path, out.str());
}

}  // namespace chronolens
