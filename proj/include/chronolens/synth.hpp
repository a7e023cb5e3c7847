#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "chronolens/analysis.hpp"
#include "chronolens/common.hpp"
#include "chronolens/dates.hpp"
#include "chronolens/image.hpp"

namespace chronolens {

// Synthetic benchmark images: a noisy gray field with one oriented grating
// patch whose orientation encodes the temporal bin. The patch position is the
// localization ground truth and the label year is drawn uniformly inside the
// bin, so classification, regression, and occlusion analyses all have known
// answers.
struct SynthConfig {
  int image_size = 24;
  int patch_size = 10;
  int per_bin = 40;
  TemporalBinning binning{};
  double noise = 0.06;     // additive gaussian sigma, everywhere
  double contrast = 0.9;   // grating amplitude around mid-gray
  double cycles = 3.0;     // grating periods across the patch
  double angle_offset = 0.0;  // radians added to every bin's orientation
  std::uint64_t seed = 0;
};

struct SynthSample {
  std::string id;
  ImageTensor image;
  BinIndex bin;
  int year = 0;
  Box planted;
};

// Orientation for a bin: n_bins angles evenly spaced over half a turn.
inline double bin_orientation(int bin, const TemporalBinning& binning,
                              double offset) {
  return 3.14159265358979323846 * bin / binning.n_bins + offset;
}

inline std::vector<SynthSample> make_planted_dataset(const SynthConfig& cfg) {
  const int S = cfg.image_size;
  const int P = cfg.patch_size;
  if (P <= 0 || P > S) {
    throw ShapeMismatch("patch " + std::to_string(P) + " on " +
                        std::to_string(S) + "x" + std::to_string(S) +
                        " image");
  }
  if (cfg.per_bin < 1 || cfg.binning.n_bins < 2) {
    throw EmptyDataset("need at least one sample for at least two bins");
  }

  Rng rng(cfg.seed);
  std::vector<SynthSample> out;
  out.reserve(static_cast<std::size_t>(cfg.per_bin) * cfg.binning.n_bins);
  const double two_pi = 2.0 * 3.14159265358979323846;
  std::size_t serial = 0;

  for (int bin = 0; bin < cfg.binning.n_bins; ++bin) {
    const double theta = bin_orientation(bin, cfg.binning, cfg.angle_offset);
    const double cs = std::cos(theta), sn = std::sin(theta);
    for (int j = 0; j < cfg.per_bin; ++j) {
      SynthSample sample;
      char buf[16];
      std::snprintf(buf, sizeof(buf), "img_%05zu", serial++);
      sample.id = buf;
      sample.bin = BinIndex{bin};

      const int y0 = static_cast<int>(rng.index(S - P + 1));
      const int x0 = static_cast<int>(rng.index(S - P + 1));
      const double phase = rng.uniform(0.0, two_pi);
      sample.year = cfg.binning.origin_year +
                    bin * cfg.binning.bin_width_years +
                    static_cast<int>(rng.index(cfg.binning.bin_width_years));
      sample.planted = Box{y0, x0, P, P};

      ImageTensor img = ImageTensor::zeros(S, S, 1);
      for (int y = 0; y < S; ++y) {
        for (int x = 0; x < S; ++x) {
          img.at(0, y, x) =
              std::clamp(0.5 + cfg.noise * rng.normal(), 0.0, 1.0);
        }
      }
      for (int dy = 0; dy < P; ++dy) {
        for (int dx = 0; dx < P; ++dx) {
          const double along = (dx * cs + dy * sn) / P;
          const double wave =
              0.5 + 0.5 * cfg.contrast *
                        std::sin(two_pi * cfg.cycles * along + phase);
          img.at(0, y0 + dy, x0 + dx) =
              std::clamp(wave + cfg.noise * rng.normal(), 0.0, 1.0);
        }
      }
      sample.image = std::move(img);
      out.push_back(std::move(sample));
    }
  }
  return out;
}

// Seeded shuffle and split; `test_fraction` of each run goes to test.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

inline SplitIndices split_dataset(std::size_t n, double test_fraction,
                                  std::uint64_t seed) {
  if (n == 0) throw EmptyDataset("nothing to split");
  if (!(test_fraction >= 0.0) || test_fraction >= 1.0) {
    throw ShapeMismatch("test fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n_test =
      static_cast<std::size_t>(test_fraction * static_cast<double>(n));
  SplitIndices split;
  split.test.assign(order.begin(), order.begin() + n_test);
  split.train.assign(order.begin() + n_test, order.end());
  return split;
}

}  // namespace chronolens
