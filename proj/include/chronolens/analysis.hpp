#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "chronolens/common.hpp"
#include "chronolens/dates.hpp"
#include "chronolens/image.hpp"
#include "chronolens/net.hpp"

namespace chronolens {

// ---------------------------------------------------------------------------
// Temporal selectivity of hidden units
// ---------------------------------------------------------------------------

// Activation of every unit at one layer for every image, images in input
// order. A "unit" is one flat activation slot (channel x position for conv
// layers, one neuron for fc layers).
struct ActivationTable {
  std::size_t n_images = 0;
  std::size_t n_units = 0;
  std::vector<double> values;  // n_images * n_units, row per image
  std::vector<std::string> sample_ids;

  double at(std::size_t image, std::size_t unit) const {
    return values[image * n_units + unit];
  }
};

inline ActivationTable collect_activations(const Network& net,
                                           std::span<const ImageTensor> images,
                                           const std::string& layer_name) {
  if (images.empty()) throw EmptyDataset("no images to run");
  ActivationTable table;
  table.n_images = images.size();
  table.n_units = shape_at(net, layer_name).flat();
  table.values.resize(table.n_images * table.n_units);
  parallel_chunks(images.size(), [&](std::size_t i) {
    const std::vector<double> act = features_at(net, images[i], layer_name);
    std::copy(act.begin(), act.end(),
              table.values.begin() + i * table.n_units);
  });
  return table;
}

// Image indices ordered by the unit's activation, highest first; equal
// activations keep input order. Returns at most `top_n` indices.
inline std::vector<std::size_t> rank_by_activation(const ActivationTable& table,
                                                   std::size_t unit,
                                                   std::size_t top_n) {
  if (unit >= table.n_units) {
    throw UnitOutOfRange("unit " + std::to_string(unit) + " of " +
                         std::to_string(table.n_units));
  }
  std::vector<std::size_t> order(table.n_images);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return table.at(a, unit) > table.at(b, unit);
                   });
  if (order.size() > top_n) order.resize(top_n);
  return order;
}

// Shannon entropy in bits of a probability vector; 0*log(0) contributes 0.
inline double entropy_bits(std::span<const double> probs) {
  if (probs.empty()) throw EmptyHistogram("no probabilities");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw Unnormalized("probability outside [0, 1]");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Unnormalized("probabilities sum to " + std::to_string(total));
  }
  double e = 0.0;
  for (double p : probs) {
    if (p > 0.0) e -= p * std::log2(p);
  }
  return e;
}

// Entropy of the bin distribution among the images a unit responds to most
// strongly: take the `top_n` highest-activation images, histogram their bins,
// normalize to probabilities. Low entropy means the unit fires for a narrow
// slice of time.
inline double unit_temporal_entropy(const ActivationTable& table,
                                    std::size_t unit,
                                    const std::vector<BinIndex>& labels,
                                    const TemporalBinning& binning,
                                    std::size_t top_n = 500) {
  if (labels.size() != table.n_images) {
    throw LengthMismatch(std::to_string(labels.size()) + " labels for " +
                         std::to_string(table.n_images) + " images");
  }
  const std::vector<std::size_t> top = rank_by_activation(table, unit, top_n);
  if (top.empty()) throw EmptyHistogram("no images in the top set");
  std::vector<double> probs(static_cast<std::size_t>(binning.n_bins), 0.0);
  for (std::size_t idx : top) {
    check_bin(labels[idx], binning);
    probs[static_cast<std::size_t>(labels[idx].value)] += 1.0;
  }
  for (double& p : probs) p /= static_cast<double>(top.size());
  return entropy_bits(probs);
}

inline std::vector<double> layer_temporal_entropy(
    const ActivationTable& table, const std::vector<BinIndex>& labels,
    const TemporalBinning& binning, std::size_t top_n = 500) {
  std::vector<double> out(table.n_units, 0.0);
  parallel_chunks(table.n_units, [&](std::size_t u) {
    out[u] = unit_temporal_entropy(table, u, labels, binning, top_n);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Occlusion discrepancy
// ---------------------------------------------------------------------------

// Grid of score drops obtained by sliding a constant-fill square over the
// image: values[r*grid_cols + c] = base_score - score(occluded at r, c).
// Positive cells mark regions whose visibility supports the score.
struct DiscrepancyMap {
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
  int occluder_size = 0;
  int stride = 0;
  double base_score = 0.0;
  std::vector<double> values;
};

using ScoreFn = std::function<double(const ImageTensor&)>;

// `score` is called concurrently from worker threads and must be pure.
inline DiscrepancyMap occlusion_discrepancy(const ImageTensor& img,
                                            int occluder_size, int stride,
                                            double fill, const ScoreFn& score) {
  const int H = img.height;
  const int W = img.width;
  if (occluder_size <= 0 || occluder_size > H || occluder_size > W) {
    throw OccluderTooLarge("occluder " + std::to_string(occluder_size) +
                           " on " + std::to_string(H) + "x" +
                           std::to_string(W) + " image");
  }
  if (stride <= 0) throw OccluderTooLarge("stride must be positive");

  DiscrepancyMap map;
  map.grid_rows = static_cast<std::size_t>((H - occluder_size) / stride + 1);
  map.grid_cols = static_cast<std::size_t>((W - occluder_size) / stride + 1);
  map.occluder_size = occluder_size;
  map.stride = stride;
  map.base_score = score(img);
  map.values.resize(map.grid_rows * map.grid_cols);

  parallel_chunks(map.grid_rows, [&](std::size_t r) {
    ImageTensor work = img;
    std::vector<double> saved(static_cast<std::size_t>(occluder_size) *
                              occluder_size * img.channels);
    const int y0 = static_cast<int>(r) * stride;
    for (std::size_t c = 0; c < map.grid_cols; ++c) {
      const int x0 = static_cast<int>(c) * stride;
      std::size_t s = 0;
      for (int ch = 0; ch < img.channels; ++ch) {
        for (int dy = 0; dy < occluder_size; ++dy) {
          for (int dx = 0; dx < occluder_size; ++dx) {
            double& px = work.at(ch, y0 + dy, x0 + dx);
            saved[s++] = px;
            px = fill;
          }
        }
      }
      map.values[r * map.grid_cols + c] = map.base_score - score(work);
      s = 0;
      for (int ch = 0; ch < img.channels; ++ch) {
        for (int dy = 0; dy < occluder_size; ++dy) {
          for (int dx = 0; dx < occluder_size; ++dx) {
            work.at(ch, y0 + dy, x0 + dx) = saved[s++];
          }
        }
      }
    }
  });
  return map;
}

// Spreads each grid cell's value over the pixels its occluder covered,
// keeping the maximum where footprints overlap. Pixels no occluder ever
// covered read 0.
inline std::vector<double> discrepancy_pixel_projection(
    const DiscrepancyMap& map, std::size_t height, std::size_t width) {
  const double lowest = -std::numeric_limits<double>::infinity();
  std::vector<double> px(height * width, lowest);
  for (std::size_t r = 0; r < map.grid_rows; ++r) {
    for (std::size_t c = 0; c < map.grid_cols; ++c) {
      const double v = map.values[r * map.grid_cols + c];
      const std::size_t y0 = r * static_cast<std::size_t>(map.stride);
      const std::size_t x0 = c * static_cast<std::size_t>(map.stride);
      for (int dy = 0; dy < map.occluder_size; ++dy) {
        for (int dx = 0; dx < map.occluder_size; ++dx) {
          double& slot = px[(y0 + dy) * width + (x0 + dx)];
          slot = std::max(slot, v);
        }
      }
    }
  }
  for (double& v : px) {
    if (v == lowest) v = 0.0;
  }
  return px;
}

// Axis-aligned rectangle in pixel coordinates.
struct Box {
  int y = 0;
  int x = 0;
  int height = 0;
  int width = 0;
};

inline double intersection_over_union(const Box& a, const Box& b) {
  const auto area = [](const Box& box) {
    return box.height > 0 && box.width > 0
               ? static_cast<double>(box.height) * box.width
               : 0.0;
  };
  const int iy = std::max(0, std::min(a.y + a.height, b.y + b.height) -
                                 std::max(a.y, b.y));
  const int ix = std::max(0, std::min(a.x + a.width, b.x + b.width) -
                                 std::max(a.x, b.x));
  const double inter =
      area(a) > 0.0 && area(b) > 0.0 ? static_cast<double>(iy) * ix : 0.0;
  const double uni = area(a) + area(b) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

// Square window with the largest value sum, via a summed-area table. Equal
// sums resolve to the smallest (y, x) in row-major order.
inline Box peak_patch(std::span<const double> pixel_values, std::size_t height,
                      std::size_t width, int patch_size) {
  if (patch_size <= 0 || static_cast<std::size_t>(patch_size) > height ||
      static_cast<std::size_t>(patch_size) > width) {
    throw PatchTooLarge("patch " + std::to_string(patch_size) + " on " +
                        std::to_string(height) + "x" + std::to_string(width));
  }
  if (pixel_values.size() != height * width) {
    throw ShapeMismatch("pixel buffer " +
                        std::to_string(pixel_values.size()) + " for " +
                        std::to_string(height) + "x" + std::to_string(width));
  }
  std::vector<double> integral((height + 1) * (width + 1), 0.0);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      integral[(y + 1) * (width + 1) + (x + 1)] =
          pixel_values[y * width + x] + integral[y * (width + 1) + (x + 1)] +
          integral[(y + 1) * (width + 1) + x] - integral[y * (width + 1) + x];
    }
  }
  const std::size_t p = static_cast<std::size_t>(patch_size);
  Box best{0, 0, patch_size, patch_size};
  double best_sum = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y + p <= height; ++y) {
    for (std::size_t x = 0; x + p <= width; ++x) {
      const double sum = integral[(y + p) * (width + 1) + (x + p)] -
                         integral[y * (width + 1) + (x + p)] -
                         integral[(y + p) * (width + 1) + x] +
                         integral[y * (width + 1) + x];
      if (sum > best_sum) {
        best_sum = sum;
        best.y = static_cast<int>(y);
        best.x = static_cast<int>(x);
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Ranking agreement
// ---------------------------------------------------------------------------

// Overlap of the top fraction of two rankings over the same id universe:
// |A_n intersect B_n| / n with n = round(fraction * N). Identical rankings
// score 1, rankings with disjoint tops score 0, and unrelated rankings score
// about `fraction` in expectation.
inline double ranking_agreement(const std::vector<std::string>& a,
                                const std::vector<std::string>& b,
                                double fraction = 0.3) {
  if (a.empty() || b.empty()) throw Empty("empty ranking");
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Empty("fraction must lie in (0, 1]");
  }
  std::vector<std::string> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (std::adjacent_find(sa.begin(), sa.end()) != sa.end() ||
      std::adjacent_find(sb.begin(), sb.end()) != sb.end()) {
    throw DuplicateId("ranking repeats an id");
  }
  if (sa != sb) {
    throw UniverseMismatch("rankings cover different id sets");
  }
  const std::size_t N = a.size();
  std::size_t n = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(N)));
  n = std::clamp<std::size_t>(n, 1, N);
  std::vector<std::string> ta(a.begin(), a.begin() + n);
  std::vector<std::string> tb(b.begin(), b.begin() + n);
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  std::vector<std::string> common;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(),
                        std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(n);
}

}  // namespace chronolens
