#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chronolens/common.hpp"
#include "chronolens/dates.hpp"

namespace chronolens {

// Mean of per-image class probability vectors. Every vector must have the
// same length and sum to 1 within 1e-6.
inline std::vector<double> mean_probabilities(
    const std::vector<std::vector<double>>& per_image) {
  if (per_image.empty()) throw EmptyCollection("no images in collection");
  const std::size_t k = per_image.front().size();
  std::vector<double> mean(k, 0.0);
  for (const auto& probs : per_image) {
    if (probs.size() != k) {
      throw LengthMismatch(std::to_string(probs.size()) +
                           " probabilities, expected " + std::to_string(k));
    }
    double total = 0.0;
    for (double p : probs) total += p;
    if (std::abs(total - 1.0) > 1e-6) {
      throw Unnormalized("image probabilities sum to " +
                         std::to_string(total));
    }
    for (std::size_t i = 0; i < k; ++i) mean[i] += probs[i];
  }
  const double inv = 1.0 / static_cast<double>(per_image.size());
  for (double& v : mean) v *= inv;
  return mean;
}

// Highest-probability bin; ties resolve to the earliest bin.
inline BinIndex dominant_bin(std::span<const double> probs) {
  if (probs.empty()) throw EmptyCollection("no probabilities");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return BinIndex{static_cast<int>(best)};
}

// Alternative vote: each image casts its argmax bin, the most frequent bin
// wins, ties resolve to the earliest bin.
inline BinIndex dominant_bin_majority(
    const std::vector<std::vector<double>>& per_image) {
  if (per_image.empty()) throw EmptyCollection("no images in collection");
  std::map<int, std::size_t> votes;
  for (const auto& probs : per_image) {
    votes[dominant_bin(probs).value] += 1;
  }
  int best_bin = votes.begin()->first;
  std::size_t best_count = votes.begin()->second;
  for (const auto& [bin, count] : votes) {
    if (count > best_count) {
      best_bin = bin;
      best_count = count;
    }
  }
  return BinIndex{best_bin};
}

// Collection vintage: mean the probabilities (or tally votes), pick the
// dominant bin, report that bin's representative year.
inline int collection_vintage_year(
    const std::vector<std::vector<double>>& per_image,
    const TemporalBinning& binning, bool majority_vote = false) {
  const BinIndex bin = majority_vote
                           ? dominant_bin_majority(per_image)
                           : dominant_bin(mean_probabilities(per_image));
  check_bin(bin, binning);
  return bin_representative_year(bin, binning);
}

// Fraction of collections whose predicted bin matches the reference bin.
inline double agreement_fraction(const std::vector<BinIndex>& predicted,
                                 const std::vector<BinIndex>& reference) {
  if (predicted.size() != reference.size()) {
    throw LengthMismatch(std::to_string(predicted.size()) + " vs " +
                         std::to_string(reference.size()));
  }
  if (predicted.empty()) throw Empty("no collections to compare");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == reference[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

// Mean model estimate for every ground-truth year present in the data,
// ascending by year.
struct TrendPoint {
  int year = 0;
  double mean_estimate = 0.0;
  std::size_t count = 0;
};

inline std::vector<TrendPoint> yearly_trend(
    const std::vector<int>& true_years,
    const std::vector<double>& estimates) {
  if (true_years.size() != estimates.size()) {
    throw LengthMismatch(std::to_string(true_years.size()) + " years vs " +
                         std::to_string(estimates.size()) + " estimates");
  }
  if (true_years.empty()) throw Empty("no samples to aggregate");
  std::map<int, TrendPoint> by_year;
  for (std::size_t i = 0; i < true_years.size(); ++i) {
    TrendPoint& pt = by_year[true_years[i]];
    pt.year = true_years[i];
    pt.mean_estimate += estimates[i];
    pt.count += 1;
  }
  std::vector<TrendPoint> out;
  out.reserve(by_year.size());
  for (auto& [year, pt] : by_year) {
    pt.mean_estimate /= static_cast<double>(pt.count);
    out.push_back(pt);
  }
  return out;
}

inline const TrendPoint& trend_at(const std::vector<TrendPoint>& trend,
                                  int year) {
  for (const TrendPoint& pt : trend) {
    if (pt.year == year) return pt;
  }
  throw EmptyYear("no samples for year " + std::to_string(year));
}

}  // namespace chronolens
