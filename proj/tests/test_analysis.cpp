#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "chronolens/analysis.hpp"
#include "chronolens/net.hpp"

namespace cl = chronolens;

namespace {

TEST(Entropy, PointMassIsExactlyZero) {
  std::vector<double> probs(11, 0.0);
  probs[4] = 1.0;
  EXPECT_EQ(cl::entropy_bits(probs), 0.0);
}

TEST(Entropy, UniformElevenBinsHitsLogTwoEleven) {
  const std::vector<double> probs(11, 1.0 / 11.0);
  EXPECT_NEAR(cl::entropy_bits(probs), std::log2(11.0), 1e-9);
}

TEST(Entropy, StaysInsideTheoreticalBounds) {
  cl::Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.index(15);
    std::vector<double> probs(k);
    double total = 0.0;
    for (double& p : probs) {
      p = rng.uniform() + 1e-6;
      total += p;
    }
    for (double& p : probs) p /= total;
    const double e = cl::entropy_bits(probs);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, std::log2(static_cast<double>(k)) + 1e-12);
  }
}

TEST(Entropy, RejectsBadHistograms) {
  EXPECT_THROW(cl::entropy_bits(std::vector<double>{}), cl::EmptyHistogram);
  EXPECT_THROW(cl::entropy_bits(std::vector<double>{0.5, 0.4}),
               cl::Unnormalized);
  EXPECT_THROW(cl::entropy_bits(std::vector<double>{1.2, -0.2}),
               cl::Unnormalized);
}

cl::ActivationTable make_table(std::size_t n_images, std::size_t n_units) {
  cl::ActivationTable t;
  t.n_images = n_images;
  t.n_units = n_units;
  t.values.assign(n_images * n_units, 0.0);
  return t;
}

TEST(Ranking, OrdersByActivationWithStableTies) {
  cl::ActivationTable t = make_table(5, 2);
  const double acts[5] = {1.0, 3.0, 3.0, 0.0, 3.0};
  for (std::size_t i = 0; i < 5; ++i) t.values[i * 2] = acts[i];
  const std::vector<std::size_t> full = cl::rank_by_activation(t, 0, 5);
  const std::vector<std::size_t> expect = {1, 2, 4, 0, 3};
  EXPECT_EQ(full, expect);
  const std::vector<std::size_t> top2 = cl::rank_by_activation(t, 0, 2);
  EXPECT_EQ(top2, (std::vector<std::size_t>{1, 2}));
  EXPECT_THROW(cl::rank_by_activation(t, 2, 5), cl::UnitOutOfRange);
}

TEST(Ranking, UnitEntropyReflectsTopSetPurity) {
  // 40 images, one unit. The ten strongest all carry bin 3; the remainder
  // cycle through every bin.
  cl::ActivationTable t = make_table(40, 1);
  std::vector<cl::BinIndex> labels(40);
  for (std::size_t i = 0; i < 40; ++i) {
    t.values[i] = i < 10 ? 100.0 - static_cast<double>(i) : 1.0;
    labels[i] = cl::BinIndex{i < 10 ? 3 : static_cast<int>(i % 11)};
  }
  const cl::TemporalBinning bins{};
  EXPECT_EQ(cl::unit_temporal_entropy(t, 0, labels, bins, 10), 0.0);
  EXPECT_GT(cl::unit_temporal_entropy(t, 0, labels, bins, 40), 1.0);
  const std::vector<double> per_layer =
      cl::layer_temporal_entropy(t, labels, bins, 10);
  ASSERT_EQ(per_layer.size(), 1u);
  EXPECT_EQ(per_layer[0], 0.0);
  std::vector<cl::BinIndex> short_labels(labels.begin(), labels.end() - 1);
  EXPECT_THROW(cl::unit_temporal_entropy(t, 0, short_labels, bins, 10),
               cl::LengthMismatch);
}

TEST(Occlusion, MatchesLinearScoreAnalytically) {
  const int H = 12, W = 10, size = 3, stride = 2;
  const double fill = 0.25;
  cl::Rng rng(2);
  cl::ImageTensor img = cl::ImageTensor::zeros(H, W, 1);
  std::vector<double> w(img.values.size());
  for (double& v : img.values) v = rng.uniform();
  for (double& v : w) v = rng.normal();
  const cl::ScoreFn score = [&w](const cl::ImageTensor& x) {
    double s = 0.7;
    for (std::size_t i = 0; i < x.values.size(); ++i) s += w[i] * x.values[i];
    return s;
  };
  const cl::DiscrepancyMap map =
      cl::occlusion_discrepancy(img, size, stride, fill, score);
  ASSERT_EQ(map.grid_rows, 5u);
  ASSERT_EQ(map.grid_cols, 4u);
  for (std::size_t r = 0; r < map.grid_rows; ++r) {
    for (std::size_t c = 0; c < map.grid_cols; ++c) {
      // Occluding a linear score drops it by sum(w * (pixel - fill)).
      double expect = 0.0;
      for (int dy = 0; dy < size; ++dy) {
        for (int dx = 0; dx < size; ++dx) {
          const std::size_t px =
              (r * stride + dy) * static_cast<std::size_t>(W) +
              (c * stride + dx);
          expect += w[px] * (img.values[px] - fill);
        }
      }
      EXPECT_NEAR(map.values[r * map.grid_cols + c], expect, 1e-9);
    }
  }
}

TEST(Occlusion, ReferenceGeometryYieldsSeventyThreeSquared) {
  const cl::ImageTensor img = cl::ImageTensor::zeros(227, 227, 1);
  const cl::ScoreFn cheap = [](const cl::ImageTensor& x) {
    return x.values[0];
  };
  const cl::DiscrepancyMap map =
      cl::occlusion_discrepancy(img, 11, 3, 0.5, cheap);
  EXPECT_EQ(map.grid_rows, 73u);
  EXPECT_EQ(map.grid_cols, 73u);
  EXPECT_EQ(map.values.size(), 5329u);
}

TEST(Occlusion, RejectsBadOccluders) {
  const cl::ImageTensor img = cl::ImageTensor::zeros(8, 8, 1);
  const cl::ScoreFn cheap = [](const cl::ImageTensor&) { return 0.0; };
  EXPECT_THROW(cl::occlusion_discrepancy(img, 0, 1, 0.5, cheap),
               cl::OccluderTooLarge);
  EXPECT_THROW(cl::occlusion_discrepancy(img, 9, 1, 0.5, cheap),
               cl::OccluderTooLarge);
  EXPECT_THROW(cl::occlusion_discrepancy(img, 3, 0, 0.5, cheap),
               cl::OccluderTooLarge);
}

TEST(Occlusion, PixelProjectionKeepsMaximaAndZeroFillsGaps) {
  cl::DiscrepancyMap map;
  map.grid_rows = 2;
  map.grid_cols = 2;
  map.occluder_size = 2;
  map.stride = 1;
  map.values = {1.0, 5.0, -2.0, 3.0};
  const std::vector<double> px = cl::discrepancy_pixel_projection(map, 3, 3);
  // Center pixel sits under all four footprints.
  EXPECT_EQ(px[1 * 3 + 1], 5.0);
  EXPECT_EQ(px[0 * 3 + 0], 1.0);
  EXPECT_EQ(px[2 * 3 + 0], -2.0);
  EXPECT_EQ(px[2 * 3 + 2], 3.0);

  cl::DiscrepancyMap sparse;
  sparse.grid_rows = 1;
  sparse.grid_cols = 1;
  sparse.occluder_size = 1;
  sparse.stride = 1;
  sparse.values = {-7.0};
  const std::vector<double> gap = cl::discrepancy_pixel_projection(sparse, 2, 2);
  EXPECT_EQ(gap[0], -7.0);
  EXPECT_EQ(gap[1], 0.0);  // never covered
  EXPECT_EQ(gap[3], 0.0);
}

TEST(PeakPatch, MatchesBruteForceOracle) {
  cl::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 5 + rng.index(8);
    const std::size_t w = 5 + rng.index(8);
    const int patch = 1 + static_cast<int>(rng.index(std::min(h, w)));
    std::vector<double> px(h * w);
    for (double& v : px) v = rng.normal();
    const cl::Box got = cl::peak_patch(px, h, w, patch);

    double best = -1e300;
    int by = 0, bx = 0;
    for (std::size_t y = 0; y + patch <= h; ++y) {
      for (std::size_t x = 0; x + patch <= w; ++x) {
        double sum = 0.0;
        for (int dy = 0; dy < patch; ++dy) {
          for (int dx = 0; dx < patch; ++dx) {
            sum += px[(y + dy) * w + (x + dx)];
          }
        }
        if (sum > best + 1e-12) {
          best = sum;
          by = static_cast<int>(y);
          bx = static_cast<int>(x);
        }
      }
    }
    EXPECT_EQ(got.y, by) << "trial " << trial;
    EXPECT_EQ(got.x, bx) << "trial " << trial;
    EXPECT_EQ(got.height, patch);
    EXPECT_EQ(got.width, patch);
  }
}

TEST(PeakPatch, TiesGoToSmallestCoordinateAndInputsAreValidated) {
  const std::vector<double> flat(12, 0.5);
  const cl::Box b = cl::peak_patch(flat, 3, 4, 2);
  EXPECT_EQ(b.y, 0);
  EXPECT_EQ(b.x, 0);
  EXPECT_THROW(cl::peak_patch(flat, 3, 4, 4), cl::PatchTooLarge);
  EXPECT_THROW(cl::peak_patch(flat, 3, 4, 0), cl::PatchTooLarge);
  EXPECT_THROW(cl::peak_patch(flat, 4, 4, 2), cl::ShapeMismatch);
}

TEST(Boxes, IoUMatchesPixelCountingOracle) {
  cl::Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    cl::Box a{static_cast<int>(rng.index(24)) - 3,
              static_cast<int>(rng.index(24)) - 3,
              static_cast<int>(rng.index(11)) - 2,
              static_cast<int>(rng.index(11)) - 2};
    cl::Box b{static_cast<int>(rng.index(24)) - 3,
              static_cast<int>(rng.index(24)) - 3,
              static_cast<int>(rng.index(11)) - 2,
              static_cast<int>(rng.index(11)) - 2};
    std::size_t inter = 0, uni = 0;
    for (int y = -6; y < 34; ++y) {
      for (int x = -6; x < 34; ++x) {
        const bool in_a = y >= a.y && y < a.y + a.height && x >= a.x &&
                          x < a.x + a.width;
        const bool in_b = y >= b.y && y < b.y + b.height && x >= b.x &&
                          x < b.x + b.width;
        inter += in_a && in_b;
        uni += in_a || in_b;
      }
    }
    const double expect =
        uni == 0 ? 0.0
                 : static_cast<double>(inter) / static_cast<double>(uni);
    EXPECT_NEAR(cl::intersection_over_union(a, b), expect, 1e-12)
        << "trial " << trial;
  }
}

TEST(Boxes, IdenticalAndDisjointEdgeCases) {
  const cl::Box a{2, 3, 4, 5};
  EXPECT_EQ(cl::intersection_over_union(a, a), 1.0);
  EXPECT_EQ(cl::intersection_over_union(a, cl::Box{100, 100, 4, 5}), 0.0);
  EXPECT_EQ(cl::intersection_over_union(a, cl::Box{0, 0, 0, 9}), 0.0);
  EXPECT_EQ(cl::intersection_over_union(cl::Box{0, 0, 0, 0},
                                        cl::Box{0, 0, -1, 3}),
            0.0);
}

std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = "img" + std::to_string(i);
  return ids;
}

TEST(RankingAgreement, IdenticalAndDisjointRankings) {
  const std::vector<std::string> ids = make_ids(10);
  EXPECT_EQ(cl::ranking_agreement(ids, ids, 0.3), 1.0);
  std::vector<std::string> reversed(ids.rbegin(), ids.rend());
  EXPECT_EQ(cl::ranking_agreement(ids, reversed, 0.3), 0.0);
  EXPECT_EQ(cl::ranking_agreement(ids, reversed, 1.0), 1.0);
}

TEST(RankingAgreement, RandomRankingsAverageToTheFraction) {
  const std::size_t N = 60;
  const double fraction = 0.3;
  const std::vector<std::string> base = make_ids(N);
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::vector<std::string> shuffled = base;
    cl::Rng rng(seed);
    rng.shuffle(shuffled);
    mean += cl::ranking_agreement(base, shuffled, fraction);
  }
  mean /= 100.0;
  EXPECT_NEAR(mean, fraction, 0.05);
}

TEST(RankingAgreement, ValidatesItsInputs) {
  const std::vector<std::string> ids = make_ids(5);
  EXPECT_THROW(cl::ranking_agreement({}, ids, 0.3), cl::Empty);
  EXPECT_THROW(cl::ranking_agreement(ids, ids, 0.0), cl::Empty);
  EXPECT_THROW(cl::ranking_agreement(ids, ids, 1.5), cl::Empty);
  std::vector<std::string> dup = ids;
  dup[4] = dup[0];
  EXPECT_THROW(cl::ranking_agreement(dup, ids, 0.3), cl::DuplicateId);
  std::vector<std::string> other = ids;
  other[2] = "stranger";
  EXPECT_THROW(cl::ranking_agreement(ids, other, 0.3), cl::UniverseMismatch);
}

TEST(Activations, TableMatchesPerImageFeatures) {
  const cl::Network net = cl::make_default_network(8, 8, 1, 3, 21);
  cl::Rng rng(22);
  std::vector<cl::ImageTensor> images;
  for (int i = 0; i < 5; ++i) {
    cl::ImageTensor img = cl::ImageTensor::zeros(8, 8, 1);
    for (double& v : img.values) v = rng.uniform();
    images.push_back(std::move(img));
  }
  const cl::ActivationTable t = cl::collect_activations(net, images, "relu3");
  ASSERT_EQ(t.n_images, 5u);
  ASSERT_EQ(t.n_units, 64u);
  for (std::size_t i = 0; i < 5; ++i) {
    const std::vector<double> direct =
        cl::features_at(net, images[i], "relu3");
    for (std::size_t u = 0; u < t.n_units; ++u) {
      EXPECT_EQ(t.at(i, u), direct[u]);
    }
  }
  EXPECT_THROW(cl::collect_activations(net, {}, "relu3"), cl::EmptyDataset);
}

}  // namespace
