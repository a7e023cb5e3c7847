#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chronolens/features.hpp"
#include "chronolens/image.hpp"
#include "chronolens/manifest.hpp"

namespace cl = chronolens;
namespace fs = std::filesystem;

namespace {

class IngestionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("ingestion_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
  }

  fs::path dir_;
};

TEST_F(IngestionTest, ManifestThreeLinesThreeSamples) {
  const fs::path p = write(
      "m.tsv",
      "id=a\tdate_text=1965\tsplit=train\n"
      "id=b\tyear=1987\tsplit=test\tcollection=k1\tpath=x.pgm\tgray=1\n"
      "id=c\tdate_text=the 90s\n");
  const std::vector<cl::Sample> samples = cl::load_manifest(p);
  ASSERT_EQ(samples.size(), 3u);
  EXPECT_EQ(samples[0].id, "a");
  EXPECT_EQ(samples[0].date_text, "1965");
  EXPECT_EQ(samples[0].split, cl::Split::train);
  EXPECT_EQ(samples[1].id, "b");
  ASSERT_TRUE(samples[1].label_year.has_value());
  EXPECT_EQ(*samples[1].label_year, 1987);
  EXPECT_EQ(samples[1].split, cl::Split::test);
  EXPECT_EQ(samples[1].collection_id, "k1");
  EXPECT_EQ(samples[1].path, "x.pgm");
  EXPECT_TRUE(samples[1].grayscale);
  EXPECT_EQ(samples[2].date_text, "the 90s");
  EXPECT_FALSE(samples[2].label_year.has_value());
}

TEST_F(IngestionTest, ManifestSkipsBlankAndCommentLines) {
  const fs::path p = write("m.tsv",
                           "# header comment\n"
                           "\n"
                           "id=a\n"
                           "   \t\n");
  // The whitespace-only line is not blank, so it must be rejected.
  EXPECT_THROW(cl::load_manifest(p), cl::MalformedManifest);
  const fs::path q = write("q.tsv", "# c\n\nid=a\n\nid=b\n");
  EXPECT_EQ(cl::load_manifest(q).size(), 2u);
}

TEST_F(IngestionTest, ManifestDuplicateIdReportsLine) {
  const fs::path p = write("m.tsv", "id=a\nid=a\n");
  try {
    cl::load_manifest(p);
    FAIL() << "expected DuplicateId";
  } catch (const cl::DuplicateId& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST_F(IngestionTest, ManifestErrorsCarryPhysicalLineNumbers) {
  const fs::path p = write("m.tsv", "# comment\n\nid=a\nnonsense\n");
  try {
    cl::load_manifest(p);
    FAIL() << "expected MalformedManifest";
  } catch (const cl::MalformedManifest& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
}

TEST_F(IngestionTest, ManifestRejectsBadFields) {
  EXPECT_THROW(cl::load_manifest(write("a.tsv", "id=a\tyear=zed\n")),
               cl::MalformedManifest);
  EXPECT_THROW(cl::load_manifest(write("b.tsv", "id=a\tsplit=half\n")),
               cl::MalformedManifest);
  EXPECT_THROW(cl::load_manifest(write("c.tsv", "id=a\tgray=maybe\n")),
               cl::MalformedManifest);
  EXPECT_THROW(cl::load_manifest(write("d.tsv", "id=a\tmystery=1\n")),
               cl::MalformedManifest);
  EXPECT_THROW(cl::load_manifest(write("e.tsv", "date_text=1990\n")),
               cl::MalformedManifest);
  EXPECT_THROW(cl::load_manifest(write("f.tsv", "id=\n")),
               cl::MalformedManifest);
}

TEST_F(IngestionTest, ManifestRoundTrips) {
  std::vector<cl::Sample> samples(2);
  samples[0].id = "a";
  samples[0].date_text = "the 1950s";
  samples[0].split = cl::Split::train;
  samples[1].id = "b";
  samples[1].label_year = 1999;
  samples[1].split = cl::Split::test;
  samples[1].collection_id = "k";
  samples[1].path = "img/b.pgm";
  samples[1].grayscale = true;
  const fs::path p = dir_ / "round.tsv";
  cl::save_manifest(p, samples);
  const std::vector<cl::Sample> back = cl::load_manifest(p);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].date_text, "the 1950s");
  EXPECT_EQ(back[1].label_year, samples[1].label_year);
  EXPECT_EQ(back[1].collection_id, "k");
  EXPECT_TRUE(back[1].grayscale);
}

TEST_F(IngestionTest, ResolveLabelsPrefersExplicitYear) {
  std::vector<cl::Sample> samples(3);
  samples[0].id = "a";
  samples[0].date_text = "1965";
  samples[1].id = "b";
  samples[1].date_text = "1965";
  samples[1].label_year = 2001;  // explicit year outranks the text
  samples[2].id = "c";
  samples[2].date_text = "undated";
  cl::resolve_labels(samples, cl::TemporalBinning{});
  ASSERT_TRUE(samples[0].label_bin.has_value());
  EXPECT_EQ(samples[0].label_bin->value, 6);
  EXPECT_EQ(*samples[0].label_year, 1965);
  EXPECT_EQ(samples[1].label_bin->value, 10);
  EXPECT_FALSE(samples[2].label_year.has_value());
  EXPECT_FALSE(samples[2].label_bin.has_value());
}

TEST_F(IngestionTest, ResolveLabelsLeavesOutOfWindowUnbinned) {
  std::vector<cl::Sample> samples(1);
  samples[0].id = "a";
  samples[0].label_year = 1850;
  cl::resolve_labels(samples, cl::TemporalBinning{});
  EXPECT_TRUE(samples[0].label_year.has_value());
  EXPECT_FALSE(samples[0].label_bin.has_value());
}

TEST_F(IngestionTest, PnmRoundTripsBothDepths) {
  cl::ImageTensor gray = cl::ImageTensor::zeros(3, 4, 1);
  cl::ImageTensor rgb = cl::ImageTensor::zeros(2, 2, 3);
  for (std::size_t i = 0; i < gray.values.size(); ++i) {
    gray.values[i] = static_cast<double>(i) / 12.0;
  }
  for (std::size_t i = 0; i < rgb.values.size(); ++i) {
    rgb.values[i] = static_cast<double>(i) / 12.0;
  }
  cl::write_pnm(dir_ / "g.pgm", gray);
  cl::write_pnm(dir_ / "c.ppm", rgb);
  const cl::ImageTensor g = cl::read_pnm(dir_ / "g.pgm");
  const cl::ImageTensor c = cl::read_pnm(dir_ / "c.ppm");
  EXPECT_EQ(g.height, 3);
  EXPECT_EQ(g.width, 4);
  EXPECT_EQ(g.channels, 1);
  EXPECT_EQ(c.channels, 3);
  for (std::size_t i = 0; i < gray.values.size(); ++i) {
    EXPECT_NEAR(g.values[i], gray.values[i], 0.5 / 255.0 + 1e-9);
  }
  for (std::size_t i = 0; i < rgb.values.size(); ++i) {
    EXPECT_NEAR(c.values[i], rgb.values[i], 0.5 / 255.0 + 1e-9);
  }
}

TEST_F(IngestionTest, PnmHonorsHeaderCommentsAndRejectsGarbage) {
  const std::string ok = "P5\n# a comment\n2 2\n255\nabcd";
  const cl::ImageTensor img = cl::read_pnm(write("ok.pgm", ok));
  EXPECT_EQ(img.height, 2);
  EXPECT_EQ(img.width, 2);
  EXPECT_THROW(cl::read_pnm(write("bad1.pgm", "P2\n2 2\n255\nabcd")),
               cl::CorruptFile);
  EXPECT_THROW(cl::read_pnm(write("bad2.pgm", "P5\n2 2\n255\nab")),
               cl::CorruptFile);
  EXPECT_THROW(cl::read_pnm(write("bad3.pgm", "P5\n2 2\n127\nabcd")),
               cl::CorruptFile);
  EXPECT_THROW(cl::read_pnm(dir_ / "absent.pgm"), cl::CorruptFile);
}

TEST_F(IngestionTest, GrayscaleUsesLumaWeights) {
  cl::ImageTensor rgb = cl::ImageTensor::zeros(1, 3, 3);
  // Pixel 0 pure red, pixel 1 pure green, pixel 2 pure blue.
  rgb.at(0, 0, 0) = 1.0;
  rgb.at(1, 0, 1) = 1.0;
  rgb.at(2, 0, 2) = 1.0;
  const cl::ImageTensor g = cl::grayscale_transform(rgb);
  ASSERT_EQ(g.channels, 1);
  EXPECT_NEAR(g.at(0, 0, 0), 0.299, 1e-12);
  EXPECT_NEAR(g.at(0, 0, 1), 0.587, 1e-12);
  EXPECT_NEAR(g.at(0, 0, 2), 0.114, 1e-12);
  EXPECT_THROW(cl::grayscale_transform(g), cl::AlreadyGrayscale);
  EXPECT_THROW(cl::grayscale_transform(cl::ImageTensor::zeros(1, 1, 2)),
               cl::ShapeMismatch);
}

TEST_F(IngestionTest, FeatureFileRoundTripsExactly) {
  cl::FeatureMatrix m = cl::FeatureMatrix::zeros(3, 4);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    m.values[i] = static_cast<float>(i) * 0.37f - 1.0f;
  }
  const fs::path p = dir_ / "f.chrn";
  cl::save_features(p, m);
  const cl::FeatureMatrix back = cl::load_features(p, 3, 4);
  EXPECT_EQ(back.values, m.values);
  EXPECT_THROW(cl::load_features(p, 4, 4), cl::ShapeMismatch);
  EXPECT_THROW(cl::load_features(p, 3, 5), cl::ShapeMismatch);
}

TEST_F(IngestionTest, FeatureFileRejectsCorruption) {
  cl::FeatureMatrix m = cl::FeatureMatrix::zeros(2, 2);
  const fs::path p = dir_ / "f.chrn";
  cl::save_features(p, m);

  std::string bytes;
  {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    bytes = buf.str();
  }
  // Bad magic.
  std::string broken = bytes;
  broken[0] = 'X';
  EXPECT_THROW(cl::load_features(write("bad_magic.chrn", broken)),
               cl::CorruptFile);
  // Future version.
  broken = bytes;
  broken[4] = 9;
  EXPECT_THROW(cl::load_features(write("bad_ver.chrn", broken)),
               cl::VersionMismatch);
  // Truncated payload.
  broken = bytes.substr(0, bytes.size() - 3);
  EXPECT_THROW(cl::load_features(write("trunc.chrn", broken)),
               cl::ShapeMismatch);
  // Truncated header.
  broken = bytes.substr(0, 10);
  EXPECT_THROW(cl::load_features(write("short.chrn", broken)),
               cl::CorruptFile);
  // Non-finite payload value (f32 +inf, little endian).
  broken = bytes;
  const std::size_t payload = broken.size() - 4;
  broken[payload + 0] = '\x00';
  broken[payload + 1] = '\x00';
  broken[payload + 2] = '\x80';
  broken[payload + 3] = '\x7f';
  EXPECT_THROW(cl::load_features(write("inf.chrn", broken)),
               cl::NonFiniteValue);
}

TEST_F(IngestionTest, RowNormalizationLeavesZeroRows) {
  cl::FeatureMatrix m = cl::FeatureMatrix::zeros(2, 3);
  m.values = {3.0f, 0.0f, 4.0f, 0.0f, 0.0f, 0.0f};
  cl::l2_normalize_rows(m);
  EXPECT_NEAR(m.values[0], 0.6f, 1e-6);
  EXPECT_NEAR(m.values[2], 0.8f, 1e-6);
  EXPECT_EQ(m.values[3], 0.0f);
  EXPECT_EQ(m.values[4], 0.0f);
}

TEST_F(IngestionTest, WritersNeverLeavePartialFiles) {
  // Writes land via rename; the temp name must be gone afterwards and the
  // destination complete.
  cl::FeatureMatrix m = cl::FeatureMatrix::zeros(1, 1);
  const fs::path p = dir_ / "atomic.chrn";
  cl::save_features(p, m);
  EXPECT_TRUE(fs::exists(p));
  EXPECT_FALSE(fs::exists(dir_ / "atomic.chrn.tmp"));
}

}  // namespace
