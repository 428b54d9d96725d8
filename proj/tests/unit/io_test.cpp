#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gbpn/error.hpp"
#include "gbpn/io.hpp"
#include "gbpn/synth.hpp"
#include "test_support.hpp"

namespace gbpn {
namespace {

DepthGrid random_quantised(testing::Rng& rng, int h, int w, double scale) {
  DepthGrid g(h, w, 1);
  for (PixelIndex i = 0; i < g.pixel_count(); ++i) {
    if (rng() % 4 == 0) continue;
    g.at(i) = static_cast<double>(1 + rng() % 65535) * scale;
    g.set_valid(i, true);
  }
  return g;
}

TEST(Pgm, RoundTripOfQuantisedGrid) {
  const auto dir = testing::scratch_dir("pgm_rt");
  testing::Rng rng(1);
  for (int t = 0; t < 5; ++t) {
    const auto g = random_quantised(rng, 1 + rng() % 30, 1 + rng() % 30, kKittiDepthScale);
    write_pgm(dir / "d.pgm", g, kKittiDepthScale);
    EXPECT_TRUE(read_pgm(dir / "d.pgm", kKittiDepthScale) == g);
  }
}

TEST(Pgm, ScaleAndSentinel) {
  const auto dir = testing::scratch_dir("pgm_raw");
  {
    std::ofstream f(dir / "raw.pgm", std::ios::binary);
    f << "P5\n# comment\n2 1\n65535\n";
    const unsigned char px[] = {0x01, 0x00, 0x00, 0x00};  // 256 then 0, big-endian
    f.write(reinterpret_cast<const char*>(px), 4);
  }
  const auto g = read_pgm(dir / "raw.pgm", 1.0 / 256.0);
  EXPECT_EQ(g.at(0, 0), 1.0);
  EXPECT_TRUE(g.valid(0));
  EXPECT_FALSE(g.valid(1));
}

TEST(Pgm, RejectsMalformedFiles) {
  const auto dir = testing::scratch_dir("pgm_bad");
  { std::ofstream(dir / "p2.pgm") << "P2\n1 1\n255\n7\n"; }
  EXPECT_THROW(read_pgm(dir / "p2.pgm", 1.0), ParseError);
  {
    std::ofstream f(dir / "short.pgm", std::ios::binary);
    f << "P5\n4 4\n65535\n";
    f.write("\0\1", 2);
  }
  EXPECT_THROW(read_pgm(dir / "short.pgm", 1.0), ParseError);
  DepthGrid big(1, 1, 1);
  big.at(0) = 1e9;
  big.set_valid(0, true);
  EXPECT_THROW(write_pgm(dir / "big.pgm", big, 1.0), ParameterError);
}

TEST(Pfm, RoundTripWithInvalidPixels) {
  const auto dir = testing::scratch_dir("pfm_rt");
  testing::Rng rng(2);
  DepthGrid g(7, 9, 1);
  for (PixelIndex i = 0; i < g.pixel_count(); ++i) {
    // Values representable in float survive exactly.
    g.at(i) = static_cast<float>(testing::uniform(rng, -10, 10));
    g.set_valid(i, rng() % 5 != 0);
    if (!g.valid(i)) g.at(i) = 0.0;
  }
  write_pfm(dir / "g.pfm", g);
  EXPECT_TRUE(read_pfm(dir / "g.pfm") == g);
}

TEST(Pfm, ThreeChannelGuideRoundTrips) {
  const auto dir = testing::scratch_dir("pfm_rgb");
  SynthOptions o;
  o.height = 11;
  o.width = 13;
  auto guide = make_piecewise_planar_scene(o).guide;
  for (auto& v : guide.data()) v = static_cast<float>(v);
  write_pfm(dir / "rgb.pfm", guide);
  const auto back = read_pfm(dir / "rgb.pfm");
  EXPECT_EQ(back.channels(), 3);
  EXPECT_TRUE(back == guide);
}

TEST(Pfm, NanMarksInvalidAndRowsAreBottomUp) {
  const auto dir = testing::scratch_dir("pfm_nan");
  {
    std::ofstream f(dir / "n.pfm", std::ios::binary);
    f << "Pf\n1 2\n-1.0\n";
    const float rows[] = {5.0f, NAN};  // bottom row first
    f.write(reinterpret_cast<const char*>(rows), sizeof rows);
  }
  const auto g = read_pfm(dir / "n.pfm");
  EXPECT_FALSE(g.valid(g.index(0, 0)));
  EXPECT_TRUE(g.valid(g.index(1, 0)));
  EXPECT_EQ(g.at(1, 0), 5.0);
}

TEST(Pfm, BigEndianDataIsRead) {
  const auto dir = testing::scratch_dir("pfm_be");
  {
    std::ofstream f(dir / "be.pfm", std::ios::binary);
    f << "Pf\n1 1\n1.0\n";
    const unsigned char be[] = {0x40, 0x20, 0x00, 0x00};  // 2.5f
    f.write(reinterpret_cast<const char*>(be), 4);
  }
  EXPECT_EQ(read_pfm(dir / "be.pfm").at(0), 2.5);
}

TEST(SparseCsv, Examples) {
  const auto dir = testing::scratch_dir("csv");
  { std::ofstream(dir / "empty.csv") << ""; }
  EXPECT_EQ(read_sparse_csv(dir / "empty.csv", 3, 4).valid_count(), 0U);

  DepthGrid one(3, 4, 1);
  one.at(2, 1) = 3.14159265358979;
  one.set_valid(one.index(2, 1), true);
  write_sparse_csv(dir / "one.csv", one);
  EXPECT_TRUE(read_sparse_csv(dir / "one.csv", 3, 4) == one);

  { std::ofstream(dir / "dup.csv") << "# r,c,d\n1,1,2.0\n\n1,1,4.5\n"; }
  const auto dup = read_sparse_csv(dir / "dup.csv", 3, 4);
  EXPECT_EQ(dup.valid_count(), 1U);
  EXPECT_EQ(dup.at(1, 1), 4.5);

  { std::ofstream(dir / "oob.csv") << "3,0,1.0\n"; }
  EXPECT_THROW(read_sparse_csv(dir / "oob.csv", 3, 4), DimensionError);
  { std::ofstream(dir / "junk.csv") << "1,x,1.0\n"; }
  EXPECT_THROW(read_sparse_csv(dir / "junk.csv", 3, 4), ParseError);
}

TEST(SparseCsv, RandomRoundTrip) {
  const auto dir = testing::scratch_dir("csv_rt");
  testing::Rng rng(3);
  const auto g = testing::random_sparse(rng, 20, 25, 0.2);
  write_sparse_csv(dir / "r.csv", g);
  EXPECT_TRUE(read_sparse_csv(dir / "r.csv", 20, 25) == g);
}

TEST(SampleSparse, Examples) {
  SynthOptions o;
  o.height = 228;
  o.width = 304;
  const auto gt = make_piecewise_planar_scene(o).depth;
  const auto a = sample_sparse(gt, 500, 9);
  EXPECT_EQ(a.valid_count(), 500U);
  EXPECT_TRUE(a == sample_sparse(gt, 500, 9));
  EXPECT_FALSE(a == sample_sparse(gt, 500, 10));
  for (PixelIndex i = 0; i < a.pixel_count(); ++i) {
    if (a.valid(i)) EXPECT_EQ(a.at(i), gt.at(i));
  }
  const auto all = sample_sparse(gt, gt.valid_count(), 1);
  EXPECT_TRUE(std::ranges::equal(all.mask(), gt.mask()));
  EXPECT_THROW(sample_sparse(gt, gt.valid_count() + 1, 1), ParameterError);
}

TEST(DepthDispatch, ByExtension) {
  const auto dir = testing::scratch_dir("dispatch");
  testing::Rng rng(4);
  const auto g = random_quantised(rng, 5, 6, kKittiDepthScale);
  for (const char* name : {"d.pgm", "d.pfm", "d.csv"}) {
    write_depth(dir / name, g);
    EXPECT_TRUE(read_depth(dir / name, kKittiDepthScale, 5, 6) == g) << name;
  }
  EXPECT_THROW(write_depth(dir / "d.png", g), IoError);
  EXPECT_THROW(read_depth(dir / "nothing.pfm"), IoError);
}

TEST(Synth, SceneIsDeterministicAndInRange) {
  SynthOptions o;
  o.height = 40;
  o.width = 50;
  o.seed = 5;
  const auto a = make_piecewise_planar_scene(o);
  const auto b = make_piecewise_planar_scene(o);
  EXPECT_TRUE(a.depth == b.depth);
  EXPECT_TRUE(a.guide == b.guide);
  for (double d : a.depth.data()) {
    EXPECT_GE(d, o.min_depth);
    EXPECT_LE(d, o.max_depth);
  }
  for (double c : a.guide.data()) {
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
  }
}

TEST(Synth, NearestValidFill) {
  DepthGrid sparse(3, 3, 1);
  sparse.at(0, 0) = 1.0;
  sparse.set_valid(sparse.index(0, 0), true);
  sparse.at(2, 2) = 2.0;
  sparse.set_valid(sparse.index(2, 2), true);
  const auto f = nearest_valid_fill(sparse);
  EXPECT_EQ(f.at(0, 1), 1.0);
  EXPECT_EQ(f.at(1, 1), 1.0);  // tie goes to the lower index
  EXPECT_EQ(f.at(2, 1), 2.0);
  EXPECT_EQ(f.valid_count(), 9U);
}

}  // namespace
}  // namespace gbpn
