#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dmusic/cluster.hpp"
#include "dmusic/error.hpp"
#include "dmusic/rng.hpp"

using namespace dmusic;

TEST(Subsample, IdentityAtOne) {
  const auto m = synthesize(SourceMeasure({{1.0, 1.0, 0}}), 101, 1.0, 0.0, std::nullopt);
  const auto s = subsample(m, 1.0);
  EXPECT_EQ(s.size(), 101);
  EXPECT_EQ(s.values, m.values);
}

TEST(Subsample, HalfBand) {
  const auto m = synthesize(SourceMeasure({{1.0, 1.0, 0}}), 1000, 1.0, 0.0, std::nullopt);
  const auto s = subsample(m, 0.5);
  EXPECT_NEAR(s.size(), 500, 2);
  for (int l = 0; l < s.size(); ++l) EXPECT_LE(std::abs(s.grid(l)), 0.5);
  EXPECT_NO_THROW(s.validate());
}

TEST(Subsample, TooNarrow) {
  const auto m = synthesize(SourceMeasure({{1.0, 1.0, 0}}), 1000, 1.0, 0.0, std::nullopt);
  try {
    (void)subsample(m, 1e-6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_samples);
  }
}

TEST(IntervalRadius, Values) {
  EXPECT_NEAR(interval_radius(0.5, 1.0, 1e-3), 0.4 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(interval_radius(1.0, 1.0, 1.0), 2.0 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(interval_radius(0.5, 2.0, 1e-3), 0.2 * std::numbers::pi, 1e-12);
}

TEST(MergeIntervals, ChainsAndHull) {
  const std::vector<double> raw{10.0, 0.0, 1.5, 3.0};
  const auto e = merge_intervals(raw, 0.5, 2.0);
  ASSERT_EQ(e.K(), 2);
  EXPECT_DOUBLE_EQ(e.merged_centers[0], 1.5);
  EXPECT_DOUBLE_EQ(e.merged_half_widths[0], 2.0);
  EXPECT_DOUBLE_EQ(e.merged_centers[1], 10.0);
  EXPECT_DOUBLE_EQ(e.merged_half_widths[1], 0.5);
}

TEST(MergeIntervals, OrderIndependentAndSeparated) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> raw;
    for (int i = 0, n = uniform_int(rng, 1, 12); i < n; ++i) raw.push_back(uniform(rng, -50, 50));
    const auto a = merge_intervals(raw, 1.0, 6.0);
    std::shuffle(raw.begin(), raw.end(), rng);
    const auto b = merge_intervals(raw, 1.0, 6.0);
    EXPECT_EQ(a.merged_centers, b.merged_centers);
    EXPECT_EQ(a.merged_half_widths, b.merged_half_widths);
    for (int j = 1; j < a.K(); ++j) {
      const double gap = (a.merged_centers[j] - a.merged_half_widths[j]) -
                         (a.merged_centers[j - 1] + a.merged_half_widths[j - 1]);
      // Neighbouring hulls come from raw centers at least ICT apart.
      EXPECT_GE(gap + 2.0, 6.0 - 1e-12);
    }
    for (int j = 0; j < a.K(); ++j) {
      const bool covers = std::any_of(raw.begin(), raw.end(), [&](double c) {
        return std::abs(c - a.merged_centers[j]) <= a.merged_half_widths[j];
      });
      EXPECT_TRUE(covers);
    }
  }
}

TEST(DetectClusters, TwoDistantSources) {
  const double c = 20.0 * std::numbers::pi;
  const auto m = synthesize(SourceMeasure({{-c, 1.0, 0}, {c, 1.0, 1}}), 1000, 1.0, 1e-3, 5);
  const auto e = detect_clusters(m, 0.0, 100.0, 2.0 * std::numbers::pi, 1e-3);
  ASSERT_EQ(e.K(), 2);
  EXPECT_LE(std::abs(e.merged_centers[0] + c), e.interval_radius);
  EXPECT_LE(std::abs(e.merged_centers[1] - c), e.interval_radius);
}

TEST(DetectClusters, ThreeSourcesOneCluster) {
  const auto m = synthesize(SourceMeasure({{-1.0, 1.0, 0}, {0.0, 1.0, 0}, {1.0, 1.0, 0}}), 1000, 1.0, 1e-3, 6);
  const auto e = detect_clusters(m, 0.0, 100.0, 2.0 * std::numbers::pi, 1e-3);
  ASSERT_EQ(e.K(), 1);
  for (double y : {-1.0, 0.0, 1.0}) EXPECT_LE(std::abs(y - e.merged_centers[0]), e.merged_half_widths[0]);
}

TEST(DetectClusters, SingleSource) {
  const auto m = synthesize(SourceMeasure({{13.0, cplx(0, 1), 0}}), 1000, 1.0, 1e-3, 7);
  const auto e = detect_clusters(m, 0.0, 100.0, 2.0 * std::numbers::pi, 1e-3);
  ASSERT_EQ(e.K(), 1);
  EXPECT_LE(std::abs(e.merged_centers[0] - 13.0), e.interval_radius);
}

TEST(DetectClusters, CoverageOnRandomInstances) {
  InstanceSpec spec;
  spec.k_min = 2;
  spec.k_max = 4;
  spec.L = 12.0 * std::numbers::pi;
  spec.D = std::numbers::pi;
  spec.sources_max = 3;
  spec.min_intra_separation = 1.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = random_instance(spec, seed);
    const auto m = synthesize(inst.measure, 1000, 1.0, 1e-3, seed);
    const auto e = detect_clusters(m, 0.0, 100.0, 2.0 * std::numbers::pi, 1e-3);
    for (const auto& s : inst.measure.sources()) {
      bool inside = false;
      for (int j = 0; j < e.K(); ++j)
        inside = inside || std::abs(s.location - e.merged_centers[j]) <= e.merged_half_widths[j] + e.interval_radius;
      EXPECT_TRUE(inside) << "seed " << seed << " source " << s.location;
    }
  }
}
