#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dmusic/bench.hpp"
#include "dmusic/error.hpp"
#include "dmusic/pipeline.hpp"

using namespace dmusic;

TEST(Pipeline, TwoDistantClusters) {
  const double c = 20.0 * std::numbers::pi;
  const auto m = synthesize(SourceMeasure({{-c + 0.3, 1.0, 0}, {c - 0.4, 1.0, 1}}), 1000, 1.0, 1e-3, 8);
  const auto r = run(m, PipelineConfig{});
  EXPECT_TRUE(r.decouple_success);
  EXPECT_FALSE(r.fallback_used);
  ASSERT_EQ(r.locations.size(), 2u);
  EXPECT_LE(std::abs(r.locations[0] - (-c + 0.3)), 0.05);
  EXPECT_LE(std::abs(r.locations[1] - (c - 0.4)), 0.05);
  ASSERT_TRUE(r.cluster_estimate.has_value());
  EXPECT_EQ(r.cluster_estimate->K(), 2);
  for (const char* stage : {"detect", "decouple", "local_music", "total"}) EXPECT_TRUE(r.stage_seconds.count(stage));
}

TEST(Pipeline, SingleClusterMatchesPriorMusic) {
  const auto m = synthesize(SourceMeasure({{4.5, 1.0, 0}, {5.6, cplx(0, 1), 0}}), 1000, 1.0, 1e-3, 9);
  PipelineConfig cfg;
  const auto r = run(m, cfg);
  ASSERT_TRUE(r.decouple_success);
  ASSERT_EQ(r.cluster_estimate->K(), 1);
  const auto direct = music_with_prior(m, 5.05, std::numbers::pi, cfg.tps_source, cfg.sigma,
                                       PipelineConfig::default_local_music());
  ASSERT_EQ(r.locations.size(), direct.locations.size());
  for (std::size_t i = 0; i < direct.locations.size(); ++i)
    EXPECT_LE(std::abs(r.locations[i] - direct.locations[i]), 0.05);
  EXPECT_LE(sorted_pair_deviation(r.locations, {4.5, 5.6}), 0.05);
}

TEST(Pipeline, FallbackWhenDecouplingCannotSucceed) {
  // Clusters closer than the detection resolution, with an impossible acceptance constant.
  const auto m = synthesize(SourceMeasure({{-0.6, 1.0, 0}, {0.6, 1.0, 1}}), 1000, 1.0, 1e-3, 10);
  PipelineConfig cfg;
  cfg.c_mea = 1e-6;
  const auto r = run(m, cfg);
  EXPECT_FALSE(r.decouple_success);
  EXPECT_TRUE(r.fallback_used);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_TRUE(std::is_sorted(r.locations.begin(), r.locations.end()));
}

TEST(Pipeline, AlwaysReturnsSortedList) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = synthesize(SourceMeasure({{-90.0, 1.0, 0}, {0.0, 1.0, 0}, {95.0, 1.0, 0}}), 500, 1.0, 1e-2, seed);
    PipelineConfig cfg;
    cfg.sigma = 1e-2;
    cfg.lambda_ladder = {0.75, 1.0};
    const auto r = run(m, cfg);
    EXPECT_TRUE(std::is_sorted(r.locations.begin(), r.locations.end()));
  }
}

TEST(Pipeline, Deterministic) {
  const auto m = synthesize(SourceMeasure({{-40.0, 1.0, 0}, {-39.0, 1.0, 0}, {10.0, 1.0, 1}}), 1000, 1.0, 1e-3, 11);
  const auto a = run(m, PipelineConfig{});
  const auto b = run(m, PipelineConfig{});
  EXPECT_EQ(a.locations, b.locations);
  EXPECT_EQ(a.decouple_success, b.decouple_success);
  EXPECT_EQ(a.residual_norm, b.residual_norm);
}

TEST(Pipeline, ConsistentWithStandardMusic) {
  CompareConfig cc;
  cc.warmup = false;
  const auto records = compare_dmusic_vs_music(cc, 3, 2024);
  for (const auto& r : records) {
    if (!(r.success && r.music_success)) continue;
    EXPECT_LE(sorted_pair_deviation(r.dmusic_locations, r.music_locations), 0.1) << "seed " << r.seed;
  }
}

TEST(PipelineConfig, ValidationNamesField) {
  PipelineConfig cfg;
  cfg.c_msf = 1.5;
  try {
    cfg.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
    EXPECT_NE(std::string(e.what()).find("c_msf"), std::string::npos);
  }
  cfg = PipelineConfig{};
  cfg.lambda = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Pipeline, RejectsModulatedInput) {
  const auto m = modulate(synthesize(SourceMeasure({{0.0, 1.0, 0}}), 100, 1.0, 0.0, std::nullopt));
  EXPECT_THROW((void)run(m, PipelineConfig{}), Error);
}
