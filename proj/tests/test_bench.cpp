#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dmusic/bench.hpp"
#include "dmusic/error.hpp"
#include "dmusic/multipole.hpp"

using namespace dmusic;

TEST(Bench, SortedPairDeviation) {
  EXPECT_DOUBLE_EQ(sorted_pair_deviation({3.0, 1.0}, {1.1, 2.5}), 0.5);
  EXPECT_TRUE(std::isinf(sorted_pair_deviation({1.0}, {1.0, 2.0})));
  EXPECT_DOUBLE_EQ(min_separation({5.0, 1.0, 2.5}), 1.5);
}

TEST(Bench, FeasibleIntervalBracketsOrder) {
  for (int s : {3, 12, 20, 29}) {
    const auto [lo, hi] = feasible_d_interval(s, 1e-3);
    ASSERT_LT(lo, hi);
    EXPECT_EQ(multipole_order(hi, 1e-3, 1.0), s);
    EXPECT_EQ(multipole_order(0.5 * (lo + hi), 1e-3, 1.0), s);
    if (lo > 0.0) EXPECT_LT(multipole_order(lo * (1.0 - 1e-9), 1e-3, 1.0), s);
  }
  const auto [lo12, hi12] = feasible_d_interval(12, 1e-3);
  EXPECT_LT(lo12, std::numbers::pi);
  EXPECT_GE(hi12, std::numbers::pi);
}

TEST(Bench, DecouplingRatioSmallOrder) {
  const auto st = decoupling_success_ratio(3, 3.0 * std::numbers::pi, 50, 1);
  EXPECT_GE(st.ratio(), 0.99);
  for (const auto& r : st.records) {
    EXPECT_EQ(r.multipole_order, 3);
    EXPECT_EQ(static_cast<int>(r.local_errors.size()), r.K);
  }
}

TEST(Bench, DecouplingRatioFarBelowSeparation) {
  const auto st = decoupling_success_ratio(12, std::numbers::pi, 50, 2);
  EXPECT_LT(st.ratio(), 0.5);
}

TEST(Bench, ThreadCountDoesNotChangeResults) {
  DecouplingStudyOptions one, four;
  four.threads = 4;
  const auto a = decoupling_success_ratio(12, 11.0 * std::numbers::pi, 16, 3, one);
  const auto b = decoupling_success_ratio(12, 11.0 * std::numbers::pi, 16, 3, four);
  ASSERT_EQ(a.successes, b.successes);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].seed, b.records[i].seed);
    EXPECT_EQ(a.records[i].decouple_residual, b.records[i].decouple_residual);
  }
}

TEST(Bench, RatioMonotoneInSeparation) {
  double previous = 0.0;
  for (double k = 9.0; k <= 12.0; k += 0.5) {
    const double ratio = decoupling_success_ratio(12, k * std::numbers::pi, 200, 4).ratio();
    EXPECT_GE(ratio, previous - 0.03) << "L = " << k << " pi";
    previous = ratio;
  }
}

TEST(Bench, SeparationSearchSmallOrder) {
  const auto search = min_separation_search(3, default_separation_grid(), 200, 5);
  EXPECT_NEAR(search.L_star, 3.0 * std::numbers::pi, 1e-12);
}

TEST(Bench, SeparationSearchExhausted) {
  const std::vector<double> grid{std::numbers::pi, 1.5 * std::numbers::pi};
  try {
    (void)min_separation_search(12, grid, 20, 6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::search_exhausted);
  }
}

TEST(Bench, DefaultGrid) {
  const auto g = default_separation_grid();
  EXPECT_NEAR(g.front(), 3.0 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(g.back(), 50.0 * std::numbers::pi, 1e-12);
  EXPECT_EQ(g.size(), 95u);
}

TEST(Bench, CompareIsReproducible) {
  CompareConfig cc;
  cc.warmup = false;
  const auto a = compare_dmusic_vs_music(cc, 1, 77);
  const auto b = compare_dmusic_vs_music(cc, 1, 77);
  EXPECT_EQ(a[0].location_deviation_max, b[0].location_deviation_max);
  EXPECT_EQ(a[0].music_location_deviation_max, b[0].music_location_deviation_max);
  EXPECT_EQ(a[0].dmusic_locations, b[0].dmusic_locations);
  EXPECT_TRUE(std::isfinite(a[0].wall_time_dmusic));
  EXPECT_GE(a[0].L, 12.0 * std::numbers::pi);
  const auto sum = summarize(a);
  EXPECT_EQ(sum.trials, 1);
}
