// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria (0 when all pass).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "dmusic/bench.hpp"
#include "dmusic/bounds_oracle.hpp"
#include "dmusic/hankel_music.hpp"
#include "dmusic/multipole.hpp"
#include "dmusic/rng.hpp"

using namespace dmusic;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome table1() {
  struct Setting {
    int s;
    double L;
  };
  bool ok = true;
  std::string detail;
  for (const Setting st : {Setting{3, 3.0 * kPi}, Setting{12, 12.0 * kPi}, Setting{20, 22.5 * kPi}}) {
    const double ratio = decoupling_success_ratio(st.s, st.L, 200, 1001).ratio();
    ok = ok && ratio >= 0.99;
    detail += fmt("s=%d L=%.1fpi ratio=%.3f; ", st.s, st.L / kPi, ratio);
  }
  return {ok, detail};
}

Outcome residual_bound() {
  const SweepReport r = sweep_residual(200, 2002);
  return {r.violations == 0 && r.precondition_skips == 0,
          fmt("draws=%d violations=%d max residual/sigma=%.3f", r.draws, r.violations, r.max_ratio)};
}

std::vector<TrialRecord> compare_records() {
  static std::vector<TrialRecord> records = [] {
    CompareConfig cc;
    return compare_dmusic_vs_music(cc, 100, 3003);
  }();
  return records;
}

Outcome parity() {
  const auto records = compare_records();
  const CompareSummary s = summarize(records);
  const double frac_d = static_cast<double>(s.dmusic_successes) / s.trials;
  const double frac_m = static_cast<double>(s.music_successes) / s.trials;
  return {frac_d >= 0.95 && frac_m >= 0.95,
          fmt("trials=%d dmusic=%d music=%d joint=%d fallbacks=%d", s.trials, s.dmusic_successes, s.music_successes,
              s.joint_successes, s.fallbacks)};
}

Outcome timing() {
  auto records = compare_records();
  records.resize(50);
  const CompareSummary s = summarize(records);
  return {s.median_speedup >= 3.0, fmt("median speedup=%.2fx over %d trials (music %.3fs, dmusic %.3fs)",
                                       s.median_speedup, s.trials, s.median_time_music, s.median_time_dmusic)};
}

Outcome bound_oracles() {
  std::vector<SweepReport> reps{sweep_markov(1000, 4001),           sweep_linf_l1(1000, 4002),
                                sweep_oscillatory(1000, false, 4003), sweep_oscillatory(1000, true, 4004),
                                sweep_correlation(1000, false, 4005), sweep_correlation(1000, true, 4006)};
  bool ok = true;
  std::string detail;
  for (const auto& r : reps) {
    ok = ok && r.passed();
    detail += fmt("%s: %d/%d viol, max ratio %.3f; ", r.name.c_str(), r.violations, r.draws - r.precondition_skips,
                  r.max_ratio);
  }
  return {ok, detail};
}

Outcome s_selection() {
  const int a = multipole_order(kPi, 1e-3, 1.0);
  const int b = multipole_order(0.5, 1e-3, 1.0);
  return {a == 12 && b == 4, fmt("s(pi)=%d s(0.5)=%d", a, b)};
}

Outcome noiseless_exactness() {
  const double tps = 1e-3;
  int passed = 0;
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    Rng rng(derive_seed(5005, static_cast<std::uint64_t>(draw)));
    const int k = uniform_int(rng, 1, 5);
    std::vector<PointSource> src;
    std::vector<double> ys;
    while (static_cast<int>(ys.size()) < k) {
      const double y = uniform(rng, -8.0, 8.0);
      if (std::all_of(ys.begin(), ys.end(), [&](double z) { return std::abs(z - y) >= 4.0 * kPi / 100.0; })) {
        ys.push_back(y);
        src.push_back({y, std::polar(uniform(rng, 0.5, 2.0), uniform(rng, 0.0, 2.0 * kPi)), 0});
      }
    }
    const auto meas = synthesize(SourceMeasure(src), 201, 1.0, 0.0, std::nullopt);
    const auto r = standard_music(meas, -10.0, 10.0, tps, 1e-10);
    const double dev = sorted_pair_deviation(r.locations, ys);
    worst = std::max(worst, dev);
    passed += dev <= tps ? 1 : 0;
  }
  return {passed == 100, fmt("%d/100 draws within TPS, worst deviation %.2e", passed, worst)};
}

Outcome modulation_vs_plain() {
  DecouplingStudyOptions plain;
  plain.modulated = false;
  const double mod = decoupling_success_ratio(12, 12.0 * kPi, 200, 6006).ratio();
  const double pl = decoupling_success_ratio(12, 12.0 * kPi, 200, 6006, plain).ratio();
  return {mod >= 0.99 && pl < 0.99, fmt("modulated=%.3f plain=%.3f at s=12, L=12pi", mod, pl)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"decoupling success ratio at (s, L) = (3, 3pi), (12, 12pi), (20, 22.5pi) >= 0.99", table1},
      {"noiseless best-fit residual <= sigma on 200 instances", residual_bound},
      {"D-MUSIC and MUSIC both recover >= 95% of 100 instances", parity},
      {"median MUSIC / D-MUSIC wall time >= 3 over 50 trials", timing},
      {"polynomial, oscillatory and correlation bounds: zero violations in 1000 draws", bound_oracles},
      {"multipole order: s(pi) = 12, s(0.5) = 4", s_selection},
      {"noiseless MUSIC within TPS on 100 draws of <= 5 sources", noiseless_exactness},
      {"s = 12, L = 12pi: modulated passes the 99% gate, plain fails", modulation_vs_plain},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Outcome o = criteria[i].second();
    failures += o.pass ? 0 : 1;
    std::printf("[%s] criterion %zu: %s | %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
