#include "dmusic/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "dmusic/error.hpp"
#include "dmusic/multipole.hpp"
#include "dmusic/rng.hpp"

namespace dmusic {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Calls fn(i) for i in [0, count) on up to `threads` workers. Results must be
// written by index so aggregation does not depend on scheduling.
template <class Fn>
void for_each_index(int count, int threads, Fn&& fn) {
  const int workers = std::clamp(threads, 1, std::max(1, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Table-1 style instance: center gaps L (1 + U(0, slack)), sources uniform in
// [O_j - D, O_j + D]. Clusters may overlap when L < 2D.
Instance decoupling_instance(Rng& rng, double L, double D, const DecouplingStudyOptions& opts) {
  const int k = uniform_int(rng, opts.k_min, opts.k_max);
  std::vector<double> centers(static_cast<std::size_t>(k), 0.0);
  for (int j = 1; j < k; ++j)
    centers[static_cast<std::size_t>(j)] = centers[static_cast<std::size_t>(j - 1)] + L * (1.0 + uniform(rng, 0.0, opts.center_slack));
  const double mid = 0.5 * (centers.front() + centers.back()) - uniform(rng, -1.0, 1.0);
  for (auto& c : centers) c -= mid;

  std::vector<PointSource> sources;
  for (int j = 0; j < k; ++j) {
    const int n = uniform_int(rng, opts.sources_min, opts.sources_max);
    for (int q = 0; q < n; ++q) {
      const double y = centers[static_cast<std::size_t>(j)] + uniform(rng, -D, D);
      const double modulus = uniform(rng, 0.5, 2.0);
      const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      sources.push_back({y, std::polar(modulus, phase), j});
    }
  }
  Instance out{SourceMeasure(std::move(sources)), {}};
  out.region.centers = std::move(centers);
  out.region.half_widths.assign(static_cast<std::size_t>(k), D);
  out.region.L = L;
  out.region.D = D;
  out.region.omega = 1.0;
  return out;
}

}  // namespace

double sorted_pair_deviation(std::vector<double> found, std::vector<double> truth) {
  if (found.size() != truth.size()) return std::numeric_limits<double>::infinity();
  std::sort(found.begin(), found.end());
  std::sort(truth.begin(), truth.end());
  double dev = 0.0;
  for (std::size_t i = 0; i < found.size(); ++i) dev = std::max(dev, std::abs(found[i] - truth[i]));
  return dev;
}

double min_separation(std::vector<double> locations) {
  std::sort(locations.begin(), locations.end());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < locations.size(); ++i) best = std::min(best, locations[i] - locations[i - 1]);
  return best;
}

std::pair<double, double> feasible_d_interval(int s, double sigma) {
  require(s >= 1, ErrorKind::invalid_input, "s must be >= 1");
  // sup{D : multipole_order(D) <= target}; the order is nondecreasing in D and
  // never below ceil(D), so the supremum lies in (0, target].
  auto sup_at_most = [&](int target) {
    if (target <= 0) return 0.0;
    double lo = 0.0;
    double hi = static_cast<double>(target);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      bool ok = false;
      try {
        ok = multipole_order(mid, sigma, 1.0) <= target;
      } catch (const Error&) {
        ok = false;
      }
      (ok ? lo : hi) = mid;
    }
    return lo;
  };
  const double lo = sup_at_most(s - 1);
  const double hi = sup_at_most(s);
  require(hi > lo, ErrorKind::invalid_input, "no D yields multipole order " + std::to_string(s));
  return {lo, hi};
}

DecouplingStudy decoupling_success_ratio(int s, double L, int trials, std::uint64_t seed0,
                                         const DecouplingStudyOptions& opts) {
  require(trials >= 1, ErrorKind::invalid_input, "trials must be >= 1");
  require(L > 0.0, ErrorKind::invalid_input, "L must be positive");
  const auto [d_lo, d_hi] = feasible_d_interval(s, opts.sigma);

  DecouplingStudy study;
  study.s = s;
  study.L = L;
  study.trials = trials;
  study.records.resize(static_cast<std::size_t>(trials));

  for_each_index(trials, opts.threads, [&](int t) {
    TrialRecord rec;
    rec.seed = derive_seed(seed0, static_cast<std::uint64_t>(t));
    Rng rng(rec.seed);
    // Keep D strictly inside the interval so the recomputed order is exactly s.
    const double D = d_lo + (d_hi - d_lo) * uniform(rng, 1e-9, 1.0);
    const Instance inst = decoupling_instance(rng, L, D, opts);
    rec.K = inst.region.K();
    rec.L = L;
    rec.D = D;
    rec.source_count = static_cast<int>(inst.measure.size());
    rec.truth = inst.measure.locations();
    rec.min_true_separation = min_separation(rec.truth);

    SampledMeasurement meas = synthesize(inst.measure, opts.n, 1.0, opts.sigma, rng());
    if (opts.modulated) meas = modulate(meas);
    DecoupleOptions dopts;
    dopts.c_mea = opts.c_mea;
    dopts.modulated = opts.modulated;
    const DecoupleResult dec = decouple(meas, inst.region.centers, D, opts.sigma, dopts);
    rec.multipole_order = dec.order_count;
    rec.decouple_residual = dec.residual_norm;
    rec.decouple_success = dec.success;

    bool locals_ok = true;
    const double scale = 1.0 / std::sqrt(static_cast<double>(opts.n));
    for (int j = 0; j < rec.K; ++j) {
      SampledMeasurement local = synthesize(inst.measure.cluster(j), opts.n, 1.0, 0.0, std::nullopt);
      if (opts.modulated) local = modulate(local);
      const double err = (dec.fitted_locals[static_cast<std::size_t>(j)] - local.values).norm() * scale;
      rec.local_errors.push_back(err);
      locals_ok = locals_ok && err <= opts.local_gate * opts.sigma;
    }
    rec.success = dec.success && locals_ok;
    study.records[static_cast<std::size_t>(t)] = std::move(rec);
  });

  for (const auto& r : study.records) study.successes += r.success ? 1 : 0;
  return study;
}

SeparationSearch min_separation_search(int s, const std::vector<double>& L_grid, int trials, std::uint64_t seed0,
                                       const DecouplingStudyOptions& opts, double threshold) {
  require(!L_grid.empty(), ErrorKind::invalid_input, "separation grid is empty");
  require(std::is_sorted(L_grid.begin(), L_grid.end()), ErrorKind::invalid_input, "separation grid must be ascending");
  SeparationSearch out;
  out.s = s;
  for (double L : L_grid) {
    const DecouplingStudy study = decoupling_success_ratio(s, L, trials, seed0, opts);
    out.L_tested.push_back(L);
    out.ratios.push_back(study.ratio());
    if (study.ratio() > threshold) {
      out.L_star = L;
      return out;
    }
  }
  fail(ErrorKind::search_exhausted, "no separation in the grid reaches a success ratio above " +
                                        std::to_string(threshold) + " for s = " + std::to_string(s));
}

std::vector<double> default_separation_grid() {
  std::vector<double> grid;
  for (int i = 6; i <= 100; ++i) grid.push_back(0.5 * i * std::numbers::pi);
  return grid;
}

InstanceSpec CompareConfig::default_instance() {
  InstanceSpec spec;
  spec.k_min = 2;
  spec.k_max = 5;
  spec.L = 12.0 * std::numbers::pi;
  spec.D = std::numbers::pi;
  spec.omega = 1.0;
  spec.sources_min = 1;
  spec.sources_max = 3;
  spec.min_intra_separation = 1.0;
  spec.max_intra_separation = 1.2;
  spec.amplitude_min = 1.0;
  spec.amplitude_max = 1.0;
  spec.center_slack = 0.1;
  return spec;
}

PipelineConfig CompareConfig::default_pipeline() {
  PipelineConfig cfg;
  cfg.o_init = 0.0;
  cfg.d_init = 100.0;
  cfg.c_msf = 0.95;
  return cfg;
}

std::vector<TrialRecord> compare_dmusic_vs_music(const CompareConfig& config, int trials, std::uint64_t seed0) {
  require(trials >= 1, ErrorKind::invalid_input, "trials must be >= 1");
  config.pipeline.validate();
  const PipelineConfig& pc = config.pipeline;
  const double ts = pc.o_init - pc.d_init;
  const double te = pc.o_init + pc.d_init;

  auto make = [&](std::uint64_t seed, Instance& inst) {
    inst = random_instance(config.instance, seed);
    return synthesize(inst.measure, config.n, config.instance.omega, config.sigma, mix_seed(seed));
  };

  if (config.warmup) {
    Instance inst;
    const SampledMeasurement meas = make(derive_seed(seed0, 0), inst);
    (void)run(meas, pc);
    (void)standard_music(meas, ts, te, pc.tps_source, config.sigma, pc.music);
  }

  std::vector<TrialRecord> records(static_cast<std::size_t>(trials));
  for_each_index(trials, config.threads, [&](int t) {
    TrialRecord rec;
    rec.seed = derive_seed(seed0, static_cast<std::uint64_t>(t));
    Instance inst;
    const SampledMeasurement meas = make(rec.seed, inst);
    rec.K = inst.region.K();
    rec.L = inst.region.L;
    rec.D = inst.region.D;
    rec.source_count = static_cast<int>(inst.measure.size());
    rec.truth = inst.measure.locations();
    rec.min_true_separation = min_separation(rec.truth);

    auto t0 = Clock::now();
    const PipelineReport report = run(meas, pc);
    rec.wall_time_dmusic = seconds_since(t0);
    t0 = Clock::now();
    const MusicResult music = standard_music(meas, ts, te, pc.tps_source, config.sigma, pc.music);
    rec.wall_time_music = seconds_since(t0);

    rec.decouple_success = report.decouple_success;
    rec.fallback_used = report.fallback_used;
    rec.decouple_residual = report.residual_norm.value_or(kNaN);
    rec.multipole_order = report.multipole_order.value_or(0);
    rec.stage_seconds = report.stage_seconds;
    rec.dmusic_locations = report.locations;
    rec.music_locations = music.locations;
    rec.location_deviation_max = sorted_pair_deviation(report.locations, rec.truth);
    rec.music_location_deviation_max = sorted_pair_deviation(music.locations, rec.truth);
    rec.success = rec.location_deviation_max < rec.min_true_separation;
    rec.music_success = rec.music_location_deviation_max < rec.min_true_separation;
    records[static_cast<std::size_t>(t)] = std::move(rec);
  });
  return records;
}

CompareSummary summarize(const std::vector<TrialRecord>& records) {
  CompareSummary out;
  out.trials = static_cast<int>(records.size());
  std::vector<double> td, tm, speedup;
  out.max_deviation_dmusic = 0.0;
  out.max_deviation_music = 0.0;
  for (const auto& r : records) {
    out.dmusic_successes += r.success ? 1 : 0;
    out.music_successes += r.music_success ? 1 : 0;
    out.joint_successes += (r.success && r.music_success) ? 1 : 0;
    out.fallbacks += r.fallback_used ? 1 : 0;
    td.push_back(r.wall_time_dmusic);
    tm.push_back(r.wall_time_music);
    if (r.wall_time_dmusic > 0.0) speedup.push_back(r.wall_time_music / r.wall_time_dmusic);
    out.max_deviation_dmusic = std::max(out.max_deviation_dmusic, r.location_deviation_max);
    out.max_deviation_music = std::max(out.max_deviation_music, r.music_location_deviation_max);
  }
  out.median_time_dmusic = median(td);
  out.median_time_music = median(tm);
  out.median_speedup = median(speedup);
  return out;
}

}  // namespace dmusic
