#include "dmusic/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dmusic/error.hpp"

namespace dmusic {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_field(bool ok, const char* field, const std::string& what) {
  require(ok, ErrorKind::invalid_input, std::string(field) + ": " + what);
}

}  // namespace

MusicOptions PipelineConfig::default_local_music() {
  MusicOptions o;
  o.dct = 0.0;
  o.subspace = SubspaceMethod::truncated;
  o.min_subgrid_samples = 1 << 20;
  return o;
}

void PipelineConfig::validate() const {
  require_field(lambda > 0.0 && lambda <= 1.0, "lambda", "must lie in (0, 1]");
  for (double l : lambda_ladder) require_field(l > 0.0 && l <= 1.0, "lambda_ladder", "entries must lie in (0, 1]");
  require_field(std::isfinite(o_init), "o_init", "must be finite");
  require_field(d_init > 0.0 && std::isfinite(d_init), "d_init", "must be positive");
  require_field(tps_cluster > 0.0, "tps_cluster", "must be positive");
  require_field(tps_source > 0.0, "tps_source", "must be positive");
  require_field(!ict || *ict > 0.0, "ict", "must be positive");
  require_field(d_prior > 0.0, "d_prior", "must be positive");
  require_field(c_mea > 0.0, "c_mea", "must be positive");
  require_field(c_msf > 0.0 && c_msf < 1.0, "c_msf", "must lie in (0, 1)");
  require_field(sigma > 0.0 && std::isfinite(sigma), "sigma", "must be positive");
  require_field(!order_override || *order_override >= 1, "order_override", "must be >= 1");
  require_field(music.n_max >= 1, "music.n_max", "must be >= 1");
  require_field(local_music.n_max >= 1, "local_music.n_max", "must be >= 1");
}

PipelineReport run(const SampledMeasurement& meas, const PipelineConfig& config) {
  config.validate();
  meas.validate();
  require(!meas.modulated, ErrorKind::invalid_state, "pipeline expects an unmodulated measurement");
  const auto total_start = Clock::now();
  PipelineReport report;

  std::vector<double> lambdas{config.lambda};
  lambdas.insert(lambdas.end(), config.lambda_ladder.begin(), config.lambda_ladder.end());

  DecoupleOptions dopts;
  dopts.c_mea = config.c_mea;
  dopts.c_msf = config.c_msf;
  dopts.order_override = config.order_override;
  dopts.redistribute_residual = config.redistribute_residual;
  dopts.modulated = config.modulated;

  std::optional<SampledMeasurement> working;
  try {
    working = config.modulated ? modulate(meas) : meas;
  } catch (const Error& e) {
    report.warnings.push_back(std::string("modulation failed: ") + e.what());
  }

  for (std::size_t attempt = 0; working && attempt < lambdas.size() && !report.decouple_success; ++attempt) {
    DetectOptions det;
    det.lambda = lambdas[attempt];
    det.tps = config.tps_cluster;
    det.music = config.music;
    try {
      auto t0 = Clock::now();
      ClusterEstimate est = detect_clusters(meas, config.o_init, config.d_init, config.effective_ict(), config.sigma, det);
      report.stage_seconds["detect"] += seconds_since(t0);
      report.cluster_estimate = est;

      double d_max = 0.0;
      for (double w : est.merged_half_widths) d_max = std::max(d_max, w);
      t0 = Clock::now();
      const DecoupleResult dec = decouple(*working, est.merged_centers, meas.omega * d_max, config.sigma, dopts);
      report.stage_seconds["decouple"] += seconds_since(t0);
      report.residual_norm = dec.residual_norm;
      report.multipole_order = dec.order_count;
      report.warnings.insert(report.warnings.end(), dec.warnings.begin(), dec.warnings.end());
      if (!dec.success) {
        report.warnings.push_back("decoupling residual above C_mea * sigma at lambda = " + std::to_string(det.lambda));
        continue;
      }

      t0 = Clock::now();
      std::vector<double> found;
      for (int j = 0; j < est.K(); ++j) {
        double hw = std::max(est.merged_half_widths[static_cast<std::size_t>(j)], est.interval_radius);
        if (config.floor_local_window) hw = std::max(hw, config.d_prior);
        const MusicResult local = music_with_prior(dec.local_measurements[static_cast<std::size_t>(j)],
                                                   est.merged_centers[static_cast<std::size_t>(j)], hw,
                                                   config.tps_source, config.sigma, config.local_music);
        found.insert(found.end(), local.locations.begin(), local.locations.end());
      }
      report.stage_seconds["local_music"] += seconds_since(t0);
      report.locations = std::move(found);
      report.decouple_success = true;
    } catch (const Error& e) {
      report.warnings.push_back("lambda = " + std::to_string(det.lambda) + ": " + e.what());
    }
  }

  if (!report.decouple_success) {
    report.fallback_used = true;
    const auto t0 = Clock::now();
    try {
      const MusicResult full = music_with_prior(meas, config.o_init, config.d_init, config.tps_source, config.sigma,
                                                config.music);
      report.locations = full.locations;
    } catch (const Error& e) {
      report.warnings.push_back(std::string("fallback MUSIC failed: ") + e.what());
      report.locations.clear();
    }
    report.stage_seconds["fallback"] = seconds_since(t0);
  }

  std::sort(report.locations.begin(), report.locations.end());
  report.stage_seconds["total"] = seconds_since(total_start);
  return report;
}

}  // namespace dmusic
