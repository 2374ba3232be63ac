#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dmusic/cluster.hpp"
#include "dmusic/hankel_music.hpp"
#include "dmusic/model.hpp"
#include "dmusic/multipole.hpp"

namespace dmusic {

struct PipelineConfig {
  double lambda = 0.5;
  double o_init = 0.0;
  double d_init = 100.0;
  double tps_cluster = 0.05;
  double tps_source = 1e-3;
  /// Interval combining threshold; 2 * d_prior when unset.
  std::optional<double> ict;
  /// Expected cluster half-width in spatial units.
  double d_prior = 3.141592653589793;
  /// Per-cluster MUSIC images [O_j - w, O_j + w] with w = max(D_j, d, d_prior).
  bool floor_local_window = true;
  double c_mea = 3.0;
  double c_msf = 0.9;
  double sigma = 1e-3;
  /// Forces the multipole order s.
  std::optional<int> order_override;
  /// Shrinkage factors tried after `lambda` when detection or decoupling fails.
  std::vector<double> lambda_ladder;
  bool redistribute_residual = true;
  bool modulated = true;
  /// Options for cluster detection and for the full-measurement fallback.
  MusicOptions music;
  /// Options for the per-cluster MUSIC runs on decoupled local measurements.
  MusicOptions local_music = default_local_music();

  static MusicOptions default_local_music();

  [[nodiscard]] double effective_ict() const { return ict.value_or(2.0 * d_prior); }
  /// Throws invalid_input naming the first offending field.
  void validate() const;
};

struct PipelineReport {
  std::vector<double> locations;  // ascending
  bool decouple_success = false;
  bool fallback_used = false;
  std::optional<ClusterEstimate> cluster_estimate;
  std::map<std::string, double> stage_seconds;
  std::optional<double> residual_norm;
  std::optional<int> multipole_order;
  std::vector<std::string> warnings;
};

/// Detect clusters, decouple the modulated measurement, run prior MUSIC per
/// cluster. Any failure on that path drops back to prior MUSIC on the full
/// measurement over [o_init - d_init, o_init + d_init].
PipelineReport run(const SampledMeasurement& meas, const PipelineConfig& config);

}  // namespace dmusic
