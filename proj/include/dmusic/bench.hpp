#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "dmusic/model.hpp"
#include "dmusic/pipeline.hpp"

namespace dmusic {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One Monte-Carlo trial. Norms are scaled by 1/sqrt(N) throughout; fields that
/// an experiment does not produce stay NaN or empty.
struct TrialRecord {
  std::uint64_t seed = 0;
  int K = 0;
  double L = kNaN;
  double D = kNaN;
  int source_count = 0;
  int multipole_order = 0;
  double decouple_residual = kNaN;
  std::vector<double> local_errors;
  double location_deviation_max = kNaN;        // D-MUSIC
  double music_location_deviation_max = kNaN;  // standard MUSIC
  double min_true_separation = kNaN;
  double wall_time_dmusic = kNaN;
  double wall_time_music = kNaN;
  bool decouple_success = false;
  bool success = false;        // decoupling gate, or D-MUSIC recovery in comparisons
  bool music_success = false;  // standard MUSIC recovery in comparisons
  bool fallback_used = false;
  std::map<std::string, double> stage_seconds;
  std::vector<double> truth;
  std::vector<double> dmusic_locations;
  std::vector<double> music_locations;
};

/// Sorted-pair deviation max_i |a_i - b_i|; infinity when the counts differ.
double sorted_pair_deviation(std::vector<double> found, std::vector<double> truth);

/// Smallest gap between consecutive sorted locations (infinity for one location).
double min_separation(std::vector<double> locations);

/// [D_lo, D_hi] with multipole_order(D, sigma, 1) = s exactly for D in (D_lo, D_hi].
std::pair<double, double> feasible_d_interval(int s, double sigma);

struct DecouplingStudyOptions {
  double sigma = 1e-3;
  int n = 1000;
  bool modulated = true;
  int k_min = 2;
  int k_max = 10;
  int sources_min = 1;
  int sources_max = 3;
  double center_slack = 0.1;
  double c_mea = 3.0;
  double local_gate = 6.0;  // local errors must stay below local_gate * sigma
  int threads = 1;
};

struct DecouplingStudy {
  int s = 0;
  double L = 0.0;
  int trials = 0;
  int successes = 0;
  std::vector<TrialRecord> records;

  [[nodiscard]] double ratio() const noexcept { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

/// Random (K, L, D, Omega = 1) instances with D drawn from the feasible interval
/// of `s`; success iff the global fit is within c_mea * sigma and every local
/// error within local_gate * sigma.
DecouplingStudy decoupling_success_ratio(int s, double L, int trials, std::uint64_t seed0,
                                         const DecouplingStudyOptions& opts = {});

struct SeparationSearch {
  int s = 0;
  double L_star = kNaN;
  std::vector<double> L_tested;
  std::vector<double> ratios;
};

/// Smallest L in the ascending grid with success ratio strictly above `threshold`.
/// Throws search_exhausted when none qualifies.
SeparationSearch min_separation_search(int s, const std::vector<double>& L_grid, int trials, std::uint64_t seed0,
                                       const DecouplingStudyOptions& opts = {}, double threshold = 0.99);

/// Grid {3 pi, 3.5 pi, ..., 50 pi}.
std::vector<double> default_separation_grid();

struct CompareConfig {
  InstanceSpec instance = default_instance();
  int n = 1000;
  double sigma = 1e-3;
  PipelineConfig pipeline = default_pipeline();
  /// Run both algorithms once before the first timed trial.
  bool warmup = true;
  int threads = 1;

  static InstanceSpec default_instance();
  static PipelineConfig default_pipeline();
};

/// Runs D-MUSIC and standard MUSIC (over the pipeline's initial interval with
/// TPS_source) on identical data.
std::vector<TrialRecord> compare_dmusic_vs_music(const CompareConfig& config, int trials, std::uint64_t seed0);

struct CompareSummary {
  int trials = 0;
  int dmusic_successes = 0;
  int music_successes = 0;
  int joint_successes = 0;
  int fallbacks = 0;
  double median_time_dmusic = kNaN;
  double median_time_music = kNaN;
  double median_speedup = kNaN;  // median over trials of music / dmusic
  double max_deviation_dmusic = kNaN;
  double max_deviation_music = kNaN;
};

CompareSummary summarize(const std::vector<TrialRecord>& records);

}  // namespace dmusic
