#pragma once

#include <span>
#include <vector>

#include "dmusic/hankel_music.hpp"
#include "dmusic/model.hpp"

namespace dmusic {

struct ClusterEstimate {
  std::vector<double> raw_centers;         // peaks of the subsampled image, ascending
  std::vector<double> merged_centers;      // O_j
  std::vector<double> merged_half_widths;  // D_j, spatial units
  double interval_radius = 0.0;            // d
  double shrinkage = 0.5;                  // lambda
  double ict = 0.0;

  [[nodiscard]] int K() const noexcept { return static_cast<int>(merged_centers.size()); }
};

/// Keeps the samples with |x| <= lambda.
SampledMeasurement subsample(const SampledMeasurement& meas, double lambda);

/// d = 2 pi sigma^(1/3) / (lambda Omega).
double interval_radius(double lambda, double omega, double sigma);

/// Single-linkage merge of [c - d, c + d] intervals whose centers are less than
/// `ict` apart. Input order does not matter.
ClusterEstimate merge_intervals(std::span<const double> raw_centers, double d, double ict);

struct DetectOptions {
  double lambda = 0.5;
  double tps = 0.05;
  MusicOptions music;
};

/// Subsampled prior MUSIC over [o_init - d_init, o_init + d_init] followed by
/// interval merging. Throws empty_structure when the image has no peaks.
ClusterEstimate detect_clusters(const SampledMeasurement& meas, double o_init, double d_init, double ict,
                                double sigma, const DetectOptions& opts = {});

}  // namespace dmusic
