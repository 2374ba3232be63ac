#include "dmusic/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dmusic/error.hpp"

namespace dmusic {

SampledMeasurement subsample(const SampledMeasurement& meas, double lambda) {
  require(lambda > 0.0 && lambda <= 1.0, ErrorKind::invalid_input, "lambda must lie in (0, 1]");
  std::vector<Eigen::Index> kept;
  for (Eigen::Index l = 0; l < meas.grid.size(); ++l)
    if (std::abs(meas.grid(l)) <= lambda * (1.0 + 1e-12)) kept.push_back(l);
  require(kept.size() >= 3, ErrorKind::insufficient_samples,
          "lambda = " + std::to_string(lambda) + " keeps only " + std::to_string(kept.size()) + " samples");
  SampledMeasurement out;
  out.omega = meas.omega;
  out.sigma = meas.sigma;
  out.modulated = meas.modulated;
  const auto n = static_cast<Eigen::Index>(kept.size());
  out.grid.resize(n);
  out.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.grid(i) = meas.grid(kept[static_cast<std::size_t>(i)]);
    out.values(i) = meas.values(kept[static_cast<std::size_t>(i)]);
  }
  return out;
}

double interval_radius(double lambda, double omega, double sigma) {
  return 2.0 * std::numbers::pi / (lambda * omega) * std::cbrt(sigma);
}

ClusterEstimate merge_intervals(std::span<const double> raw_centers, double d, double ict) {
  require(ict > 0.0, ErrorKind::invalid_input, "ICT must be positive");
  require(d >= 0.0, ErrorKind::invalid_input, "interval radius must be >= 0");
  ClusterEstimate out;
  out.raw_centers.assign(raw_centers.begin(), raw_centers.end());
  std::sort(out.raw_centers.begin(), out.raw_centers.end());
  out.interval_radius = d;
  out.ict = ict;
  const auto& c = out.raw_centers;
  for (std::size_t i = 0; i < c.size();) {
    std::size_t j = i;
    while (j + 1 < c.size() && c[j + 1] - c[j] < ict) ++j;
    const double lo = c[i] - d;
    const double hi = c[j] + d;
    out.merged_centers.push_back(0.5 * (lo + hi));
    out.merged_half_widths.push_back(0.5 * (hi - lo));
    i = j + 1;
  }
  return out;
}

ClusterEstimate detect_clusters(const SampledMeasurement& meas, double o_init, double d_init, double ict,
                                double sigma, const DetectOptions& opts) {
  require(d_init > 0.0, ErrorKind::invalid_input, "initial half-width must be positive");
  require(sigma > 0.0, ErrorKind::invalid_input, "sigma must be positive");
  const SampledMeasurement sub = subsample(meas, opts.lambda);
  const MusicResult coarse = music_with_prior(sub, o_init, d_init, opts.tps, sigma, opts.music);
  if (coarse.locations.empty())
    fail(ErrorKind::empty_structure, "subsampled MUSIC image has no peaks at lambda = " + std::to_string(opts.lambda));
  ClusterEstimate out = merge_intervals(coarse.locations, interval_radius(opts.lambda, meas.omega, sigma), ict);
  out.shrinkage = opts.lambda;
  return out;
}

}  // namespace dmusic
