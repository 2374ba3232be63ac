#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dmusic/model.hpp"

namespace dmusic {

/// J(omega) is reported as this value when the steering vector is (numerically)
/// inside the signal subspace.
inline constexpr double kImagingCap = 1e14;
inline constexpr double kDefaultOrderConstant = 5.0;
inline constexpr int kDefaultMaxSourcesPerCluster = 8;

/// Square Hankel matrix of dimension floor((N-1)/2) + 1 with H(p, q) = values[p + q].
Eigen::MatrixXcd build_hankel(const Eigen::VectorXcd& values);

/// #{k : sv_k > c_order * sigma * sqrt(N_hat + 1)}, clipped to N_hat; `override_order`
/// wins when set.
int estimate_order(std::span<const double> singular_values, double sigma, int n_hat,
                   std::optional<int> override_order = std::nullopt, double c_order = kDefaultOrderConstant);

enum class SubspaceMethod {
  /// Full SVD of the Hankel matrix.
  full_svd,
  /// Leading singular triplets from a randomized range finder with power
  /// iterations; falls back to the full SVD when the estimated order reaches
  /// the computed rank.
  truncated,
};

struct HankelDecomposition {
  int hankel_dim = 0;
  /// All singular values for the full SVD, the leading ones otherwise.
  Eigen::VectorXd singular_values;
  Eigen::MatrixXcd signal_subspace;  // U1, hankel_dim x n
  /// U2, hankel_dim x (hankel_dim - n); empty for a truncated decomposition.
  Eigen::MatrixXcd noise_subspace;
  int estimated_order = 0;
  double sample_spacing = 0.0;  // h = Omega * grid spacing
  bool truncated = false;
};

struct MusicOptions {
  std::optional<int> order_override;
  double c_order = kDefaultOrderConstant;
  /// Floor on the subgrid used by the prior-informed variant is 2 * n_max + 3.
  int n_max = kDefaultMaxSourcesPerCluster;
  /// Peak selection parameters; defaults are derived from the image when unset.
  std::optional<int> pcr;
  std::optional<int> dcr;
  std::optional<double> dct;
  /// Keep at most `estimated_order` peaks, ranked by J.
  bool limit_peaks_to_order = true;
  /// Replaces 2 * n_max + 3 as the subgrid floor of the prior-informed variant.
  std::optional<int> min_subgrid_samples;
  SubspaceMethod subspace = SubspaceMethod::full_svd;
  /// Rank computed by the truncated method is min(dim, 2 * n_max + oversampling).
  int oversampling = 10;
  int power_iterations = 3;
};

/// SVD of the Hankel matrix and split into signal and noise subspaces. `sigma`
/// drives the order estimate unless an override is given.
HankelDecomposition decompose(const SampledMeasurement& meas, double sigma, const MusicOptions& opts = {});

struct ImagingResult {
  std::vector<double> test_points;
  std::vector<double> values;
  std::vector<double> peaks;
};

/// Evaluates J(omega) = ||Phi|| / ||U2^* Phi|| on ts, ts + tps, ..., <= te.
ImagingResult imaging(const HankelDecomposition& dec, double ts, double te, double tps);
ImagingResult imaging(const SampledMeasurement& meas, std::optional<int> order, double ts, double te, double tps);

struct PeakParams {
  int pcr = 3;
  int dcr = 3;
  double dct = 0.0;
};

/// PCR = DCR = max(3, ceil(0.05 / tps)), DCT = 10 * median(|dJ|) / tps.
PeakParams default_peak_params(const ImagingResult& img, double tps);

/// Window maxima over +-pcr samples whose finite-difference slope reaches dct
/// somewhere within +-dcr samples. Sorted ascending.
std::vector<double> select_peaks(const ImagingResult& img, int pcr, int dcr, double dct);

struct MusicResult {
  std::vector<double> locations;
  ImagingResult image;
  int estimated_order = 0;
  int hankel_dim = 0;
  int samples_used = 0;
};

/// Standard MUSIC on the full measurement over [ts, te].
MusicResult standard_music(const SampledMeasurement& meas, double ts, double te, double tps, double sigma,
                           const MusicOptions& opts = {});

/// MUSIC with a prior interval [center - half_width, center + half_width]:
/// centralize, resample with spacing min(pi / (2 Omega D), spacing leaving at
/// least 2 n_max + 3 samples),
/// image on [-D, D] and shift back.
MusicResult music_with_prior(const SampledMeasurement& meas, double center, double half_width, double tps,
                             double sigma, const MusicOptions& opts = {});

/// Stride used on `meas` by music_with_prior; exposed for tests and reports.
/// `min_samples` defaults to 2 * n_max + 3.
int prior_subgrid_stride(const SampledMeasurement& meas, double half_width, int n_max,
                         std::optional<int> min_samples = std::nullopt);

}  // namespace dmusic
