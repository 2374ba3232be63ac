#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace dmusic {

using cplx = std::complex<double>;

struct PointSource {
  double location = 0.0;
  cplx amplitude{1.0, 0.0};
  int cluster = -1;  // -1 when no assignment is known
};

/// Discrete measure sum_q a_q delta_{y_q}. Nonempty, every amplitude nonzero.
class SourceMeasure {
 public:
  SourceMeasure() = default;
  explicit SourceMeasure(std::vector<PointSource> sources);

  [[nodiscard]] const std::vector<PointSource>& sources() const noexcept { return sources_; }
  [[nodiscard]] std::size_t size() const noexcept { return sources_.size(); }
  [[nodiscard]] bool empty() const noexcept { return sources_.empty(); }

  [[nodiscard]] double total_variation() const;
  [[nodiscard]] double min_amplitude() const;
  [[nodiscard]] std::vector<double> locations() const;  // sorted ascending
  [[nodiscard]] bool has_cluster_assignment() const;
  [[nodiscard]] int cluster_count() const;  // max assignment + 1

  /// Sources assigned to cluster `j`; empty measure if none.
  [[nodiscard]] SourceMeasure cluster(int j) const;
  [[nodiscard]] SourceMeasure shifted(double delta) const;

  friend SourceMeasure operator+(const SourceMeasure& a, const SourceMeasure& b);

 private:
  std::vector<PointSource> sources_;
};

/// Union of K intervals centered at O_j with half-width D_j / Omega
/// (stored here already divided by Omega, i.e. in spatial units).
struct ClusterRegion {
  std::vector<double> centers;
  std::vector<double> half_widths;
  double L = 0.0;  // min center separation, units of 1/Omega
  double D = 0.0;  // max half-width bound, units of 1/Omega
  double omega = 1.0;

  [[nodiscard]] int K() const noexcept { return static_cast<int>(centers.size()); }
  [[nodiscard]] bool contains(double y) const;
  /// Throws invalid_input if the (K, L, D, Omega) invariants do not hold.
  void validate(double tol = 1e-12) const;
};

struct SampledMeasurement {
  Eigen::VectorXd grid;
  Eigen::VectorXcd values;
  double omega = 1.0;
  double sigma = 0.0;
  bool modulated = false;

  [[nodiscard]] int size() const noexcept { return static_cast<int>(grid.size()); }
  /// Grid step; the grid is evenly spaced.
  [[nodiscard]] double spacing() const;
  void validate() const;
};

/// x_l = -1 + 2 l / (N - 1), l = 0..N-1.
Eigen::VectorXd uniform_grid(int n);

/// f^t(x) = 1 - x^2.
inline double modulation_window(double x) noexcept { return 1.0 - x * x; }

/// Noiseless Fourier data sum_q a_q exp(i Omega y_q x) on `grid`.
Eigen::VectorXcd fourier_data(const SourceMeasure& measure, const Eigen::VectorXd& grid, double omega);

/// Samples the measure on the uniform grid and adds noise when a seed is
/// given. The realized noise always satisfies ||W||_2 / sqrt(N) <= sigma.
SampledMeasurement synthesize(const SourceMeasure& measure, int n, double omega, double sigma,
                              std::optional<std::uint64_t> seed);

/// Multiplies by 1 - x^2. Throws invalid_state on an already-modulated input.
SampledMeasurement modulate(const SampledMeasurement& meas);

struct InstanceSpec {
  int k_min = 1;
  int k_max = 1;
  double L = 12.0 * 3.141592653589793;
  double D = 3.141592653589793;
  double omega = 1.0;
  int sources_min = 1;
  int sources_max = 1;
  double min_intra_separation = 0.0;
  /// Upper bound on the gap between neighbouring sources of one cluster;
  /// unset means the sources may spread over the whole interval.
  std::optional<double> max_intra_separation;
  double amplitude_min = 0.5;
  double amplitude_max = 2.0;
  /// Neighbouring centers are L/Omega * (1 + U(0, center_slack)) apart.
  double center_slack = 0.5;
};

struct Instance {
  SourceMeasure measure;
  ClusterRegion region;
};

Instance random_instance(const InstanceSpec& spec, std::uint64_t seed);

}  // namespace dmusic
