#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dmusic/model.hpp"

namespace dmusic {

inline constexpr int kMaxMultipoleOrder = 40;

/// D^l (l+1) / (l! sqrt(2l+1) (l+1-D)), evaluated in log space. Requires l + 1 > D.
double multipole_tail_term(double D, int l);

/// Smallest l >= D with multipole_tail_term(D, l) <= sigma / m. Throws
/// order_overflow when no l <= s_max qualifies.
int multipole_order(double D, double sigma, double m = 1.0, int s_max = kMaxMultipoleOrder);

/// Columns h_{r,O}(x) = sqrt(2r+1) e^{i Omega O x} (i x)^r, r = 0..s-1, optionally
/// multiplied by 1 - x^2.
struct MultipoleBasis {
  double center = 0.0;
  int order_count = 0;
  Eigen::VectorXd grid;
  double omega = 1.0;
  bool modulated = false;
  Eigen::MatrixXcd columns;
};

MultipoleBasis build_basis(double center, int s, const Eigen::VectorXd& grid, double omega, bool modulated);

/// Q_r = sum_q a_q (Omega (y_q - O))^r / (sqrt(2r+1) r!), r = 0..s-1.
Eigen::VectorXcd exact_coefficients(const SourceMeasure& measure, double center, int s, double omega);

struct DecoupleOptions {
  double c_mea = 3.0;
  double c_msf = 0.9;
  /// Total-variation scale used when choosing s.
  double m = 1.0;
  std::optional<int> order_override;
  /// Add Res^t to every modulated local measurement before demodulation.
  bool redistribute_residual = true;
  /// false selects the plain (unmodulated) basis; the input must then be unmodulated.
  bool modulated = true;
  /// Stacked matrices with estimated condition number above this are flagged.
  double condition_warning_threshold = 1e13;
};

struct DecoupleResult {
  int order_count = 0;
  std::vector<double> centers;
  /// Demodulated local measurements on |x| <= c_msf (full grid on the plain path).
  std::vector<SampledMeasurement> local_measurements;
  /// H^t[j] theta_j (+ Res^t when redistributing).
  std::vector<Eigen::VectorXcd> modulated_locals;
  /// H^t[j] theta_j without the residual.
  std::vector<Eigen::VectorXcd> fitted_locals;
  std::vector<Eigen::VectorXcd> coefficients;
  Eigen::VectorXcd residual;
  double residual_norm = 0.0;  // ||Res^t|| / sqrt(N)
  bool success = false;
  int rank = 0;
  double condition_estimate = 0.0;
  bool conditioning_warning = false;
  std::vector<std::string> warnings;
};

/// Least-squares split of the global measurement into per-cluster local
/// measurements over stacked multipole bases. `D` is the dimensionless cluster
/// half-width Omega * max_j |y - O_j|.
DecoupleResult decouple(const SampledMeasurement& meas, std::span<const double> centers, double D, double sigma,
                        const DecoupleOptions& opts = {});

}  // namespace dmusic
