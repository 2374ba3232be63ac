#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dmusic/model.hpp"
#include "dmusic/multipole.hpp"

namespace dmusic {

/// Real polynomial with ascending coefficients. Trailing zeros are trimmed so
/// that degree() reports the true degree (0 for the zero polynomial).
class RealPolynomial {
 public:
  RealPolynomial() = default;
  explicit RealPolynomial(std::vector<double> coefficients);

  [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return c_; }
  [[nodiscard]] int degree() const noexcept { return c_.empty() ? 0 : static_cast<int>(c_.size()) - 1; }
  [[nodiscard]] bool is_zero() const noexcept { return c_.empty(); }
  [[nodiscard]] double operator()(double x) const noexcept;
  [[nodiscard]] RealPolynomial derivative(int k = 1) const;
  /// Antiderivative vanishing at 0.
  [[nodiscard]] RealPolynomial antiderivative() const;

  friend RealPolynomial operator*(const RealPolynomial& a, const RealPolynomial& b);

 private:
  std::vector<double> c_;
};

/// Real roots in [-1, 1] found by sign changes on a grid and bracketed refinement.
std::vector<double> roots_in_unit_interval(const RealPolynomial& p, int grid_points = 10000);

/// max |p| over [-1, 1]: dense grid plus refinement at the critical points.
double sup_norm(const RealPolynomial& p, int grid_points = 10000);

/// A measured quantity paired with the bound it should respect.
struct BoundCheck {
  double measured = 0.0;
  double bound = 0.0;
  /// Whether the inputs satisfied the hypotheses under which the bound is claimed.
  bool precondition_met = true;

  [[nodiscard]] bool holds(double tol = 1e-8) const noexcept { return measured <= bound + tol; }
};

/// (||p^(k)||_inf, n^2 (n^2 - 1) ... (n^2 - (k-1)^2) / (1 * 3 * ... * (2k-1)) * ||p||_inf).
BoundCheck markov_ratio(const RealPolynomial& p, int k);

/// (||p||_inf, (n + 1)^2 ||p||_1) with the L1 norm integrated between sign changes.
BoundCheck linf_l1_ratio(const RealPolynomial& p);

/// |int_{-1}^{1} e^{i lam x} psi(x) dx| by panel-wise Gauss-Kronrod quadrature.
std::complex<double> oscillatory_integral(const RealPolynomial& psi, double lam);

/// (|int e^{i lam x} psi|, 3.2 ||psi|| / lam) or, on the second branch,
/// (..., 0.8 n^4 ||psi|| / lam^3). Needs lam >= 2 n^2; the second branch also
/// needs psi(+-1) = psi'(+-1) = 0.
BoundCheck oscillatory_bound(const RealPolynomial& psi, double lam, bool second_branch);

/// Evenly spaced grid on [-1, 1] fine enough to stand in for the continuum limit.
Eigen::VectorXd dense_grid(int n = 100001);

/// |<H[j] a_j, H[p] a_p>| / (||H[j] a_j|| ||H[p] a_p||) against
/// 3.2 (2s-1)^2 / |Omega dO| (plain) or 0.8 (2s+2)^4 (2s+3)^2 / |Omega dO|^3 (modulated).
/// precondition_met reports |Omega dO| >= 2 (2s-2)^2, resp. 2 (2s+2)^2.
BoundCheck correlation_ratio(const MultipoleBasis& basis_j, const MultipoleBasis& basis_p, const Eigen::VectorXcd& a_j,
                             const Eigen::VectorXcd& a_p);

/// ((1/sqrt(N)) ||Y - sum_j H[j] Q_j||, sigma) for noiseless data, exact
/// multipole coefficients and s = multipole_order(D, sigma, ||mu||_TV).
BoundCheck residual_bound_check(const SourceMeasure& measure, const ClusterRegion& region, double sigma, int n);

struct SweepReport {
  std::string name;
  int draws = 0;
  int violations = 0;
  int precondition_skips = 0;
  double max_ratio = 0.0;  // max measured / bound over draws with a positive bound
  double max_excess = 0.0;  // max (measured - bound)
  std::map<std::string, double> worst_case;  // parameters of the draw attaining max_ratio

  [[nodiscard]] bool passed() const noexcept { return violations == 0; }
};

SweepReport sweep_markov(int draws, std::uint64_t seed, double tol = 1e-8);
SweepReport sweep_linf_l1(int draws, std::uint64_t seed, double tol = 1e-8);
SweepReport sweep_oscillatory(int draws, bool second_branch, std::uint64_t seed, double tol = 1e-8);
/// `grid_points` sets the dense grid used for the inner products.
SweepReport sweep_correlation(int draws, bool modulated, std::uint64_t seed, double tol = 1e-8,
                              int grid_points = 100001);
SweepReport sweep_residual(int draws, std::uint64_t seed, double sigma = 1e-3, int n = 1000);

}  // namespace dmusic
