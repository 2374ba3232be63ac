#include "dmusic/multipole.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/QR>

#include "dmusic/error.hpp"

namespace dmusic {

double multipole_tail_term(double D, int l) {
  require(D > 0.0, ErrorKind::invalid_input, "D must be positive");
  require(l >= 0 && static_cast<double>(l) + 1.0 > D, ErrorKind::invalid_input, "tail term needs l + 1 > D");
  const double ll = static_cast<double>(l);
  const double log_term = ll * std::log(D) + std::log(ll + 1.0) - std::lgamma(ll + 1.0) - 0.5 * std::log(2.0 * ll + 1.0) -
                          std::log(ll + 1.0 - D);
  return std::exp(log_term);
}

int multipole_order(double D, double sigma, double m, int s_max) {
  require(D > 0.0 && std::isfinite(D), ErrorKind::invalid_input, "D must be positive");
  require(sigma > 0.0, ErrorKind::invalid_input, "sigma must be positive");
  require(m > 0.0, ErrorKind::invalid_input, "m must be positive");
  const double target = sigma / m;
  for (int l = std::max(1, static_cast<int>(std::ceil(D))); l <= s_max; ++l)
    if (multipole_tail_term(D, l) <= target) return l;
  fail(ErrorKind::order_overflow, "no multipole order <= " + std::to_string(s_max) + " reaches sigma/m = " +
                                      std::to_string(target) + " for D = " + std::to_string(D));
}

MultipoleBasis build_basis(double center, int s, const Eigen::VectorXd& grid, double omega, bool modulated) {
  require(s >= 1, ErrorKind::invalid_input, "multipole basis needs s >= 1");
  MultipoleBasis basis{center, s, grid, omega, modulated, Eigen::MatrixXcd(grid.size(), s)};
  for (Eigen::Index l = 0; l < grid.size(); ++l) {
    const double x = grid(l);
    cplx v = std::polar(1.0, omega * center * x);
    if (modulated) v *= modulation_window(x);
    // (ix)^r sqrt(2r+1) by recurrence on r.
    cplx power = v;
    const cplx ix(0.0, x);
    for (int r = 0; r < s; ++r) {
      basis.columns(l, r) = power * std::sqrt(2.0 * r + 1.0);
      power *= ix;
    }
  }
  return basis;
}

Eigen::VectorXcd exact_coefficients(const SourceMeasure& measure, double center, int s, double omega) {
  require(s >= 1, ErrorKind::invalid_input, "need s >= 1");
  Eigen::VectorXcd q = Eigen::VectorXcd::Zero(s);
  for (const auto& src : measure.sources()) {
    const double u = omega * (src.location - center);
    q(0) += src.amplitude;
    if (u == 0.0) continue;
    const double log_u = std::log(std::abs(u));
    for (int r = 1; r < s; ++r) {
      const double mag = std::exp(r * log_u - std::lgamma(r + 1.0) - 0.5 * std::log(2.0 * r + 1.0));
      const double sign = (u < 0.0 && (r % 2 == 1)) ? -1.0 : 1.0;
      q(r) += src.amplitude * (sign * mag);
    }
  }
  return q;
}

DecoupleResult decouple(const SampledMeasurement& meas, std::span<const double> centers, double D, double sigma,
                        const DecoupleOptions& opts) {
  meas.validate();
  require(meas.modulated == opts.modulated, ErrorKind::invalid_state,
          opts.modulated ? "modulated decoupling needs a modulated measurement"
                         : "plain decoupling needs an unmodulated measurement");
  require(!centers.empty(), ErrorKind::invalid_input, "decouple needs at least one cluster center");
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      require(centers[i] != centers[j], ErrorKind::invalid_input, "cluster centers must be pairwise distinct");
  require(opts.c_msf > 0.0 && opts.c_msf < 1.0, ErrorKind::invalid_input, "C_msf must lie in (0, 1)");
  require(opts.c_mea > 0.0, ErrorKind::invalid_input, "C_mea must be positive");
  require(sigma > 0.0, ErrorKind::invalid_input, "sigma must be positive");

  const int k = static_cast<int>(centers.size());
  const int n = meas.size();
  const int s = opts.order_override ? *opts.order_override : multipole_order(D, sigma, opts.m);
  require(s >= 1, ErrorKind::invalid_input, "multipole order must be >= 1");

  Eigen::MatrixXcd stacked(n, k * s);
  for (int j = 0; j < k; ++j)
    stacked.middleCols(j * s, s) = build_basis(centers[static_cast<std::size_t>(j)], s, meas.grid, meas.omega, opts.modulated).columns;

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(stacked);
  const Eigen::VectorXcd theta = cod.solve(meas.values);

  DecoupleResult out;
  out.order_count = s;
  out.centers.assign(centers.begin(), centers.end());
  out.rank = static_cast<int>(cod.rank());
  {
    const auto& qtz = cod.matrixQTZ();
    const double largest = std::abs(qtz(0, 0));
    const double smallest = out.rank > 0 ? std::abs(qtz(out.rank - 1, out.rank - 1)) : 0.0;
    out.condition_estimate = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
  }
  if (out.rank < k * s) {
    out.conditioning_warning = true;
    out.warnings.push_back("stacked multipole matrix is rank deficient (rank " + std::to_string(out.rank) + " of " +
                           std::to_string(k * s) + "); least-norm solution used");
  } else if (out.condition_estimate > opts.condition_warning_threshold) {
    out.conditioning_warning = true;
    out.warnings.push_back("stacked multipole matrix is ill-conditioned (estimate " +
                           std::to_string(out.condition_estimate) + ")");
  }

  Eigen::VectorXcd model = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXcd coeff = theta.segment(j * s, s);
    Eigen::VectorXcd fitted = stacked.middleCols(j * s, s) * coeff;
    model += fitted;
    out.coefficients.push_back(std::move(coeff));
    out.fitted_locals.push_back(std::move(fitted));
  }
  out.residual = meas.values - model;
  out.residual_norm = out.residual.norm() / std::sqrt(static_cast<double>(n));
  out.success = out.residual_norm <= opts.c_mea * sigma;
  if (!out.success) return out;

  std::vector<int> kept;
  for (int l = 0; l < n; ++l)
    if (!opts.modulated || std::abs(meas.grid(l)) <= opts.c_msf) kept.push_back(l);
  require(kept.size() >= 2, ErrorKind::insufficient_samples, "no samples left inside |x| <= C_msf");

  for (int j = 0; j < k; ++j) {
    Eigen::VectorXcd local = out.fitted_locals[static_cast<std::size_t>(j)];
    if (opts.redistribute_residual) local += out.residual;
    SampledMeasurement lm;
    lm.grid.resize(static_cast<Eigen::Index>(kept.size()));
    lm.values.resize(static_cast<Eigen::Index>(kept.size()));
    lm.omega = meas.omega;
    lm.sigma = sigma;
    lm.modulated = false;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const int l = kept[i];
      const double x = meas.grid(l);
      lm.grid(static_cast<Eigen::Index>(i)) = x;
      lm.values(static_cast<Eigen::Index>(i)) = opts.modulated ? local(l) / modulation_window(x) : local(l);
    }
    out.modulated_locals.push_back(std::move(local));
    out.local_measurements.push_back(std::move(lm));
  }
  return out;
}

}  // namespace dmusic
