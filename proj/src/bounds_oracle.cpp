#include "dmusic/bounds_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "dmusic/error.hpp"
#include "dmusic/rng.hpp"

namespace dmusic {

RealPolynomial::RealPolynomial(std::vector<double> coefficients) : c_(std::move(coefficients)) {
  for (double v : c_) require(std::isfinite(v), ErrorKind::invalid_input, "polynomial coefficients must be finite");
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

double RealPolynomial::operator()(double x) const noexcept {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

RealPolynomial RealPolynomial::derivative(int k) const {
  require(k >= 0, ErrorKind::invalid_input, "derivative order must be >= 0");
  std::vector<double> c = c_;
  for (int step = 0; step < k && !c.empty(); ++step) {
    std::vector<double> d;
    for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
    c = std::move(d);
  }
  return RealPolynomial(std::move(c));
}

RealPolynomial RealPolynomial::antiderivative() const {
  std::vector<double> c(c_.size() + 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) c[i + 1] = c_[i] / static_cast<double>(i + 1);
  return RealPolynomial(std::move(c));
}

RealPolynomial operator*(const RealPolynomial& a, const RealPolynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  return RealPolynomial(std::move(c));
}

std::vector<double> roots_in_unit_interval(const RealPolynomial& p, int grid_points) {
  require(grid_points >= 2, ErrorKind::invalid_input, "need at least two grid points");
  std::vector<double> roots;
  if (p.degree() == 0) return roots;
  auto at = [&](int i) { return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(grid_points - 1); };
  double x0 = -1.0;
  double f0 = p(x0);
  if (f0 == 0.0) roots.push_back(x0);
  for (int i = 1; i < grid_points; ++i) {
    const double x1 = at(i);
    const double f1 = p(x1);
    if (f1 == 0.0) {
      roots.push_back(x1);
    } else if (f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0)) {
      std::uintmax_t iters = 100;
      const auto bracket = boost::math::tools::toms748_solve([&](double x) { return p(x); }, x0, x1, f0, f1,
                                                             boost::math::tools::eps_tolerance<double>(52), iters);
      roots.push_back(0.5 * (bracket.first + bracket.second));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

double sup_norm(const RealPolynomial& p, int grid_points) {
  if (p.is_zero()) return 0.0;
  double best = std::max(std::abs(p(-1.0)), std::abs(p(1.0)));
  for (int i = 0; i < grid_points; ++i)
    best = std::max(best, std::abs(p(-1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(grid_points - 1))));
  for (double r : roots_in_unit_interval(p.derivative(), grid_points)) best = std::max(best, std::abs(p(r)));
  return best;
}

BoundCheck markov_ratio(const RealPolynomial& p, int k) {
  require(k >= 1, ErrorKind::invalid_input, "derivative order k must be >= 1");
  const double n2 = static_cast<double>(p.degree()) * static_cast<double>(p.degree());
  double factor = 1.0;
  for (int j = 0; j < k; ++j) factor *= (n2 - static_cast<double>(j) * j) / (2.0 * j + 1.0);
  BoundCheck out;
  out.measured = sup_norm(p.derivative(k));
  out.bound = factor * sup_norm(p);
  return out;
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

double integrate(const auto& f, double a, double b) {
  if (b <= a) return 0.0;
  return Kronrod::integrate(f, a, b, 8, 1e-9);
}

}  // namespace

BoundCheck linf_l1_ratio(const RealPolynomial& p) {
  require(!p.is_zero(), ErrorKind::invalid_input, "L1 ratio needs a nonzero polynomial");
  std::vector<double> cuts{-1.0};
  for (double r : roots_in_unit_interval(p)) cuts.push_back(std::clamp(r, -1.0, 1.0));
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  double l1 = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    l1 += std::abs(integrate([&](double x) { return p(x); }, cuts[i], cuts[i + 1]));
  const double n1 = static_cast<double>(p.degree() + 1);
  return {sup_norm(p), n1 * n1 * l1, true};
}

std::complex<double> oscillatory_integral(const RealPolynomial& psi, double lam) {
  require(std::isfinite(lam), ErrorKind::invalid_input, "oscillation frequency must be finite");
  // Panels no longer than half a period keep the integrand smooth on each panel.
  const int panels = std::max(1, static_cast<int>(std::ceil(2.0 * std::abs(lam) / std::numbers::pi)));
  const double w = 2.0 / static_cast<double>(panels);
  double re = 0.0;
  double im = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = -1.0 + w * static_cast<double>(i);
    const double b = i + 1 == panels ? 1.0 : a + w;
    re += integrate([&](double x) { return std::cos(lam * x) * psi(x); }, a, b);
    im += integrate([&](double x) { return std::sin(lam * x) * psi(x); }, a, b);
  }
  return {re, im};
}

BoundCheck oscillatory_bound(const RealPolynomial& psi, double lam, bool second_branch) {
  const double n = static_cast<double>(psi.degree());
  require(lam > 0.0 && lam >= 2.0 * n * n, ErrorKind::precondition,
          "oscillatory bound needs lam >= 2 n^2 (lam = " + std::to_string(lam) + ", n = " + std::to_string(psi.degree()) +
              ")");
  const double norm = sup_norm(psi);
  if (second_branch) {
    const RealPolynomial d = psi.derivative();
    const double tol = 1e-12 * std::max(1.0, norm);
    require(std::abs(psi(-1.0)) <= tol && std::abs(psi(1.0)) <= tol && std::abs(d(-1.0)) <= tol * std::max(1.0, n) &&
                std::abs(d(1.0)) <= tol * std::max(1.0, n),
            ErrorKind::precondition, "second branch needs psi(+-1) = psi'(+-1) = 0");
  }
  BoundCheck out;
  out.measured = std::abs(oscillatory_integral(psi, lam));
  out.bound = second_branch ? 0.8 * std::pow(n, 4) * norm / std::pow(lam, 3) : 3.2 * norm / lam;
  return out;
}

Eigen::VectorXd dense_grid(int n) { return uniform_grid(n); }

BoundCheck correlation_ratio(const MultipoleBasis& basis_j, const MultipoleBasis& basis_p, const Eigen::VectorXcd& a_j,
                             const Eigen::VectorXcd& a_p) {
  require(basis_j.grid.size() == basis_p.grid.size() &&
              (basis_j.grid - basis_p.grid).cwiseAbs().maxCoeff() <= 1e-12,
          ErrorKind::invalid_input, "bases must share the sampling grid");
  require(basis_j.omega == basis_p.omega, ErrorKind::invalid_input, "bases must share Omega");
  require(basis_j.modulated == basis_p.modulated, ErrorKind::invalid_input, "bases must share the modulation flag");
  require(a_j.size() == basis_j.order_count && a_p.size() == basis_p.order_count, ErrorKind::invalid_input,
          "coefficient length must match the basis order");

  const Eigen::VectorXcd vj = basis_j.columns * a_j;
  const Eigen::VectorXcd vp = basis_p.columns * a_p;
  const double denom = vj.norm() * vp.norm();
  require(denom > 0.0, ErrorKind::invalid_input, "correlation of a zero vector is undefined");

  const double s = static_cast<double>(std::max(basis_j.order_count, basis_p.order_count));
  const double t = std::abs(basis_j.omega * (basis_j.center - basis_p.center));
  BoundCheck out;
  out.measured = std::abs(vj.dot(vp)) / denom;
  if (basis_j.modulated) {
    out.bound = t > 0.0 ? 0.8 * std::pow(2.0 * s + 2.0, 4) * std::pow(2.0 * s + 3.0, 2) / (t * t * t)
                        : std::numeric_limits<double>::infinity();
    out.precondition_met = t >= 2.0 * std::pow(2.0 * s + 2.0, 2);
  } else {
    out.bound = t > 0.0 ? 3.2 * std::pow(2.0 * s - 1.0, 2) / t : std::numeric_limits<double>::infinity();
    out.precondition_met = t > 0.0 && t >= 2.0 * std::pow(2.0 * s - 2.0, 2);
  }
  return out;
}

BoundCheck residual_bound_check(const SourceMeasure& measure, const ClusterRegion& region, double sigma, int n) {
  require(!measure.empty(), ErrorKind::invalid_input, "measure must be nonempty");
  region.validate(1e-9);
  for (const auto& src : measure.sources())
    require(region.contains(src.location), ErrorKind::invalid_input, "source lies outside the cluster region");
  const int s = multipole_order(region.D, sigma, measure.total_variation());
  const Eigen::VectorXd grid = uniform_grid(n);
  const Eigen::VectorXcd y = fourier_data(measure, grid, region.omega);

  // Sources without an assignment go to the nearest center.
  std::vector<std::vector<PointSource>> groups(region.centers.size());
  for (const auto& src : measure.sources()) {
    std::size_t j = 0;
    if (src.cluster >= 0 && static_cast<std::size_t>(src.cluster) < groups.size()) {
      j = static_cast<std::size_t>(src.cluster);
    } else {
      for (std::size_t c = 1; c < region.centers.size(); ++c)
        if (std::abs(src.location - region.centers[c]) < std::abs(src.location - region.centers[j])) j = c;
    }
    groups[j].push_back(src);
  }

  Eigen::VectorXcd model = Eigen::VectorXcd::Zero(n);
  for (std::size_t j = 0; j < groups.size(); ++j) {
    if (groups[j].empty()) continue;
    const MultipoleBasis basis = build_basis(region.centers[j], s, grid, region.omega, false);
    model += basis.columns * exact_coefficients(SourceMeasure(groups[j]), region.centers[j], s, region.omega);
  }
  return {(y - model).norm() / std::sqrt(static_cast<double>(n)), sigma, true};
}

namespace {

std::vector<double> random_coefficients(Rng& rng, int degree) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(degree + 1));
  for (auto& v : c) v = normal(rng);
  if (c.back() == 0.0) c.back() = 1.0;
  return c;
}

Eigen::VectorXcd random_complex(Rng& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(normal(rng), normal(rng));
  return v;
}

void record(SweepReport& rep, const BoundCheck& c, double tol, std::map<std::string, double> params) {
  ++rep.draws;
  if (!c.precondition_met) {
    ++rep.precondition_skips;
    return;
  }
  if (!c.holds(tol)) ++rep.violations;
  rep.max_excess = std::max(rep.max_excess, c.measured - c.bound);
  if (c.bound > 0.0) {
    const double ratio = c.measured / c.bound;
    if (ratio >= rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.worst_case = std::move(params);
    }
  }
}

}  // namespace

SweepReport sweep_markov(int draws, std::uint64_t seed, double tol) {
  SweepReport rep;
  rep.name = "markov";
  for (int i = 0; i < draws; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const int n = uniform_int(rng, 1, 12);
    const int k = uniform_int(rng, 1, n);
    const RealPolynomial p(random_coefficients(rng, n));
    record(rep, markov_ratio(p, k), tol, {{"draw", i}, {"degree", n}, {"k", k}});
  }
  return rep;
}

SweepReport sweep_linf_l1(int draws, std::uint64_t seed, double tol) {
  SweepReport rep;
  rep.name = "linf_l1";
  for (int i = 0; i < draws; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const int n = uniform_int(rng, 0, 12);
    const RealPolynomial p(random_coefficients(rng, n));
    record(rep, linf_l1_ratio(p), tol, {{"draw", i}, {"degree", p.degree()}});
  }
  return rep;
}

SweepReport sweep_oscillatory(int draws, bool second_branch, std::uint64_t seed, double tol) {
  SweepReport rep;
  rep.name = second_branch ? "oscillatory_second_branch" : "oscillatory_first_branch";
  const RealPolynomial bump({1.0, 0.0, -2.0, 0.0, 1.0});  // (1 - x^2)^2
  for (int i = 0; i < draws; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    RealPolynomial psi;
    if (second_branch) {
      psi = bump * RealPolynomial(random_coefficients(rng, uniform_int(rng, 0, 6)));
    } else {
      psi = RealPolynomial(random_coefficients(rng, uniform_int(rng, 0, 8)));
    }
    const double n = static_cast<double>(psi.degree());
    const double lam_min = std::max(2.0 * n * n, 0.5);
    const double lam = lam_min * std::exp(uniform(rng, 0.0, std::log(20.0)));
    record(rep, oscillatory_bound(psi, lam, second_branch), tol, {{"draw", i}, {"degree", n}, {"lambda", lam}});
  }
  return rep;
}

SweepReport sweep_correlation(int draws, bool modulated, std::uint64_t seed, double tol, int grid_points) {
  SweepReport rep;
  rep.name = modulated ? "correlation_modulated" : "correlation_plain";
  const Eigen::VectorXd grid = dense_grid(grid_points);
  for (int i = 0; i < draws; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const int s = uniform_int(rng, 1, 6);
    const double threshold =
        modulated ? 2.0 * std::pow(2.0 * s + 2.0, 2) : std::max(2.0 * std::pow(2.0 * s - 2.0, 2), std::numbers::pi);
    const double t = threshold * (1.0 + uniform(rng, 0.0, 3.0));
    const double o_j = uniform(rng, -50.0, 50.0);
    const double o_p = o_j + (uniform(rng, 0.0, 1.0) < 0.5 ? -t : t);
    const MultipoleBasis bj = build_basis(o_j, s, grid, 1.0, modulated);
    const MultipoleBasis bp = build_basis(o_p, s, grid, 1.0, modulated);
    record(rep, correlation_ratio(bj, bp, random_complex(rng, s), random_complex(rng, s)), tol,
           {{"draw", i}, {"s", s}, {"omega_delta_o", t}});
  }
  return rep;
}

SweepReport sweep_residual(int draws, std::uint64_t seed, double sigma, int n) {
  SweepReport rep;
  rep.name = "residual";
  for (int i = 0; i < draws; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    InstanceSpec spec;
    spec.k_min = 1;
    spec.k_max = 5;
    spec.D = uniform(rng, 0.3, 2.0 * std::numbers::pi);
    spec.L = 2.0 * spec.D + uniform(rng, 1.0, 40.0);
    spec.sources_min = 1;
    spec.sources_max = 4;
    spec.min_intra_separation = 0.0;
    const Instance inst = random_instance(spec, rng());
    record(rep, residual_bound_check(inst.measure, inst.region, sigma, n), 0.0,
           {{"draw", i}, {"D", spec.D}, {"K", inst.region.K()}, {"L", spec.L}});
  }
  return rep;
}

}  // namespace dmusic
