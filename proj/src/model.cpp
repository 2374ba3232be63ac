#include "dmusic/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dmusic/error.hpp"
#include "dmusic/rng.hpp"

namespace dmusic {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::invalid_state: return "invalid state";
    case ErrorKind::insufficient_samples: return "insufficient samples";
    case ErrorKind::degenerate_noise_space: return "degenerate noise space";
    case ErrorKind::order_overflow: return "order overflow";
    case ErrorKind::generation: return "generation error";
    case ErrorKind::empty_structure: return "empty structure";
    case ErrorKind::search_exhausted: return "search exhausted";
    case ErrorKind::precondition: return "precondition violated";
  }
  return "error";
}

SourceMeasure::SourceMeasure(std::vector<PointSource> sources) : sources_(std::move(sources)) {
  require(!sources_.empty(), ErrorKind::invalid_input, "source measure must be nonempty");
  for (const auto& s : sources_) {
    require(std::isfinite(s.location), ErrorKind::invalid_input, "source location must be finite");
    require(std::abs(s.amplitude) > 0.0, ErrorKind::invalid_input, "source amplitude must be nonzero");
  }
}

double SourceMeasure::total_variation() const {
  double m = 0.0;
  for (const auto& s : sources_) m += std::abs(s.amplitude);
  return m;
}

double SourceMeasure::min_amplitude() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : sources_) m = std::min(m, std::abs(s.amplitude));
  return m;
}

std::vector<double> SourceMeasure::locations() const {
  std::vector<double> out;
  out.reserve(sources_.size());
  for (const auto& s : sources_) out.push_back(s.location);
  std::sort(out.begin(), out.end());
  return out;
}

bool SourceMeasure::has_cluster_assignment() const {
  return !sources_.empty() &&
         std::all_of(sources_.begin(), sources_.end(), [](const PointSource& s) { return s.cluster >= 0; });
}

int SourceMeasure::cluster_count() const {
  int k = 0;
  for (const auto& s : sources_) k = std::max(k, s.cluster + 1);
  return k;
}

SourceMeasure SourceMeasure::cluster(int j) const {
  SourceMeasure out;
  for (const auto& s : sources_)
    if (s.cluster == j) out.sources_.push_back(s);
  return out;
}

SourceMeasure SourceMeasure::shifted(double delta) const {
  SourceMeasure out = *this;
  for (auto& s : out.sources_) s.location += delta;
  return out;
}

SourceMeasure operator+(const SourceMeasure& a, const SourceMeasure& b) {
  SourceMeasure out = a;
  out.sources_.insert(out.sources_.end(), b.sources_.begin(), b.sources_.end());
  return out;
}

bool ClusterRegion::contains(double y) const {
  for (std::size_t j = 0; j < centers.size(); ++j)
    if (std::abs(y - centers[j]) <= half_widths[j] * (1.0 + 1e-12)) return true;
  return false;
}

void ClusterRegion::validate(double tol) const {
  require(!centers.empty(), ErrorKind::invalid_input, "cluster region needs at least one center");
  require(centers.size() == half_widths.size(), ErrorKind::invalid_input,
          "centers and half_widths differ in length");
  require(omega > 0.0, ErrorKind::invalid_input, "omega must be positive");
  for (double w : half_widths)
    require(w >= 0.0 && w * omega <= D * (1.0 + tol) + tol, ErrorKind::invalid_input,
            "cluster half-width exceeds D/Omega");
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      require(std::abs(centers[i] - centers[j]) * omega >= L * (1.0 - tol) - tol, ErrorKind::invalid_input,
              "cluster centers closer than L/Omega");
}

double SampledMeasurement::spacing() const {
  require(grid.size() >= 2, ErrorKind::invalid_input, "measurement grid needs at least two points");
  return (grid(grid.size() - 1) - grid(0)) / static_cast<double>(grid.size() - 1);
}

void SampledMeasurement::validate() const {
  require(grid.size() == values.size(), ErrorKind::invalid_input, "grid and values differ in length");
  require(grid.size() >= 2, ErrorKind::invalid_input, "measurement needs at least two samples");
  const double h = spacing();
  require(h > 0.0, ErrorKind::invalid_input, "grid must be strictly increasing");
  for (Eigen::Index l = 1; l < grid.size(); ++l)
    require(std::abs(grid(l) - grid(l - 1) - h) <= 1e-9 * std::max(1.0, h) + 1e-6 * h, ErrorKind::invalid_input,
            "grid must be evenly spaced");
  require(grid(0) >= -1.0 - h * (1.0 + 1e-9) && grid(grid.size() - 1) <= 1.0 + h * (1.0 + 1e-9),
          ErrorKind::invalid_input, "grid must lie in [-1, 1]");
}

Eigen::VectorXd uniform_grid(int n) {
  require(n >= 2, ErrorKind::invalid_input, "grid needs N >= 2");
  Eigen::VectorXd x(n);
  for (int l = 0; l < n; ++l) x(l) = -1.0 + 2.0 * static_cast<double>(l) / static_cast<double>(n - 1);
  x(n - 1) = 1.0;
  return x;
}

Eigen::VectorXcd fourier_data(const SourceMeasure& measure, const Eigen::VectorXd& grid, double omega) {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(grid.size());
  for (const auto& s : measure.sources()) {
    const double k = omega * s.location;
    for (Eigen::Index l = 0; l < grid.size(); ++l) y(l) += s.amplitude * std::polar(1.0, k * grid(l));
  }
  return y;
}

SampledMeasurement synthesize(const SourceMeasure& measure, int n, double omega, double sigma,
                              std::optional<std::uint64_t> seed) {
  require(!measure.empty(), ErrorKind::invalid_input, "cannot synthesize an empty measure");
  require(n >= 2, ErrorKind::invalid_input, "synthesize needs N >= 2");
  require(sigma >= 0.0 && std::isfinite(sigma), ErrorKind::invalid_input, "sigma must be >= 0");
  require(omega > 0.0, ErrorKind::invalid_input, "omega must be positive");

  SampledMeasurement out;
  out.grid = uniform_grid(n);
  out.values = fourier_data(measure, out.grid, omega);
  out.omega = omega;
  out.sigma = sigma;

  if (seed && sigma > 0.0) {
    Rng rng(*seed);
    std::normal_distribution<double> normal(0.0, sigma / std::sqrt(2.0));
    Eigen::VectorXcd w(n);
    for (int l = 0; l < n; ++l) {
      const double re = normal(rng);
      const double im = normal(rng);
      w(l) = cplx(re, im);
    }
    const double rms = w.norm() / std::sqrt(static_cast<double>(n));
    if (rms > sigma) w *= sigma / rms * (1.0 - 1e-9);
    out.values += w;
  }
  return out;
}

SampledMeasurement modulate(const SampledMeasurement& meas) {
  require(!meas.modulated, ErrorKind::invalid_state, "measurement is already modulated");
  SampledMeasurement out = meas;
  for (Eigen::Index l = 0; l < out.values.size(); ++l) out.values(l) *= modulation_window(out.grid(l));
  out.modulated = true;
  return out;
}

namespace {

// Positions of n points in [lo, hi] with consecutive gaps in [gap_min, gap_max].
std::vector<double> place_sources(Rng& rng, int n, double lo, double hi, double gap_min, double gap_max) {
  const double width = hi - lo;
  if (n == 1) return {uniform(rng, lo, hi)};
  if (static_cast<double>(n - 1) * gap_min > width)
    fail(ErrorKind::generation, "too many sources (" + std::to_string(n) + ") for the cluster interval at the " +
                                    "requested separation");
  std::vector<double> y(static_cast<std::size_t>(n));
  if (gap_max < width) {
    // Draw the gaps, then place the whole group uniformly inside the interval.
    double span = 0.0;
    std::vector<double> gaps(static_cast<std::size_t>(n - 1));
    for (auto& g : gaps) {
      g = uniform(rng, gap_min, gap_max);
      span += g;
    }
    if (span > width) {
      // Squeeze only the part of each gap above gap_min.
      const double floor_total = static_cast<double>(n - 1) * gap_min;
      const double factor = (width - floor_total) / (span - floor_total);
      for (auto& g : gaps) g = gap_min + (g - gap_min) * factor;
      span = width;
    }
    y[0] = uniform(rng, lo, hi - span);
    for (int q = 1; q < n; ++q) y[static_cast<std::size_t>(q)] = y[static_cast<std::size_t>(q - 1)] + gaps[static_cast<std::size_t>(q - 1)];
    return y;
  }
  // Uniform on {sorted points with gaps >= gap_min}: shrink, sort, re-expand.
  const double free = width - static_cast<double>(n - 1) * gap_min;
  for (auto& v : y) v = uniform(rng, 0.0, free);
  std::sort(y.begin(), y.end());
  for (int q = 0; q < n; ++q) y[static_cast<std::size_t>(q)] += lo + static_cast<double>(q) * gap_min;
  return y;
}

}  // namespace

Instance random_instance(const InstanceSpec& spec, std::uint64_t seed) {
  require(spec.omega > 0.0, ErrorKind::invalid_input, "omega must be positive");
  require(spec.k_min >= 1 && spec.k_max >= spec.k_min, ErrorKind::invalid_input, "invalid K range");
  require(spec.sources_min >= 1 && spec.sources_max >= spec.sources_min, ErrorKind::invalid_input,
          "invalid sources-per-cluster range");
  require(spec.D > 0.0, ErrorKind::invalid_input, "D must be positive");
  require(spec.L > 2.0 * spec.D, ErrorKind::invalid_input, "need L/Omega > 2 D/Omega");
  require(spec.amplitude_min > 0.0 && spec.amplitude_max >= spec.amplitude_min, ErrorKind::invalid_input,
          "invalid amplitude range");
  require(spec.center_slack >= 0.0, ErrorKind::invalid_input, "center slack must be >= 0");

  Rng rng(seed);
  const int k = uniform_int(rng, spec.k_min, spec.k_max);
  const double sep = spec.L / spec.omega;
  const double half = spec.D / spec.omega;

  std::vector<double> centers(static_cast<std::size_t>(k), 0.0);
  for (int j = 1; j < k; ++j)
    centers[static_cast<std::size_t>(j)] =
        centers[static_cast<std::size_t>(j - 1)] + sep * (1.0 + uniform(rng, 0.0, spec.center_slack));
  const double mid = 0.5 * (centers.front() + centers.back()) - uniform(rng, -1.0, 1.0) / spec.omega;
  for (auto& c : centers) c -= mid;

  const double gap_max = spec.max_intra_separation.value_or(std::numeric_limits<double>::infinity());
  require(gap_max >= spec.min_intra_separation, ErrorKind::invalid_input,
          "max intra separation below min intra separation");

  std::vector<PointSource> sources;
  for (int j = 0; j < k; ++j) {
    const int n = uniform_int(rng, spec.sources_min, spec.sources_max);
    const double c = centers[static_cast<std::size_t>(j)];
    for (double y : place_sources(rng, n, c - half, c + half, spec.min_intra_separation, gap_max)) {
      const double modulus = uniform(rng, spec.amplitude_min, spec.amplitude_max);
      const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      sources.push_back({y, std::polar(modulus, phase), j});
    }
  }

  Instance out{SourceMeasure(std::move(sources)), {}};
  out.region.centers = std::move(centers);
  out.region.half_widths.assign(static_cast<std::size_t>(k), half);
  out.region.L = spec.L;
  out.region.D = spec.D;
  out.region.omega = spec.omega;
  return out;
}

}  // namespace dmusic
