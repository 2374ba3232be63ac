#include "dmusic/hankel_music.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "dmusic/error.hpp"
#include "dmusic/rng.hpp"

namespace dmusic {

Eigen::MatrixXcd build_hankel(const Eigen::VectorXcd& values) {
  const auto n = values.size();
  require(n >= 3, ErrorKind::invalid_input, "Hankel matrix needs at least 3 samples, got " + std::to_string(n));
  const Eigen::Index dim = (n - 1) / 2 + 1;
  Eigen::MatrixXcd h(dim, dim);
  for (Eigen::Index q = 0; q < dim; ++q) h.col(q) = values.segment(q, dim);
  return h;
}

int estimate_order(std::span<const double> singular_values, double sigma, int n_hat,
                   std::optional<int> override_order, double c_order) {
  if (override_order) {
    require(*override_order >= 0, ErrorKind::invalid_input, "order override must be >= 0");
    return *override_order;
  }
  const double tau = c_order * sigma * std::sqrt(static_cast<double>(n_hat + 1));
  int n = 0;
  for (double s : singular_values)
    if (s > tau) ++n;
  return std::min(n, n_hat);
}

namespace {

void split_full_svd(const Eigen::MatrixXcd& hankel, double sigma, const MusicOptions& opts, HankelDecomposition& out) {
  const int dim = static_cast<int>(hankel.rows());
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(hankel, Eigen::ComputeFullU);
  out.singular_values = svd.singularValues();
  out.truncated = false;
  const std::span<const double> sv(out.singular_values.data(), static_cast<std::size_t>(dim));
  out.estimated_order = estimate_order(sv, sigma, dim - 1, opts.order_override, opts.c_order);
  require(out.estimated_order < dim, ErrorKind::degenerate_noise_space,
          "order " + std::to_string(out.estimated_order) + " leaves no noise subspace in a " + std::to_string(dim) +
              "-dimensional Hankel matrix");
  const auto& u = svd.matrixU();
  out.signal_subspace = u.leftCols(out.estimated_order);
  out.noise_subspace = u.rightCols(dim - out.estimated_order);
}

Eigen::MatrixXcd orthonormal_columns(const Eigen::MatrixXcd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(a.rows(), a.cols());
}

// Randomized range finder with power iterations. Returns false when the rank
// budget is too small to bracket the order, in which case the caller uses the
// full SVD.
bool split_truncated(const Eigen::MatrixXcd& hankel, double sigma, const MusicOptions& opts, HankelDecomposition& out) {
  const int dim = static_cast<int>(hankel.rows());
  const int rank = std::min(dim, 2 * opts.n_max + opts.oversampling);
  if (rank >= dim) return false;

  // Fixed seed so the decomposition is a deterministic function of the data.
  Rng rng(derive_seed(0x68616e6b656cULL, static_cast<std::uint64_t>(dim)));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd probe(dim, rank);
  for (Eigen::Index j = 0; j < probe.cols(); ++j)
    for (Eigen::Index i = 0; i < probe.rows(); ++i) probe(i, j) = cplx(normal(rng), normal(rng));

  Eigen::MatrixXcd q = orthonormal_columns(hankel * probe);
  for (int it = 0; it < opts.power_iterations; ++it) {
    q = orthonormal_columns(hankel.adjoint() * q);
    q = orthonormal_columns(hankel * q);
  }
  const Eigen::MatrixXcd b = q.adjoint() * hankel;
  Eigen::BDCSVD<Eigen::MatrixXcd> small(b, Eigen::ComputeThinU);

  out.singular_values = small.singularValues();
  out.truncated = true;
  const std::span<const double> sv(out.singular_values.data(), static_cast<std::size_t>(rank));
  out.estimated_order = estimate_order(sv, sigma, dim - 1, opts.order_override, opts.c_order);
  if (out.estimated_order >= rank) return false;
  out.signal_subspace = q * small.matrixU().leftCols(out.estimated_order);
  out.noise_subspace.resize(dim, 0);
  return true;
}

}  // namespace

HankelDecomposition decompose(const SampledMeasurement& meas, double sigma, const MusicOptions& opts) {
  require(meas.size() >= 3, ErrorKind::invalid_input, "MUSIC needs at least 3 samples");
  const Eigen::MatrixXcd hankel = build_hankel(meas.values);

  HankelDecomposition out;
  out.hankel_dim = static_cast<int>(hankel.rows());
  out.sample_spacing = meas.omega * meas.spacing();
  if (opts.subspace == SubspaceMethod::truncated && split_truncated(hankel, sigma, opts, out)) return out;
  split_full_svd(hankel, sigma, opts, out);
  return out;
}

namespace {

int test_point_count(double ts, double te, double tps) {
  require(te > ts, ErrorKind::invalid_input, "imaging region needs TS < TE");
  require(tps > 0.0, ErrorKind::invalid_input, "TPS must be positive");
  return static_cast<int>(std::floor((te - ts) / tps + 1e-9)) + 1;
}

}  // namespace

ImagingResult imaging(const HankelDecomposition& dec, double ts, double te, double tps) {
  const int count = test_point_count(ts, te, tps);
  const int dim = dec.hankel_dim;
  const double h = dec.sample_spacing;

  ImagingResult out;
  out.test_points.resize(static_cast<std::size_t>(count));
  out.values.assign(static_cast<std::size_t>(count), 1.0);
  for (int m = 0; m < count; ++m) out.test_points[static_cast<std::size_t>(m)] = ts + static_cast<double>(m) * tps;
  if (dec.estimated_order == 0) return out;

  // ||U2^* Phi||^2 = ||Phi||^2 - ||U1^* Phi||^2 since [U1 U2] is unitary; points
  // where the difference cancels badly are recomputed from the explicit
  // projection Phi - U1 U1^* Phi, which needs no U2.
  const double phi_norm2 = static_cast<double>(dim);
  const double direct_threshold = 1e-8 * phi_norm2;
  const Eigen::MatrixXcd u1h = dec.signal_subspace.adjoint();
  constexpr int kBatch = 512;
  Eigen::MatrixXcd phi(dim, kBatch);
  for (int start = 0; start < count; start += kBatch) {
    const int b = std::min(kBatch, count - start);
    for (int c = 0; c < b; ++c) {
      const cplx step = std::polar(1.0, h * out.test_points[static_cast<std::size_t>(start + c)]);
      cplx v{1.0, 0.0};
      for (int k = 0; k < dim; ++k) {
        phi(k, c) = v;
        v *= step;
      }
    }
    const Eigen::MatrixXcd proj = u1h * phi.leftCols(b);
    for (int c = 0; c < b; ++c) {
      double noise2 = phi_norm2 - proj.col(c).squaredNorm();
      if (noise2 < direct_threshold) noise2 = (phi.col(c) - dec.signal_subspace * proj.col(c)).squaredNorm();
      const double noise = std::sqrt(std::max(noise2, 0.0));
      const double phi_norm = std::sqrt(phi_norm2);
      double j = noise < 1e-14 * phi_norm ? kImagingCap : phi_norm / noise;
      out.values[static_cast<std::size_t>(start + c)] = std::clamp(j, 1.0, kImagingCap);
    }
  }
  return out;
}

ImagingResult imaging(const SampledMeasurement& meas, std::optional<int> order, double ts, double te, double tps) {
  MusicOptions opts;
  opts.order_override = order;
  return imaging(decompose(meas, meas.sigma, opts), ts, te, tps);
}

PeakParams default_peak_params(const ImagingResult& img, double tps) {
  PeakParams p;
  p.pcr = std::max(3, static_cast<int>(std::ceil(0.05 / tps - 1e-9)));
  p.dcr = p.pcr;
  const auto& f = img.values;
  if (f.size() < 2) return p;
  std::vector<double> diffs(f.size() - 1);
  for (std::size_t i = 0; i + 1 < f.size(); ++i) diffs[i] = std::abs(f[i + 1] - f[i]);
  auto mid = diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2);
  std::nth_element(diffs.begin(), mid, diffs.end());
  p.dct = 10.0 * *mid / tps;
  return p;
}

std::vector<double> select_peaks(const ImagingResult& img, int pcr, int dcr, double dct) {
  require(pcr >= 1 && dcr >= 1, ErrorKind::invalid_input, "PCR and DCR must be >= 1");
  const auto& f = img.values;
  const int m = static_cast<int>(f.size());
  std::vector<double> peaks;
  if (m < 3) return peaks;

  // Central differences on the test grid, one-sided at the ends.
  const double tps = img.test_points.size() >= 2 ? img.test_points[1] - img.test_points[0] : 1.0;
  std::vector<double> slope(static_cast<std::size_t>(m));
  slope[0] = (f[1] - f[0]) / tps;
  slope[static_cast<std::size_t>(m - 1)] = (f[static_cast<std::size_t>(m - 1)] - f[static_cast<std::size_t>(m - 2)]) / tps;
  for (int j = 1; j + 1 < m; ++j)
    slope[static_cast<std::size_t>(j)] = (f[static_cast<std::size_t>(j + 1)] - f[static_cast<std::size_t>(j - 1)]) / (2.0 * tps);

  for (int j = 1; j + 1 < m; ++j) {
    const double fj = f[static_cast<std::size_t>(j)];
    const int lo = std::max(0, j - pcr);
    const int hi = std::min(m - 1, j + pcr);
    bool is_max = true;
    // Strict on the left so a plateau reports only its first sample.
    for (int i = lo; i < j && is_max; ++i) is_max = f[static_cast<std::size_t>(i)] < fj;
    for (int i = j + 1; i <= hi && is_max; ++i) is_max = f[static_cast<std::size_t>(i)] <= fj;
    if (!is_max) continue;
    double steepest = 0.0;
    for (int i = std::max(0, j - dcr); i <= std::min(m - 1, j + dcr); ++i)
      steepest = std::max(steepest, std::abs(slope[static_cast<std::size_t>(i)]));
    if (steepest >= dct) peaks.push_back(img.test_points[static_cast<std::size_t>(j)]);
  }
  return peaks;
}

namespace {

// Selects peaks on `img` and keeps the `order` largest when requested.
std::vector<double> pick_locations(const ImagingResult& img, double tps, int order, const MusicOptions& opts) {
  const PeakParams defaults = default_peak_params(img, tps);
  const std::vector<double> peaks =
      select_peaks(img, opts.pcr.value_or(defaults.pcr), opts.dcr.value_or(defaults.dcr), opts.dct.value_or(defaults.dct));
  if (!opts.limit_peaks_to_order || static_cast<int>(peaks.size()) <= order) return peaks;

  auto height = [&](double w) {
    const auto idx = static_cast<std::size_t>(std::llround((w - img.test_points.front()) / tps));
    return img.values[std::min(idx, img.values.size() - 1)];
  };
  std::vector<double> ranked = peaks;
  std::stable_sort(ranked.begin(), ranked.end(), [&](double a, double b) { return height(a) > height(b); });
  ranked.resize(static_cast<std::size_t>(std::max(order, 0)));
  std::sort(ranked.begin(), ranked.end());
  return ranked;
}

}  // namespace

MusicResult standard_music(const SampledMeasurement& meas, double ts, double te, double tps, double sigma,
                           const MusicOptions& opts) {
  const HankelDecomposition dec = decompose(meas, sigma, opts);
  MusicResult out;
  out.image = imaging(dec, ts, te, tps);
  out.locations = pick_locations(out.image, tps, dec.estimated_order, opts);
  out.image.peaks = out.locations;
  out.estimated_order = dec.estimated_order;
  out.hankel_dim = dec.hankel_dim;
  out.samples_used = meas.size();
  return out;
}

int prior_subgrid_stride(const SampledMeasurement& meas, double half_width, int n_max, std::optional<int> min_samples) {
  require(half_width > 0.0, ErrorKind::invalid_input, "prior half-width must be positive");
  require(n_max >= 1, ErrorKind::invalid_input, "n_max must be >= 1");
  const int available = meas.size();
  require(available >= 3, ErrorKind::insufficient_samples,
          "prior MUSIC needs at least 3 samples, measurement has " + std::to_string(available));
  const double base = meas.spacing();
  const double target = std::numbers::pi / (2.0 * meas.omega * half_width);
  int stride = std::max(1, static_cast<int>(std::floor(target / base + 1e-9)));
  const int min_count = std::max(3, min_samples.value_or(2 * n_max + 3));
  const int count = (available - 1) / stride + 1;
  if (count < min_count) stride = std::max(1, (available - 1) / (min_count - 1));
  return stride;
}

MusicResult music_with_prior(const SampledMeasurement& meas, double center, double half_width, double tps,
                             double sigma, const MusicOptions& opts) {
  const int stride = prior_subgrid_stride(meas, half_width, opts.n_max, opts.min_subgrid_samples);
  const int available = meas.size();
  const int count = (available - 1) / stride + 1;
  require(count >= 3, ErrorKind::insufficient_samples, "prior subgrid has fewer than 3 samples");
  const int offset = ((available - 1) - (count - 1) * stride) / 2;

  SampledMeasurement centered;
  centered.grid.resize(count);
  centered.values.resize(count);
  centered.omega = meas.omega;
  centered.sigma = sigma;
  centered.modulated = meas.modulated;
  for (int k = 0; k < count; ++k) {
    const int l = offset + k * stride;
    const double x = meas.grid(l);
    centered.grid(k) = x;
    centered.values(k) = meas.values(l) * std::polar(1.0, -meas.omega * center * x);
  }

  MusicResult out = standard_music(centered, -half_width, half_width, tps, sigma, opts);
  for (auto& y : out.locations) y += center;
  for (auto& w : out.image.test_points) w += center;
  out.image.peaks = out.locations;
  return out;
}

}  // namespace dmusic
