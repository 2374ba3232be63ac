#include "dmusic/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dmusic/error.hpp"

namespace dmusic {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// JSON has no infinity or NaN; such values are written as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json num_list(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

const json& field(const json& j, const std::string& name, const std::string& where) {
  require(j.is_object(), ErrorKind::invalid_input, where + ": expected a JSON object");
  auto it = j.find(name);
  require(it != j.end(), ErrorKind::invalid_input, where + name + ": missing field");
  return *it;
}

double as_double(const json& v, const std::string& name) {
  require(v.is_number(), ErrorKind::invalid_input, name + ": expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& name) {
  require(v.is_number_integer(), ErrorKind::invalid_input, name + ": expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& name) {
  require(v.is_boolean(), ErrorKind::invalid_input, name + ": expected true or false");
  return v.get<bool>();
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void apply_music_options(const json& j, MusicOptions& o, const std::string& prefix) {
  require(j.is_object(), ErrorKind::invalid_input, prefix + ": expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    const std::string name = prefix + "." + key;
    if (key == "order_override") {
      o.order_override = v.is_null() ? std::nullopt : std::optional<int>(as_int(v, name));
    } else if (key == "c_order") {
      o.c_order = as_double(v, name);
    } else if (key == "n_max") {
      o.n_max = as_int(v, name);
    } else if (key == "pcr") {
      o.pcr = v.is_null() ? std::nullopt : std::optional<int>(as_int(v, name));
    } else if (key == "dcr") {
      o.dcr = v.is_null() ? std::nullopt : std::optional<int>(as_int(v, name));
    } else if (key == "dct") {
      o.dct = v.is_null() ? std::nullopt : std::optional<double>(as_double(v, name));
    } else if (key == "limit_peaks_to_order") {
      o.limit_peaks_to_order = as_bool(v, name);
    } else if (key == "min_subgrid_samples") {
      o.min_subgrid_samples = v.is_null() ? std::nullopt : std::optional<int>(as_int(v, name));
    } else if (key == "subspace") {
      require(v.is_string(), ErrorKind::invalid_input, name + ": expected \"full_svd\" or \"truncated\"");
      const auto s = v.get<std::string>();
      if (s == "full_svd") {
        o.subspace = SubspaceMethod::full_svd;
      } else if (s == "truncated") {
        o.subspace = SubspaceMethod::truncated;
      } else {
        fail(ErrorKind::invalid_input, name + ": expected \"full_svd\" or \"truncated\"");
      }
    } else if (key == "oversampling") {
      o.oversampling = as_int(v, name);
    } else if (key == "power_iterations") {
      o.power_iterations = as_int(v, name);
    } else {
      fail(ErrorKind::invalid_input, name + ": unknown field");
    }
  }
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json instance_to_json(const Instance& inst, double sigma) {
  json clusters = json::array();
  const int k = inst.region.K();
  for (int c = 0; c < k; ++c) {
    json sources = json::array();
    for (const auto& s : inst.measure.sources())
      if (s.cluster == c) sources.push_back({{"y", s.location}, {"re", s.amplitude.real()}, {"im", s.amplitude.imag()}});
    clusters.push_back({{"center", inst.region.centers[static_cast<std::size_t>(c)]},
                        {"half_width", inst.region.half_widths[static_cast<std::size_t>(c)]},
                        {"sources", std::move(sources)}});
  }
  return {{"omega", inst.region.omega}, {"sigma", sigma}, {"clusters", std::move(clusters)}};
}

LoadedInstance instance_from_json(const json& j) {
  LoadedInstance out;
  const double omega = as_double(field(j, "omega", ""), "omega");
  require(omega > 0.0, ErrorKind::invalid_input, "omega: must be positive");
  out.sigma = j.contains("sigma") ? as_double(j["sigma"], "sigma") : 0.0;
  require(out.sigma >= 0.0, ErrorKind::invalid_input, "sigma: must be >= 0");
  const json& clusters = field(j, "clusters", "");
  require(clusters.is_array() && !clusters.empty(), ErrorKind::invalid_input, "clusters: expected a nonempty array");

  std::vector<PointSource> sources;
  ClusterRegion region;
  region.omega = omega;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const std::string where = "clusters[" + std::to_string(c) + "].";
    const double center = as_double(field(clusters[c], "center", where), where + "center");
    const double half = as_double(field(clusters[c], "half_width", where), where + "half_width");
    require(half >= 0.0, ErrorKind::invalid_input, where + "half_width: must be >= 0");
    region.centers.push_back(center);
    region.half_widths.push_back(half);
    const json& src = field(clusters[c], "sources", where);
    require(src.is_array(), ErrorKind::invalid_input, where + "sources: expected an array");
    for (std::size_t q = 0; q < src.size(); ++q) {
      const std::string sw = where + "sources[" + std::to_string(q) + "].";
      const double y = as_double(field(src[q], "y", sw), sw + "y");
      const double re = as_double(field(src[q], "re", sw), sw + "re");
      const double im = as_double(field(src[q], "im", sw), sw + "im");
      sources.push_back({y, cplx(re, im), static_cast<int>(c)});
    }
  }
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < region.centers.size(); ++a)
    for (std::size_t b = a + 1; b < region.centers.size(); ++b)
      sep = std::min(sep, std::abs(region.centers[a] - region.centers[b]));
  region.L = std::isfinite(sep) ? sep * omega : 0.0;
  region.D = *std::max_element(region.half_widths.begin(), region.half_widths.end()) * omega;
  require(!sources.empty(), ErrorKind::invalid_input, "clusters: no sources given");
  out.instance = Instance{SourceMeasure(std::move(sources)), std::move(region)};
  return out;
}

void write_measurement_csv(const fs::path& path, const SampledMeasurement& meas) {
  std::ofstream f(path);
  require(f.good(), ErrorKind::invalid_input, "cannot open " + path.string() + " for writing");
  f << "x,re,im\n";
  for (int l = 0; l < meas.size(); ++l)
    f << format_double(meas.grid(l)) << ',' << format_double(meas.values(l).real()) << ','
      << format_double(meas.values(l).imag()) << '\n';
  require(f.good(), ErrorKind::invalid_input, "failed writing " + path.string());
}

SampledMeasurement read_measurement_csv(const fs::path& path, double omega, double sigma) {
  std::ifstream f(path);
  require(f.good(), ErrorKind::invalid_input, "cannot open " + path.string());
  std::string line;
  std::getline(f, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "x,re,im", ErrorKind::invalid_input, path.string() + ": expected header x,re,im");
  std::vector<double> x, re, im;
  int row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string a, b, c;
    require(std::getline(ss, a, ',') && std::getline(ss, b, ',') && std::getline(ss, c), ErrorKind::invalid_input,
            path.string() + ": row " + std::to_string(row) + " needs three columns");
    try {
      x.push_back(std::stod(a));
      re.push_back(std::stod(b));
      im.push_back(std::stod(c));
    } catch (const std::exception&) {
      fail(ErrorKind::invalid_input, path.string() + ": row " + std::to_string(row) + " is not numeric");
    }
  }
  SampledMeasurement m;
  m.grid = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  m.values.resize(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) m.values(static_cast<Eigen::Index>(i)) = cplx(re[i], im[i]);
  m.omega = omega;
  m.sigma = sigma;
  m.validate();
  return m;
}

json to_json(const MusicOptions& o) {
  return {{"order_override", opt(o.order_override)},
          {"c_order", o.c_order},
          {"n_max", o.n_max},
          {"pcr", opt(o.pcr)},
          {"dcr", opt(o.dcr)},
          {"dct", opt(o.dct)},
          {"limit_peaks_to_order", o.limit_peaks_to_order},
          {"min_subgrid_samples", opt(o.min_subgrid_samples)},
          {"subspace", o.subspace == SubspaceMethod::truncated ? "truncated" : "full_svd"},
          {"oversampling", o.oversampling},
          {"power_iterations", o.power_iterations}};
}

json to_json(const PipelineConfig& c) {
  return {{"lambda", c.lambda},
          {"o_init", c.o_init},
          {"d_init", c.d_init},
          {"tps_cluster", c.tps_cluster},
          {"tps_source", c.tps_source},
          {"ict", opt(c.ict)},
          {"d_prior", c.d_prior},
          {"floor_local_window", c.floor_local_window},
          {"c_mea", c.c_mea},
          {"c_msf", c.c_msf},
          {"sigma", c.sigma},
          {"order_override", opt(c.order_override)},
          {"lambda_ladder", c.lambda_ladder},
          {"redistribute_residual", c.redistribute_residual},
          {"modulated", c.modulated},
          {"music", to_json(c.music)},
          {"local_music", to_json(c.local_music)}};
}

PipelineConfig pipeline_config_from_json(const json& j, PipelineConfig c) {
  require(j.is_object(), ErrorKind::invalid_input, "config: expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "lambda") {
      c.lambda = as_double(v, key);
    } else if (key == "o_init") {
      c.o_init = as_double(v, key);
    } else if (key == "d_init") {
      c.d_init = as_double(v, key);
    } else if (key == "tps_cluster") {
      c.tps_cluster = as_double(v, key);
    } else if (key == "tps_source") {
      c.tps_source = as_double(v, key);
    } else if (key == "ict") {
      c.ict = v.is_null() ? std::nullopt : std::optional<double>(as_double(v, key));
    } else if (key == "d_prior") {
      c.d_prior = as_double(v, key);
    } else if (key == "floor_local_window") {
      c.floor_local_window = as_bool(v, key);
    } else if (key == "c_mea") {
      c.c_mea = as_double(v, key);
    } else if (key == "c_msf") {
      c.c_msf = as_double(v, key);
    } else if (key == "sigma") {
      c.sigma = as_double(v, key);
    } else if (key == "order_override") {
      c.order_override = v.is_null() ? std::nullopt : std::optional<int>(as_int(v, key));
    } else if (key == "lambda_ladder") {
      require(v.is_array(), ErrorKind::invalid_input, "lambda_ladder: expected an array of numbers");
      c.lambda_ladder.clear();
      for (std::size_t i = 0; i < v.size(); ++i)
        c.lambda_ladder.push_back(as_double(v[i], "lambda_ladder[" + std::to_string(i) + "]"));
    } else if (key == "redistribute_residual") {
      c.redistribute_residual = as_bool(v, key);
    } else if (key == "modulated") {
      c.modulated = as_bool(v, key);
    } else if (key == "music") {
      apply_music_options(v, c.music, key);
    } else if (key == "local_music") {
      apply_music_options(v, c.local_music, key);
    } else {
      fail(ErrorKind::invalid_input, key + ": unknown field");
    }
  }
  return c;
}

json to_json(const ClusterEstimate& e) {
  return {{"raw_centers", num_list(e.raw_centers)},
          {"merged_centers", num_list(e.merged_centers)},
          {"merged_half_widths", num_list(e.merged_half_widths)},
          {"interval_radius", num(e.interval_radius)},
          {"shrinkage", num(e.shrinkage)},
          {"ict", num(e.ict)}};
}

json to_json(const PipelineReport& r) {
  json stages = json::object();
  for (const auto& [k, v] : r.stage_seconds) stages[k] = num(v);
  return {{"locations", num_list(r.locations)},
          {"decouple_success", r.decouple_success},
          {"fallback_used", r.fallback_used},
          {"cluster_estimate", r.cluster_estimate ? to_json(*r.cluster_estimate) : json(nullptr)},
          {"residual_norm", r.residual_norm ? num(*r.residual_norm) : json(nullptr)},
          {"multipole_order", opt(r.multipole_order)},
          {"stage_seconds", std::move(stages)},
          {"warnings", r.warnings}};
}

json to_json(const MusicResult& r, bool include_image) {
  json out = {{"locations", num_list(r.locations)},
              {"estimated_order", r.estimated_order},
              {"hankel_dim", r.hankel_dim},
              {"samples_used", r.samples_used}};
  if (include_image) out["image"] = {{"test_points", num_list(r.image.test_points)}, {"values", num_list(r.image.values)}};
  return out;
}

json to_json(const DecoupleResult& r) {
  json coeffs = json::array();
  for (const auto& q : r.coefficients) {
    json row = json::array();
    for (Eigen::Index i = 0; i < q.size(); ++i) row.push_back({num(q(i).real()), num(q(i).imag())});
    coeffs.push_back(std::move(row));
  }
  return {{"order_count", r.order_count},
          {"centers", num_list(r.centers)},
          {"residual_norm", num(r.residual_norm)},
          {"success", r.success},
          {"rank", r.rank},
          {"condition_estimate", num(r.condition_estimate)},
          {"conditioning_warning", r.conditioning_warning},
          {"coefficients", std::move(coeffs)},
          {"warnings", r.warnings}};
}

json to_json(const SweepReport& r) {
  json worst = json::object();
  for (const auto& [k, v] : r.worst_case) worst[k] = num(v);
  return {{"name", r.name},
          {"draws", r.draws},
          {"violations", r.violations},
          {"precondition_skips", r.precondition_skips},
          {"max_ratio", num(r.max_ratio)},
          {"max_excess", num(r.max_excess)},
          {"passed", r.passed()},
          {"worst_case", std::move(worst)}};
}

json to_json(const TrialRecord& r) {
  json stages = json::object();
  for (const auto& [k, v] : r.stage_seconds) stages[k] = num(v);
  return {{"seed", r.seed},
          {"K", r.K},
          {"L", num(r.L)},
          {"D", num(r.D)},
          {"source_count", r.source_count},
          {"multipole_order", r.multipole_order},
          {"decouple_residual", num(r.decouple_residual)},
          {"local_errors", num_list(r.local_errors)},
          {"location_deviation_max", num(r.location_deviation_max)},
          {"music_location_deviation_max", num(r.music_location_deviation_max)},
          {"min_true_separation", num(r.min_true_separation)},
          {"wall_time_dmusic", num(r.wall_time_dmusic)},
          {"wall_time_music", num(r.wall_time_music)},
          {"decouple_success", r.decouple_success},
          {"success", r.success},
          {"music_success", r.music_success},
          {"fallback_used", r.fallback_used},
          {"stage_seconds", std::move(stages)},
          {"truth", num_list(r.truth)},
          {"dmusic_locations", num_list(r.dmusic_locations)},
          {"music_locations", num_list(r.music_locations)}};
}

json to_json(const CompareSummary& s) {
  return {{"trials", s.trials},
          {"dmusic_successes", s.dmusic_successes},
          {"music_successes", s.music_successes},
          {"joint_successes", s.joint_successes},
          {"fallbacks", s.fallbacks},
          {"median_time_dmusic", num(s.median_time_dmusic)},
          {"median_time_music", num(s.median_time_music)},
          {"median_speedup", num(s.median_speedup)},
          {"max_deviation_dmusic", num(s.max_deviation_dmusic)},
          {"max_deviation_music", num(s.max_deviation_music)}};
}

json to_json(const SeparationSearch& s) {
  return {{"s", s.s},
          {"L_star", num(s.L_star)},
          {"L_star_over_pi", num(s.L_star / std::numbers::pi)},
          {"L_tested", num_list(s.L_tested)},
          {"ratios", num_list(s.ratios)}};
}

void write_trials_csv(const fs::path& path, const std::vector<TrialRecord>& records) {
  std::ofstream f(path);
  require(f.good(), ErrorKind::invalid_input, "cannot open " + path.string() + " for writing");
  f << "seed,K,L,D,source_count,multipole_order,decouple_residual,max_local_error,location_deviation_max,"
       "music_location_deviation_max,min_true_separation,wall_time_dmusic,wall_time_music,decouple_success,success,"
       "music_success,fallback_used\n";
  for (const auto& r : records) {
    const double max_local =
        r.local_errors.empty() ? kNaN : *std::max_element(r.local_errors.begin(), r.local_errors.end());
    f << r.seed << ',' << r.K << ',' << format_double(r.L) << ',' << format_double(r.D) << ',' << r.source_count << ','
      << r.multipole_order << ',' << format_double(r.decouple_residual) << ',' << format_double(max_local) << ','
      << format_double(r.location_deviation_max) << ',' << format_double(r.music_location_deviation_max) << ','
      << format_double(r.min_true_separation) << ',' << format_double(r.wall_time_dmusic) << ','
      << format_double(r.wall_time_music) << ',' << r.decouple_success << ',' << r.success << ',' << r.music_success
      << ',' << r.fallback_used << '\n';
  }
}

json to_json(const RunManifest& m) {
  return {{"command", m.command}, {"config", m.config},   {"inputs", m.inputs},       {"outputs", m.outputs},
          {"seed", m.seed},       {"version", m.version}, {"timestamp", m.timestamp}};
}

fs::path write_manifest(RunManifest m) {
  require(!m.outputs.empty(), ErrorKind::invalid_input, "manifest needs at least one output");
  if (m.timestamp.empty()) m.timestamp = utc_now();
  const fs::path path = fs::path(m.outputs.front() + ".manifest.json");
  write_json_file(path, to_json(m));
  return path;
}

json read_json_file(const fs::path& path) {
  std::ifstream f(path);
  require(f.good(), ErrorKind::invalid_input, "cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::invalid_input, path.string() + ": malformed JSON (" + e.what() + ")");
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream f(path);
  require(f.good(), ErrorKind::invalid_input, "cannot open " + path.string() + " for writing");
  f << j.dump(2) << '\n';
  require(f.good(), ErrorKind::invalid_input, "failed writing " + path.string());
}

}  // namespace dmusic
