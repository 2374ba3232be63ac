#include <cmath>
#include <cstdint>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dmusic/bench.hpp"
#include "dmusic/bounds_oracle.hpp"
#include "dmusic/cluster.hpp"
#include "dmusic/error.hpp"
#include "dmusic/hankel_music.hpp"
#include "dmusic/io.hpp"
#include "dmusic/multipole.hpp"
#include "dmusic/pipeline.hpp"
#include "dmusic/rng.hpp"

namespace {

using namespace dmusic;

constexpr int kExitOk = 0;
constexpr int kExitAlgorithm = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string in;
  std::string out;
  std::string config;
  double omega = 1.0;
  std::optional<double> sigma;
  bool strict = false;
};

// Flags that override pipeline config values.
struct PipelineFlags {
  std::optional<double> lambda, o_init, d_init, tps_cluster, tps_source, ict, d_prior, c_mea, c_msf;
  std::optional<int> order;
  bool plain = false;
};

void add_pipeline_flags(CLI::App* app, PipelineFlags& f) {
  app->add_option("--lambda", f.lambda, "Shrinkage factor for cluster detection");
  app->add_option("--o-init", f.o_init, "Center of the initial search interval");
  app->add_option("--d-init", f.d_init, "Half-width of the initial search interval");
  app->add_option("--tps-cluster", f.tps_cluster, "Test-point spacing for detection");
  app->add_option("--tps-source", f.tps_source, "Test-point spacing for source recovery");
  app->add_option("--ict", f.ict, "Interval combining threshold");
  app->add_option("--d-prior", f.d_prior, "Expected cluster half-width");
  app->add_option("--c-mea", f.c_mea, "Decoupling acceptance constant");
  app->add_option("--c-msf", f.c_msf, "Demodulation support |x| <= C_msf");
  app->add_option("--order", f.order, "Force the multipole order s");
  app->add_flag("--plain", f.plain, "Decouple without modulation");
}

PipelineConfig load_config(const Common& c, const PipelineFlags& f, PipelineConfig cfg = {}) {
  if (!c.config.empty()) cfg = pipeline_config_from_json(read_json_file(c.config), cfg);
  if (c.sigma) cfg.sigma = *c.sigma;
  if (f.lambda) cfg.lambda = *f.lambda;
  if (f.o_init) cfg.o_init = *f.o_init;
  if (f.d_init) cfg.d_init = *f.d_init;
  if (f.tps_cluster) cfg.tps_cluster = *f.tps_cluster;
  if (f.tps_source) cfg.tps_source = *f.tps_source;
  if (f.ict) cfg.ict = *f.ict;
  if (f.d_prior) cfg.d_prior = *f.d_prior;
  if (f.c_mea) cfg.c_mea = *f.c_mea;
  if (f.c_msf) cfg.c_msf = *f.c_msf;
  if (f.order) cfg.order_override = *f.order;
  if (f.plain) cfg.modulated = false;
  cfg.validate();
  return cfg;
}

void emit(const std::string& out, const json& j) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(out, j);
  }
}

void manifest(const std::string& command, const json& config, std::vector<std::string> inputs,
              std::vector<std::string> outputs, std::uint64_t seed = 0) {
  if (outputs.empty()) return;
  RunManifest m;
  m.command = command;
  m.config = config;
  m.inputs = std::move(inputs);
  m.outputs = std::move(outputs);
  m.seed = seed;
  write_manifest(std::move(m));
}

std::vector<std::string> nonempty(std::initializer_list<std::string> items) {
  std::vector<std::string> out;
  for (const auto& s : items)
    if (!s.empty()) out.push_back(s);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustered point-source super-resolution from band-limited Fourier samples"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for bench trials")->check(CLI::PositiveNumber);

  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_input) {
    auto* opt = sub->add_option("--in", common.in, "Measurement CSV (x,re,im)");
    if (needs_input) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "Output file (stdout when omitted)");
    sub->add_option("--omega", common.omega, "Cutoff frequency")->check(CLI::PositiveNumber);
    sub->add_option("--sigma", common.sigma, "Noise level");
    sub->add_flag("--strict", common.strict, "Exit 1 on recoverable algorithm failure");
  };

  // synth
  auto* synth = app.add_subcommand("synth", "Write an instance and its sampled measurement");
  std::string sources_file, instance_out;
  int n = 1000;
  std::uint64_t seed = 1;
  bool modulate_output = false;
  InstanceSpec spec = CompareConfig::default_instance();
  synth->add_option("--sources", sources_file, "Instance JSON; a random instance is drawn when omitted")
      ->check(CLI::ExistingFile);
  synth->add_option("--instance-out", instance_out, "Where to write the (drawn) instance JSON");
  synth->add_option("--n", n, "Number of samples")->check(CLI::Range(2, 1 << 24));
  synth->add_option("--seed", seed, "Noise and instance seed");
  synth->add_option("--k-min", spec.k_min, "Random instance: minimum cluster count");
  synth->add_option("--k-max", spec.k_max, "Random instance: maximum cluster count");
  synth->add_option("--L", spec.L, "Random instance: Omega times the minimum center separation");
  synth->add_option("--D", spec.D, "Random instance: Omega times the cluster half-width");
  synth->add_option("--sources-max", spec.sources_max, "Random instance: sources per cluster, at most");
  synth->add_flag("--modulate", modulate_output, "Multiply the output by 1 - x^2");
  add_common(synth, false);

  // music
  auto* music = app.add_subcommand("music", "Standard or prior-informed MUSIC");
  double ts = -100.0, te = 100.0, tps = 1e-3;
  std::optional<double> prior_center, prior_half;
  std::optional<int> music_order;
  bool with_image = false;
  music->add_option("--ts", ts, "Start of the test interval");
  music->add_option("--te", te, "End of the test interval");
  music->add_option("--tps", tps, "Test-point spacing")->check(CLI::PositiveNumber);
  music->add_option("--center", prior_center, "Prior interval center (prior-informed MUSIC)");
  music->add_option("--half-width", prior_half, "Prior interval half-width (prior-informed MUSIC)");
  music->add_option("--order", music_order, "Force the model order");
  music->add_flag("--image", with_image, "Include the imaging function in the output");
  add_common(music, true);

  // dmusic
  auto* dm = app.add_subcommand("dmusic", "Full pipeline: detect, decouple, recover per cluster");
  PipelineFlags pflags;
  dm->add_option("--config", common.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  add_pipeline_flags(dm, pflags);
  add_common(dm, true);

  // detect
  auto* detect = app.add_subcommand("detect", "Coarse cluster detection on the subsampled band");
  detect->add_option("--config", common.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  add_pipeline_flags(detect, pflags);
  add_common(detect, true);

  // decouple
  auto* dec = app.add_subcommand("decouple", "Split a measurement into local measurements");
  std::vector<double> centers;
  double dec_D = std::numbers::pi;
  double c_mea = 3.0, c_msf = 0.9;
  std::optional<int> dec_order;
  bool dec_plain = false;
  std::string locals_prefix;
  dec->add_option("--centers", centers, "Cluster centers")->required()->delimiter(',');
  dec->add_option("--D", dec_D, "Omega times the cluster half-width")->check(CLI::PositiveNumber);
  dec->add_option("--c-mea", c_mea, "Acceptance constant");
  dec->add_option("--c-msf", c_msf, "Demodulation support");
  dec->add_option("--order", dec_order, "Force the multipole order s");
  dec->add_flag("--plain", dec_plain, "Unmodulated basis");
  dec->add_option("--locals-prefix", locals_prefix, "Write local measurements to <prefix><j>.csv");
  add_common(dec, true);

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Monte-Carlo checks of the analytic bounds");
  std::string sweep = "all";
  int draws = 1000;
  oracle->add_option("--sweep", sweep, "markov|linf_l1|oscillatory|oscillatory_modulated|correlation|correlation_plain|residual|all")
      ->check(CLI::IsMember({"markov", "linf_l1", "oscillatory", "oscillatory_modulated", "correlation",
                             "correlation_plain", "residual", "all"}));
  oracle->add_option("--draws", draws, "Draws per sweep")->check(CLI::PositiveNumber);
  oracle->add_option("--seed", seed, "Seed");
  add_common(oracle, false);

  // bench
  auto* bench = app.add_subcommand("bench", "Monte-Carlo experiments");
  bench->require_subcommand(1);
  auto* table1 = bench->add_subcommand("table1", "Minimum cluster separation for stable decoupling");
  int s = 3, trials = 200;
  std::optional<double> single_L;
  std::string csv_out;
  double threshold = 0.99;
  DecouplingStudyOptions dso;
  bool t1_plain = false;
  table1->add_option("--s", s, "Multipole order")->check(CLI::Range(1, kMaxMultipoleOrder));
  table1->add_option("--trials", trials, "Trials per separation")->check(CLI::PositiveNumber);
  table1->add_option("--seed", seed, "Base seed");
  table1->add_option("--L", single_L, "Evaluate one separation instead of searching the grid");
  table1->add_option("--threshold", threshold, "Success ratio to exceed");
  table1->add_option("--n", dso.n, "Number of samples");
  table1->add_flag("--plain", t1_plain, "Unmodulated decoupling");
  table1->add_option("--csv", csv_out, "Per-trial CSV (single --L only)");
  add_common(table1, false);

  auto* compare = bench->add_subcommand("compare", "Accuracy and timing of D-MUSIC against standard MUSIC");
  CompareConfig cc;
  compare->add_option("--trials", trials, "Trials")->check(CLI::PositiveNumber);
  compare->add_option("--seed", seed, "Base seed");
  compare->add_option("--csv", csv_out, "Per-trial CSV");
  compare->add_option("--n", cc.n, "Number of samples");
  compare->add_option("--config", common.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  add_pipeline_flags(compare, pflags);
  add_common(compare, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) {
      Instance inst;
      double sigma = common.sigma.value_or(1e-3);
      if (!sources_file.empty()) {
        LoadedInstance li = instance_from_json(read_json_file(sources_file));
        inst = std::move(li.instance);
        if (!common.sigma) sigma = li.sigma;
      } else {
        spec.omega = common.omega;
        inst = random_instance(spec, seed);
      }
      require(!common.out.empty(), ErrorKind::invalid_input, "--out: required for synth");
      SampledMeasurement meas = synthesize(inst.measure, n, inst.region.omega, sigma, seed);
      if (modulate_output) meas = modulate(meas);
      write_measurement_csv(common.out, meas);
      if (!instance_out.empty()) write_json_file(instance_out, instance_to_json(inst, sigma));
      manifest("synth", {{"n", n}, {"sigma", sigma}, {"omega", inst.region.omega}, {"modulated", modulate_output}},
               nonempty({sources_file}), nonempty({common.out, instance_out}), seed);
      return kExitOk;
    }

    if (*music) {
      const double sigma = common.sigma.value_or(1e-3);
      const SampledMeasurement meas = read_measurement_csv(common.in, common.omega, sigma);
      MusicOptions opts;
      opts.order_override = music_order;
      require(prior_center.has_value() == prior_half.has_value(), ErrorKind::invalid_input,
              "--center and --half-width must be given together");
      const MusicResult r = prior_center ? music_with_prior(meas, *prior_center, *prior_half, tps, sigma, opts)
                                         : standard_music(meas, ts, te, tps, sigma, opts);
      emit(common.out, to_json(r, with_image));
      manifest("music", {{"ts", ts}, {"te", te}, {"tps", tps}, {"sigma", sigma}}, {common.in}, nonempty({common.out}));
      return (common.strict && r.locations.empty()) ? kExitAlgorithm : kExitOk;
    }

    if (*dm) {
      const PipelineConfig cfg = load_config(common, pflags);
      const SampledMeasurement meas = read_measurement_csv(common.in, common.omega, cfg.sigma);
      const PipelineReport report = run(meas, cfg);
      emit(common.out, to_json(report));
      manifest("dmusic", to_json(cfg), nonempty({common.in, common.config}), nonempty({common.out}));
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      return (common.strict && report.fallback_used) ? kExitAlgorithm : kExitOk;
    }

    if (*detect) {
      const PipelineConfig cfg = load_config(common, pflags);
      const SampledMeasurement meas = read_measurement_csv(common.in, common.omega, cfg.sigma);
      DetectOptions dopts;
      dopts.lambda = cfg.lambda;
      dopts.tps = cfg.tps_cluster;
      dopts.music = cfg.music;
      const ClusterEstimate est = detect_clusters(meas, cfg.o_init, cfg.d_init, cfg.effective_ict(), cfg.sigma, dopts);
      emit(common.out, to_json(est));
      manifest("detect", to_json(cfg), nonempty({common.in, common.config}), nonempty({common.out}));
      return kExitOk;
    }

    if (*dec) {
      const double sigma = common.sigma.value_or(1e-3);
      SampledMeasurement meas = read_measurement_csv(common.in, common.omega, sigma);
      if (!dec_plain) meas = modulate(meas);
      DecoupleOptions o;
      o.c_mea = c_mea;
      o.c_msf = c_msf;
      o.order_override = dec_order;
      o.modulated = !dec_plain;
      const DecoupleResult r = decouple(meas, centers, dec_D, sigma, o);
      std::vector<std::string> outputs = nonempty({common.out});
      if (!locals_prefix.empty()) {
        for (std::size_t j = 0; j < r.local_measurements.size(); ++j) {
          const std::string path = locals_prefix + std::to_string(j) + ".csv";
          write_measurement_csv(path, r.local_measurements[j]);
          outputs.push_back(path);
        }
      }
      emit(common.out, to_json(r));
      manifest("decouple", {{"centers", centers}, {"D", dec_D}, {"c_mea", c_mea}, {"c_msf", c_msf}, {"plain", dec_plain}},
               {common.in}, outputs);
      return (common.strict && !r.success) ? kExitAlgorithm : kExitOk;
    }

    if (*oracle) {
      std::vector<SweepReport> reports;
      auto want = [&](const char* name) { return sweep == "all" || sweep == name; };
      if (want("markov")) reports.push_back(sweep_markov(draws, derive_seed(seed, 1)));
      if (want("linf_l1")) reports.push_back(sweep_linf_l1(draws, derive_seed(seed, 2)));
      if (want("oscillatory")) reports.push_back(sweep_oscillatory(draws, false, derive_seed(seed, 3)));
      if (want("oscillatory_modulated")) reports.push_back(sweep_oscillatory(draws, true, derive_seed(seed, 4)));
      if (want("correlation")) reports.push_back(sweep_correlation(draws, true, derive_seed(seed, 5)));
      if (want("correlation_plain")) reports.push_back(sweep_correlation(draws, false, derive_seed(seed, 6)));
      if (want("residual")) reports.push_back(sweep_residual(draws, derive_seed(seed, 7)));
      json out = json::array();
      bool all_passed = true;
      for (const auto& r : reports) {
        out.push_back(to_json(r));
        all_passed = all_passed && r.passed();
      }
      emit(common.out, out);
      manifest("oracle", {{"sweep", sweep}, {"draws", draws}}, {}, nonempty({common.out}), seed);
      return (common.strict && !all_passed) ? kExitAlgorithm : kExitOk;
    }

    if (*table1) {
      dso.sigma = common.sigma.value_or(1e-3);
      dso.modulated = !t1_plain;
      dso.threads = threads;
      json out = {{"s", s}, {"trials", trials}, {"sigma", dso.sigma}, {"n", dso.n}, {"modulated", dso.modulated}};
      bool ok = true;
      if (single_L) {
        const DecouplingStudy st = decoupling_success_ratio(s, *single_L, trials, seed, dso);
        out["L"] = *single_L;
        out["ratio"] = st.ratio();
        out["successes"] = st.successes;
        ok = st.ratio() > threshold;
        if (!csv_out.empty()) write_trials_csv(csv_out, st.records);
      } else {
        try {
          const SeparationSearch search = min_separation_search(s, default_separation_grid(), trials, seed, dso, threshold);
          out["search"] = to_json(search);
          out["L_star"] = search.L_star;
          out["L_star_over_pi"] = search.L_star / std::numbers::pi;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::search_exhausted) throw;
          out["L_star"] = nullptr;
          out["error"] = e.what();
          ok = false;
        }
      }
      emit(common.out, out);
      manifest("bench table1", out, {}, nonempty({common.out, csv_out}), seed);
      return (common.strict && !ok) ? kExitAlgorithm : kExitOk;
    }

    if (*compare) {
      cc.pipeline = load_config(common, pflags, cc.pipeline);
      cc.sigma = cc.pipeline.sigma;
      cc.threads = threads;
      const auto records = compare_dmusic_vs_music(cc, trials, seed);
      const CompareSummary sum = summarize(records);
      json out = {{"summary", to_json(sum)}, {"config", to_json(cc.pipeline)}, {"trials", json::array()}};
      for (const auto& r : records) out["trials"].push_back(to_json(r));
      emit(common.out, out);
      if (!csv_out.empty()) write_trials_csv(csv_out, records);
      manifest("bench compare", to_json(cc.pipeline), {}, nonempty({common.out, csv_out}), seed);
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::invalid_input ? kExitUsage : kExitAlgorithm;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAlgorithm;
  }
  return kExitUsage;
}
