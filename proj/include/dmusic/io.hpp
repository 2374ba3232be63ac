#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "dmusic/bench.hpp"
#include "dmusic/bounds_oracle.hpp"
#include "dmusic/cluster.hpp"
#include "dmusic/model.hpp"
#include "dmusic/multipole.hpp"
#include "dmusic/pipeline.hpp"

namespace dmusic {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// {omega, sigma, clusters: [{center, half_width, sources: [{y, re, im}]}]}
json instance_to_json(const Instance& inst, double sigma);

struct LoadedInstance {
  Instance instance;
  double sigma = 0.0;
};

/// Inverse of instance_to_json. L and D of the region are recomputed from the
/// clusters. Throws invalid_input naming the offending field.
LoadedInstance instance_from_json(const json& j);

/// Header `x,re,im`, 17 significant digits.
void write_measurement_csv(const std::filesystem::path& path, const SampledMeasurement& meas);
SampledMeasurement read_measurement_csv(const std::filesystem::path& path, double omega = 1.0, double sigma = 0.0);

json to_json(const PipelineConfig& cfg);
json to_json(const MusicOptions& opts);
/// Overlays the fields present in `j` on `base`; unknown fields and wrong types
/// throw invalid_input with the field name.
PipelineConfig pipeline_config_from_json(const json& j, PipelineConfig base = {});

json to_json(const ClusterEstimate& est);
json to_json(const PipelineReport& report);
json to_json(const MusicResult& result, bool include_image);
/// Summary of a decoupling: order, residual, conditioning, and coefficients.
json to_json(const DecoupleResult& result);
json to_json(const SweepReport& report);
json to_json(const TrialRecord& record);
json to_json(const CompareSummary& summary);
json to_json(const SeparationSearch& search);

/// One row per trial.
void write_trials_csv(const std::filesystem::path& path, const std::vector<TrialRecord>& records);

struct RunManifest {
  std::string command;
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
  std::string timestamp;  // UTC, ISO 8601; filled by write_manifest when empty
};

json to_json(const RunManifest& manifest);
/// Writes `<output>.manifest.json` next to the first output and returns its path.
std::filesystem::path write_manifest(RunManifest manifest);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

/// %.17g; non-finite values print as inf, -inf, nan.
std::string format_double(double v);

}  // namespace dmusic
