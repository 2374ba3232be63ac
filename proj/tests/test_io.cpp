#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

#include "dmusic/error.hpp"
#include "dmusic/io.hpp"

using namespace dmusic;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dmusic_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Io, InstanceRoundTrip) {
  InstanceSpec spec;
  spec.k_min = 3;
  spec.k_max = 3;
  spec.sources_max = 3;
  spec.min_intra_separation = 0.5;
  const auto inst = random_instance(spec, 8);
  const auto back = instance_from_json(json::parse(instance_to_json(inst, 1e-3).dump()));
  EXPECT_EQ(back.sigma, 1e-3);
  ASSERT_EQ(back.instance.measure.size(), inst.measure.size());
  EXPECT_EQ(back.instance.region.centers, inst.region.centers);
  EXPECT_EQ(back.instance.measure.locations(), inst.measure.locations());
}

TEST(Io, InstanceErrorsNameField) {
  try {
    (void)instance_from_json(json::parse(R"({"omega": 1, "clusters": [{"center": 0, "half_width": 1, "sources": [{"y": 0, "re": 1}]}]})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("clusters[0].sources[0].im"), std::string::npos);
  }
}

TEST(Io, MeasurementCsvIsBitExact) {
  const auto m = synthesize(SourceMeasure({{1.234567, cplx(0.3, -0.7), 0}}), 257, 1.0, 1e-3, 4);
  const auto path = scratch("y.csv");
  write_measurement_csv(path, m);
  const auto back = read_measurement_csv(path);
  EXPECT_EQ(back.grid, m.grid);
  EXPECT_EQ(back.values, m.values);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "x,re,im");
}

TEST(Io, ConfigRoundTripAndErrors) {
  PipelineConfig cfg;
  cfg.lambda = 0.75;
  cfg.ict = 5.0;
  cfg.lambda_ladder = {0.9};
  cfg.local_music.dct = 0.5;
  const auto back = pipeline_config_from_json(to_json(cfg));
  EXPECT_EQ(back.lambda, 0.75);
  EXPECT_EQ(back.ict, 5.0);
  EXPECT_EQ(back.lambda_ladder, std::vector<double>{0.9});
  EXPECT_EQ(back.local_music.dct, 0.5);
  EXPECT_EQ(back.local_music.subspace, SubspaceMethod::truncated);

  for (const auto& [text, field] : std::vector<std::pair<std::string, std::string>>{
           {R"({"lamda": 0.5})", "lamda"},
           {R"({"c_msf": "high"})", "c_msf"},
           {R"({"music": {"pcr": 1.5}})", "music.pcr"}}) {
    try {
      (void)pipeline_config_from_json(json::parse(text));
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  }
}

TEST(Io, FormatDoubleFullPrecision) {
  EXPECT_EQ(std::stod(format_double(std::numbers::pi)), std::numbers::pi);
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Io, ManifestNextToOutput) {
  RunManifest m;
  m.command = "synth";
  m.outputs = {scratch("out.csv").string()};
  m.seed = 7;
  const auto path = write_manifest(m);
  EXPECT_EQ(path.string(), m.outputs[0] + ".manifest.json");
  const auto j = read_json_file(path);
  EXPECT_EQ(j["command"], "synth");
  EXPECT_EQ(j["seed"], 7);
  EXPECT_FALSE(j["timestamp"].get<std::string>().empty());
}
