#include "lodom/run_config.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <string>

#include "lodom/error.hpp"

namespace lodom {
namespace {

std::string write_temp_config(const std::string& name,
                              const std::string& body) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream out(path, std::ios::trunc);
  out << body;
  return path;
}

TEST(RunConfig, DefaultsDescribeTheStockSensorGeometry) {
  const RunConfig config;
  EXPECT_DOUBLE_EQ(config.projection.fov_h_deg, 360.0);
  EXPECT_DOUBLE_EQ(config.projection.fov_up_deg, 2.0);
  EXPECT_DOUBLE_EQ(config.projection.fov_down_deg, 24.0);
  EXPECT_DOUBLE_EQ(config.projection.res_h_deg, 0.5);
  EXPECT_DOUBLE_EQ(config.projection.res_v_deg, 0.5);
  EXPECT_EQ(config.projection.width(), 720);
  EXPECT_EQ(config.projection.height(), 52);
  EXPECT_DOUBLE_EQ(config.scales.s_icp, -3.0);
  EXPECT_DOUBLE_EQ(config.scales.s_fov, -3.0);
  EXPECT_DOUBLE_EQ(config.scales.s_t, -3.0);
  EXPECT_DOUBLE_EQ(config.scales.s_r, -3.0);
  EXPECT_DOUBLE_EQ(config.normal_gap_m, 0.5);
  EXPECT_EQ(config.solver.max_iterations, 30);
  EXPECT_EQ(config.solver.min_correspondences, 100u);
  EXPECT_EQ(config.solver.init_mode, InitMode::kConstantVelocity);
  EXPECT_EQ(config.seed, 0u);
  EXPECT_NO_THROW(config.validate());
}

TEST(RunConfig, ParsesKeysCommentsAndBlankLines) {
  const std::string path = write_temp_config("full.cfg",
                                             "# experiment setup\n"
                                             "fov_h_deg = 90\n"
                                             "\n"
                                             "res_h_deg=0.5  # inline note\n"
                                             "  max_iterations =  12\n"
                                             "init_mode = fixed_forward\n"
                                             "s_icp = -1.5\n"
                                             "scan_dir = /data/scans\n"
                                             "seed = 42\n");
  const RunConfig config = load_run_config(path);
  EXPECT_DOUBLE_EQ(config.projection.fov_h_deg, 90.0);
  EXPECT_EQ(config.projection.width(), 180);
  EXPECT_EQ(config.solver.max_iterations, 12);
  EXPECT_EQ(config.solver.init_mode, InitMode::kFixedForward);
  EXPECT_DOUBLE_EQ(config.scales.s_icp, -1.5);
  EXPECT_EQ(config.scan_dir, "/data/scans");
  EXPECT_EQ(config.seed, 42u);
  // untouched keys keep their defaults
  EXPECT_DOUBLE_EQ(config.projection.fov_up_deg, 2.0);
}

TEST(RunConfig, LaterAssignmentsOverrideEarlierOnes) {
  const std::string path = write_temp_config(
      "dup.cfg", "fov_h_deg = 90\nfov_h_deg = 180\n");
  EXPECT_DOUBLE_EQ(load_run_config(path).projection.fov_h_deg, 180.0);
}

TEST(RunConfig, RejectsUnknownKeysNamingThem) {
  const std::string path =
      write_temp_config("unknown.cfg", "fov_h_deg = 90\nfov_hdeg = 90\n");
  try {
    load_run_config(path);
    FAIL() << "expected InvalidInputError";
  } catch (const InvalidInputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("fov_hdeg"), std::string::npos);
    EXPECT_NE(msg.find("line 2"), std::string::npos);
  }
}

TEST(RunConfig, RejectsMalformedValues) {
  EXPECT_THROW(
      load_run_config(write_temp_config("bad1.cfg", "fov_h_deg = wide\n")),
      InvalidInputError);
  EXPECT_THROW(
      load_run_config(write_temp_config("bad2.cfg", "max_iterations = 1.5\n")),
      InvalidInputError);
  EXPECT_THROW(
      load_run_config(write_temp_config("bad3.cfg", "seed = -1\n")),
      InvalidInputError);
  EXPECT_THROW(
      load_run_config(write_temp_config("bad4.cfg", "init_mode = warp\n")),
      InvalidInputError);
}

TEST(RunConfig, RejectsLinesWithoutAssignment) {
  const std::string path =
      write_temp_config("noeq.cfg", "fov_h_deg = 90\njust words\n");
  try {
    load_run_config(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(RunConfig, ValidatesTheLoadedConfig) {
  // 0.7 degrees does not tile the 360 degree sweep into whole pixels
  const std::string path =
      write_temp_config("invalid.cfg", "res_h_deg = 0.7\n");
  EXPECT_THROW(load_run_config(path), InvalidInputError);
  EXPECT_THROW(
      load_run_config(write_temp_config("badgap.cfg", "normal_gap_m = 0\n")),
      InvalidInputError);
}

TEST(RunConfig, MissingFileThrowsIoError) {
  EXPECT_THROW(load_run_config("/nonexistent/lodom.cfg"), IoError);
}

TEST(RunConfig, TextDumpRoundTrips) {
  RunConfig config;
  config.projection.fov_h_deg = 180.0;
  config.solver.max_iterations = 7;
  config.solver.init_mode = InitMode::kIdentity;
  config.scales.s_fov = -2.25;
  config.scan_dir = "/data/seq09";
  config.synth = "corridor:frames=20";
  config.seed = 1234567;

  const std::string dump = run_config_text(config);
  const std::string path = write_temp_config("roundtrip.cfg", dump);
  const RunConfig back = load_run_config(path);
  EXPECT_EQ(run_config_text(back), dump);
}

TEST(RunConfig, SetValueAppliesSingleOverrides) {
  RunConfig config;
  set_run_config_value(config, "out_dir", "results");
  set_run_config_value(config, " seed ", " 9 ");
  EXPECT_EQ(config.out_dir, "results");
  EXPECT_EQ(config.seed, 9u);
  EXPECT_THROW(set_run_config_value(config, "bogus", "1"), InvalidInputError);
}

}  // namespace
}  // namespace lodom
