#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "lodom/error.hpp"
#include "lodom/imaging.hpp"
#include "lodom/ingest.hpp"
#include "lodom/registration.hpp"
#include "lodom/solver.hpp"

namespace lodom {

// Full configuration of a run: projection geometry, solver options, loss
// scales, input/output locations, and the RNG seed for synthetic scenes.
// Defaults describe a 720x52 image at 0.5 degree resolution (360 degrees
// horizontal, +2/-24 vertical), unit loss scales of -3, and a 0.5 m normal
// gap threshold.
struct RunConfig {
  ProjectionConfig projection;
  SolverOptions solver;
  LossScales scales;
  double normal_gap_m = 0.5;
  std::string scan_dir;   // directory of .bin scans, scanned in name order
  std::string gt_poses;   // optional ground-truth trajectory file
  std::string out_dir = "out";
  std::string synth;      // synthetic scene spec, e.g. "corridor:frames=20"
  std::uint64_t seed = 0;

  void validate() const {
    projection.validate();
    solver.validate();
    scales.validate();
    if (!(normal_gap_m > 0.0) || !std::isfinite(normal_gap_m)) {
      throw InvalidInputError("RunConfig: normal_gap_m must be positive");
    }
    if (out_dir.empty()) {
      throw InvalidInputError("RunConfig: out_dir must not be empty");
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double config_real(const std::string& value, const std::string& key) {
  return parse_real(value, "config key " + key);
}

inline int config_int(const std::string& value, const std::string& key) {
  const double d = config_real(value, key);
  if (d != std::floor(d) || d < -2147483648.0 || d > 2147483647.0) {
    throw InvalidInputError("config key " + key + ": expected an integer, got " +
                            value);
  }
  return static_cast<int>(d);
}

inline std::uint64_t config_u64(const std::string& value,
                                const std::string& key) {
  const double d = config_real(value, key);
  if (d != std::floor(d) || d < 0.0 || d > 9.007199254740992e15) {
    throw InvalidInputError("config key " + key +
                            ": expected a nonnegative integer, got " + value);
  }
  return static_cast<std::uint64_t>(d);
}

inline InitMode parse_init_mode(const std::string& value,
                                const std::string& key) {
  if (value == "identity") return InitMode::kIdentity;
  if (value == "constant_velocity") return InitMode::kConstantVelocity;
  if (value == "fixed_forward") return InitMode::kFixedForward;
  throw InvalidInputError("config key " + key + ": unknown mode '" + value +
                          "' (expected identity, constant_velocity, or "
                          "fixed_forward)");
}

inline const char* init_mode_name(InitMode mode) {
  switch (mode) {
    case InitMode::kIdentity: return "identity";
    case InitMode::kConstantVelocity: return "constant_velocity";
    case InitMode::kFixedForward: return "fixed_forward";
  }
  return "unknown";
}

}  // namespace detail

// Applies one "key = value" assignment. Unknown keys are rejected so typos
// cannot silently fall back to defaults.
inline void set_run_config_value(RunConfig& config, const std::string& raw_key,
                                 const std::string& raw_value) {
  const std::string key = detail::trim(raw_key);
  const std::string value = detail::trim(raw_value);
  if (key.empty()) throw InvalidInputError("config: empty key");

  if (key == "fov_h_deg") {
    config.projection.fov_h_deg = detail::config_real(value, key);
  } else if (key == "fov_up_deg") {
    config.projection.fov_up_deg = detail::config_real(value, key);
  } else if (key == "fov_down_deg") {
    config.projection.fov_down_deg = detail::config_real(value, key);
  } else if (key == "res_h_deg") {
    config.projection.res_h_deg = detail::config_real(value, key);
  } else if (key == "res_v_deg") {
    config.projection.res_v_deg = detail::config_real(value, key);
  } else if (key == "min_depth_m") {
    config.projection.min_depth_m = detail::config_real(value, key);
  } else if (key == "normal_gap_m") {
    config.normal_gap_m = detail::config_real(value, key);
  } else if (key == "max_iterations") {
    config.solver.max_iterations = detail::config_int(value, key);
  } else if (key == "tolerance") {
    config.solver.tolerance = detail::config_real(value, key);
  } else if (key == "lambda0") {
    config.solver.lambda0 = detail::config_real(value, key);
  } else if (key == "min_correspondences") {
    config.solver.min_correspondences =
        static_cast<std::size_t>(detail::config_u64(value, key));
  } else if (key == "fov_reject_fraction") {
    config.solver.fov_reject_fraction = detail::config_real(value, key);
  } else if (key == "init_mode") {
    config.solver.init_mode = detail::parse_init_mode(value, key);
  } else if (key == "fixed_forward_distance_m") {
    config.solver.fixed_forward_distance_m = detail::config_real(value, key);
  } else if (key == "max_step_translation_m") {
    config.solver.max_step_translation_m = detail::config_real(value, key);
  } else if (key == "max_step_rotation_deg") {
    config.solver.max_step_rotation_deg = detail::config_real(value, key);
  } else if (key == "s_icp") {
    config.scales.s_icp = detail::config_real(value, key);
  } else if (key == "s_fov") {
    config.scales.s_fov = detail::config_real(value, key);
  } else if (key == "s_t") {
    config.scales.s_t = detail::config_real(value, key);
  } else if (key == "s_r") {
    config.scales.s_r = detail::config_real(value, key);
  } else if (key == "scan_dir") {
    config.scan_dir = value;
  } else if (key == "gt_poses") {
    config.gt_poses = value;
  } else if (key == "out_dir") {
    config.out_dir = value;
  } else if (key == "synth") {
    config.synth = value;
  } else if (key == "seed") {
    config.seed = detail::config_u64(value, key);
  } else {
    throw InvalidInputError("config: unknown key '" + key + "'");
  }
}

// Flat "key = value" file. '#' starts a comment, blank lines are skipped,
// later assignments override earlier ones. The result is validated.
inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_run_config: cannot open " + path);
  RunConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw FormatError("load_run_config: line " + std::to_string(lineno) +
                        " of " + path + " is not a key = value assignment");
    }
    try {
      set_run_config_value(config, trimmed.substr(0, eq),
                           trimmed.substr(eq + 1));
    } catch (const InvalidInputError& e) {
      throw InvalidInputError(std::string(e.what()) + " (line " +
                              std::to_string(lineno) + " of " + path + ")");
    }
  }
  config.validate();
  return config;
}

// Canonical dump of every key; parseable by load_run_config, so a run can
// record the exact configuration it used.
inline std::string run_config_text(const RunConfig& c) {
  std::ostringstream out;
  char buf[128];
  const auto real_row = [&out, &buf](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%s = %.17g\n", key, v);
    out << buf;
  };
  real_row("fov_h_deg", c.projection.fov_h_deg);
  real_row("fov_up_deg", c.projection.fov_up_deg);
  real_row("fov_down_deg", c.projection.fov_down_deg);
  real_row("res_h_deg", c.projection.res_h_deg);
  real_row("res_v_deg", c.projection.res_v_deg);
  real_row("min_depth_m", c.projection.min_depth_m);
  real_row("normal_gap_m", c.normal_gap_m);
  real_row("max_iterations", c.solver.max_iterations);
  real_row("tolerance", c.solver.tolerance);
  real_row("lambda0", c.solver.lambda0);
  real_row("min_correspondences",
           static_cast<double>(c.solver.min_correspondences));
  real_row("fov_reject_fraction", c.solver.fov_reject_fraction);
  out << "init_mode = " << detail::init_mode_name(c.solver.init_mode) << "\n";
  real_row("fixed_forward_distance_m", c.solver.fixed_forward_distance_m);
  real_row("max_step_translation_m", c.solver.max_step_translation_m);
  real_row("max_step_rotation_deg", c.solver.max_step_rotation_deg);
  real_row("s_icp", c.scales.s_icp);
  real_row("s_fov", c.scales.s_fov);
  real_row("s_t", c.scales.s_t);
  real_row("s_r", c.scales.s_r);
  out << "scan_dir = " << c.scan_dir << "\n";
  out << "gt_poses = " << c.gt_poses << "\n";
  out << "out_dir = " << c.out_dir << "\n";
  out << "synth = " << c.synth << "\n";
  std::snprintf(buf, sizeof(buf), "seed = %llu\n",
                static_cast<unsigned long long>(c.seed));
  out << buf;
  return out.str();
}

}  // namespace lodom
