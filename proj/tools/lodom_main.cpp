// lodom command-line front end.
//
// Subcommands:
//   odometry   chain pairwise scan registrations into a trajectory
//   landscape  sweep two pose axes around a reference and record the losses
//   eval       compare an estimated trajectory against ground truth
//   synth      render a synthetic scene into .bin scans plus ground truth
//   project    dump the vertex/normal maps of a single scan
//
// Exit codes: 0 success, 1 data error (missing scans, unreadable files,
// degenerate inputs), 2 usage or configuration error. No output directory is
// touched until the compute phase has finished, so a failed run leaves no
// partial outputs.

#include <CLI11.hpp>

#include <algorithm>
#include <clocale>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lodom/lodom.hpp"

namespace {

namespace fs = std::filesystem;

void print_error(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
}

// --- shared flags -----------------------------------------------------------

// Every subcommand carries its own copy of the shared flags; only the parsed
// subcommand's copy is ever read.
struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string synth;
  CLI::Option* config_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* synth_opt = nullptr;

  void attach(CLI::App* cmd, bool with_synth) {
    config_opt = cmd->add_option("--config", config_path,
                                 "run configuration file (key = value lines)");
    out_opt = cmd->add_option("--out", out_dir, "output directory");
    seed_opt = cmd->add_option(
        "--seed", seed, "seed offset added to the synthetic scene seed");
    if (with_synth) {
      synth_opt = cmd->add_option(
          "--synth", synth,
          "synthetic scene spec, e.g. box:size=20x20x4:frames=5:step=0.5");
    }
  }

  // Defaults -> config file -> flag overrides, validated at the end.
  lodom::RunConfig build() const {
    lodom::RunConfig config;
    if (config_opt->count() > 0) config = lodom::load_run_config(config_path);
    if (out_opt->count() > 0) config.out_dir = out_dir;
    if (seed_opt->count() > 0) config.seed = seed;
    if (synth_opt != nullptr && synth_opt->count() > 0) config.synth = synth;
    config.validate();
    return config;
  }
};

struct FormatFlag {
  std::string value = "both";

  void attach(CLI::App* cmd) {
    cmd->add_option("--format", value, "trajectory formats to write")
        ->check(CLI::IsMember({"tum", "kitti", "both"}));
  }
  bool tum() const { return value != "kitti"; }
  bool kitti() const { return value != "tum"; }
};

// --- small helpers ----------------------------------------------------------

std::vector<std::string> list_bin_scans(const std::string& dir) {
  if (!fs::is_directory(fs::path(dir))) {
    throw lodom::IoError("scan directory not found: " + dir);
  }
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(fs::path(dir))) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) {
    throw lodom::InvalidInputError("no .bin scans in " + dir);
  }
  return paths;
}

// Straight march along +x, one pose per frame, stamped by frame index.
lodom::Trajectory synth_trajectory(const lodom::SynthSpec& spec) {
  lodom::Trajectory gt;
  for (int i = 0; i < spec.frames; ++i) {
    gt.push_back(static_cast<double>(i),
                 lodom::PoseSE3::from_rt(
                     lodom::Quaternion::identity(),
                     Eigen::Vector3d(i * spec.step_m, 0.0, 0.0)));
  }
  return gt;
}

lodom::SynthSpec parse_synth(const lodom::RunConfig& config, int min_frames) {
  lodom::SynthSpec spec = lodom::parse_scene_spec(config.synth);
  spec.scene.seed += config.seed;
  if (spec.frames < min_frames) {
    throw lodom::InvalidInputError(
        "scene spec: this command needs frames >= " +
        std::to_string(min_frames));
  }
  return spec;
}

void save_trajectories(const lodom::Trajectory& traj, const std::string& dir,
                       const std::string& stem, const FormatFlag& format) {
  if (format.tum()) {
    lodom::save_trajectory_tum(dir + "/" + stem + "_tum.txt", traj);
  }
  if (format.kitti()) {
    lodom::save_trajectory_kitti(dir + "/" + stem + "_kitti.txt", traj);
  }
}

void write_config_used(const lodom::RunConfig& config) {
  const std::string path = config.out_dir + "/config_used.cfg";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw lodom::IoError("cannot open " + path);
  out << lodom::run_config_text(config);
  if (!out) throw lodom::IoError("write failed for " + path);
}

void write_pair_stats_csv(const std::string& path,
                          const std::vector<lodom::PairLog>& pairs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw lodom::IoError("cannot open " + path);
  out << "pair,iterations,final_loss,mean_residual,n_corr,fov_count,"
         "converged,fell_back\n";
  char buf[256];
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    std::snprintf(buf, sizeof(buf), "%zu,%d,%.17g,%.17g,%zu,%zu,%d,%d\n", i,
                  p.stats.iterations, p.stats.final_loss,
                  p.stats.mean_residual, p.stats.n_corr, p.stats.fov_count,
                  p.stats.converged ? 1 : 0, p.fell_back ? 1 : 0);
    out << buf;
  }
  if (!out) throw lodom::IoError("write failed for " + path);
}

// Accepts either 7 reals (tx ty tz qx qy qz qw) or 12 reals (3x4 row-major
// rigid transform).
lodom::PoseSE3 parse_pose_text(const std::string& text) {
  const std::vector<double> v = lodom::detail::split_reals(text);
  if (v.size() == 7) {
    return lodom::PoseSE3::from_rt(
        lodom::Quaternion(v[6], v[3], v[4], v[5]),
        Eigen::Vector3d(v[0], v[1], v[2]));
  }
  if (v.size() == 12) {
    return lodom::detail::pose_from_kitti_values(v, 1e-3, nullptr);
  }
  throw lodom::InvalidInputError(
      "--ref: expected 7 reals (tx ty tz qx qy qz qw) or 12 reals "
      "(3x4 row-major), got " + std::to_string(v.size()));
}

// --- odometry ---------------------------------------------------------------

int cmd_odometry(const CommonFlags& common, const FormatFlag& format,
                 const CLI::Option* scans_opt, const std::string& scans_dir,
                 const CLI::Option* gt_opt, const std::string& gt_path) {
  lodom::RunConfig config;
  lodom::SynthSpec synth;
  try {
    config = common.build();
    if (scans_opt->count() > 0) config.scan_dir = scans_dir;
    if (gt_opt->count() > 0) config.gt_poses = gt_path;
    const bool have_scans = !config.scan_dir.empty();
    const bool have_synth = !config.synth.empty();
    if (have_scans == have_synth) {
      throw lodom::InvalidInputError(
          "odometry needs exactly one input: --scans DIR or --synth SPEC");
    }
    if (have_synth) synth = parse_synth(config, 2);
  } catch (const lodom::Error& e) {
    print_error(e.what());
    return 2;
  }

  try {
    const lodom::ProjectionConfig& cfg = config.projection;
    lodom::OdometryResult result;
    lodom::Trajectory gt;
    bool have_gt = false;

    if (!config.synth.empty()) {
      const lodom::PointCloud scene = lodom::synth_scene(synth.scene);
      gt = synth_trajectory(synth);
      have_gt = true;
      result = lodom::run_odometry(
          gt.size(),
          [&](std::size_t i) {
            return lodom::build_frame(
                lodom::simulate_scan(scene, gt[i].pose, cfg), cfg,
                config.normal_gap_m);
          },
          config.solver);
    } else {
      const std::vector<std::string> paths = list_bin_scans(config.scan_dir);
      result = lodom::run_odometry(
          paths.size(),
          [&](std::size_t i) {
            return lodom::build_frame(lodom::load_kitti_bin(paths[i]), cfg,
                                      config.normal_gap_m);
          },
          config.solver);
      if (!config.gt_poses.empty()) {
        gt = lodom::load_trajectory(config.gt_poses);
        have_gt = true;
        if (gt.size() != result.trajectory.size()) {
          std::fprintf(stderr,
                       "warning: ground truth has %zu poses but %zu scans "
                       "were processed\n",
                       gt.size(), result.trajectory.size());
        }
      }
    }

    fs::create_directories(fs::path(config.out_dir));
    save_trajectories(result.trajectory, config.out_dir, "trajectory", format);
    if (have_gt) save_trajectories(gt, config.out_dir, "gt", format);
    write_pair_stats_csv(config.out_dir + "/pair_stats.csv", result.pairs);
    write_config_used(config);

    std::size_t fallbacks = 0;
    std::size_t converged = 0;
    for (const auto& p : result.pairs) {
      fallbacks += p.fell_back ? 1 : 0;
      converged += p.stats.converged ? 1 : 0;
    }
    std::printf("frames: %zu\n", result.trajectory.size());
    std::printf("pairs: %zu (converged %zu, fallbacks %zu)\n",
                result.pairs.size(), converged, fallbacks);
    if (have_gt && gt.size() == result.trajectory.size() && gt.size() >= 2) {
      double ate = 0.0;
      bool aligned = true;
      try {
        ate = lodom::ate_rmse(result.trajectory, gt, true);
      } catch (const lodom::Error&) {
        ate = lodom::ate_rmse(result.trajectory, gt, false);
        aligned = false;
      }
      std::printf("ate_rmse_m: %.6f (%s)\n", ate,
                  aligned ? "aligned" : "unaligned");
    }
    std::printf("wrote: %s\n", config.out_dir.c_str());
    return 0;
  } catch (const lodom::Error& e) {
    print_error(e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(e.what());
    return 1;
  }
}

// --- landscape --------------------------------------------------------------

int cmd_landscape(const CommonFlags& common, const CLI::Option* scan_a_opt,
                  const std::string& scan_a, const CLI::Option* scan_b_opt,
                  const std::string& scan_b, const CLI::Option* ref_opt,
                  const std::string& ref_text, const std::string& axes,
                  double range, double step) {
  lodom::RunConfig config;
  lodom::SynthSpec synth;
  lodom::PoseSE3 reference;
  lodom::AxisSpec axis1;
  lodom::AxisSpec axis2;
  try {
    config = common.build();
    const bool have_synth = !config.synth.empty();
    const bool have_files = scan_a_opt->count() > 0 || scan_b_opt->count() > 0;
    if (have_synth == have_files) {
      throw lodom::InvalidInputError(
          "landscape needs exactly one input: --scan-a/--scan-b or "
          "--synth SPEC");
    }
    if (have_files && (scan_a_opt->count() == 0 || scan_b_opt->count() == 0)) {
      throw lodom::InvalidInputError(
          "landscape needs both --scan-a and --scan-b");
    }
    if (have_synth) {
      if (ref_opt->count() > 0) {
        throw lodom::InvalidInputError(
            "--ref conflicts with --synth (the scene fixes the true motion)");
      }
      synth = parse_synth(config, 2);
    } else if (ref_opt->count() > 0) {
      reference = parse_pose_text(ref_text);
    }
    axis1.axis = axes == "rotation" ? lodom::PerturbAxis::kRoll
                                    : lodom::PerturbAxis::kTx;
    axis2.axis = axes == "rotation" ? lodom::PerturbAxis::kYaw
                                    : lodom::PerturbAxis::kTy;
    axis1.min_value = axis2.min_value = -range;
    axis1.max_value = axis2.max_value = range;
    axis1.step = axis2.step = step;
    axis1.validate();
    axis2.validate();
  } catch (const lodom::Error& e) {
    print_error(e.what());
    return 2;
  }

  try {
    const lodom::ProjectionConfig& cfg = config.projection;
    lodom::Frame target;
    lodom::Frame source;
    if (!config.synth.empty()) {
      const lodom::PointCloud scene = lodom::synth_scene(synth.scene);
      const lodom::Trajectory gt = synth_trajectory(synth);
      target = lodom::build_frame(lodom::simulate_scan(scene, gt[0].pose, cfg),
                                  cfg, config.normal_gap_m);
      source = lodom::build_frame(lodom::simulate_scan(scene, gt[1].pose, cfg),
                                  cfg, config.normal_gap_m);
      reference = lodom::relative_pose(gt[0].pose, gt[1].pose);
    } else {
      target = lodom::build_frame(lodom::load_kitti_bin(scan_a), cfg,
                                  config.normal_gap_m);
      source = lodom::build_frame(lodom::load_kitti_bin(scan_b), cfg,
                                  config.normal_gap_m);
    }

    const lodom::LossGrid grid = lodom::loss_landscape(
        target, source, reference, axis1, axis2, config.scales);

    fs::create_directories(fs::path(config.out_dir));
    lodom::write_loss_grid_csv(grid, config.out_dir + "/grid.csv");
    lodom::write_vertex_map_ppm(config.out_dir + "/target_vertex.ppm",
                                target.vertex_map);
    lodom::write_normal_map_ppm(config.out_dir + "/target_normal.ppm",
                                target.normal_map);
    lodom::write_vertex_map_ppm(config.out_dir + "/source_vertex.ppm",
                                source.vertex_map);
    lodom::write_normal_map_ppm(config.out_dir + "/source_normal.ppm",
                                source.normal_map);
    write_config_used(config);

    const auto [i1, i2] = grid.min_uns_cell();
    std::printf("grid: %dx%d\n", grid.n1, grid.n2);
    std::printf("minimum offset: %s=%g %s=%g (cell %d,%d)\n",
                lodom::axis_label(grid.axis1.axis), grid.axis1.value_at(i1),
                lodom::axis_label(grid.axis2.axis), grid.axis2.value_at(i2),
                i1, i2);
    std::printf("l_uns at minimum: %.17g\n", grid.at(i1, i2).l_uns);
    std::printf("wrote: %s\n", config.out_dir.c_str());
    return 0;
  } catch (const lodom::Error& e) {
    print_error(e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(e.what());
    return 1;
  }
}

// --- eval -------------------------------------------------------------------

int cmd_eval(const CommonFlags& common, const std::string& est_path,
             const std::string& gt_path) {
  lodom::RunConfig config;
  try {
    config = common.build();
  } catch (const lodom::Error& e) {
    print_error(e.what());
    return 2;
  }

  try {
    const lodom::Trajectory est = lodom::load_trajectory(est_path);
    const lodom::Trajectory gt = lodom::load_trajectory(gt_path);
    const lodom::MetricReport report = lodom::compute_metric_report(est, gt);

    fs::create_directories(fs::path(config.out_dir));
    lodom::write_metric_report_text(report, config.out_dir + "/report.txt");
    lodom::write_metric_report_csv(report, config.out_dir + "/report.csv");

    if (report.kitti_valid) {
      std::printf("t_rel_percent: %.6f\n", report.kitti.t_rel_percent);
      std::printf("r_rel_deg_per_100m: %.6f\n",
                  report.kitti.r_rel_deg_per_100m);
    } else {
      std::printf(
          "t_rel_percent: n/a (path shorter than the smallest segment "
          "length)\n");
      std::printf("r_rel_deg_per_100m: n/a\n");
    }
    std::printf("ate_rmse_m: %.6f (%s)\n", report.ate_rmse_m,
                report.ate_aligned ? "aligned" : "unaligned");
    std::printf("wrote: %s\n", config.out_dir.c_str());
    return 0;
  } catch (const lodom::FormatError& e) {
    print_error(e.what());
    return 2;
  } catch (const lodom::Error& e) {
    print_error(e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(e.what());
    return 1;
  }
}

// --- synth ------------------------------------------------------------------

int cmd_synth(const CommonFlags& common, const FormatFlag& format) {
  lodom::RunConfig config;
  lodom::SynthSpec synth;
  try {
    config = common.build();
    if (config.synth.empty()) {
      throw lodom::InvalidInputError(
          "synth needs --synth SPEC (or a synth entry in the config)");
    }
    synth = parse_synth(config, 1);
  } catch (const lodom::Error& e) {
    print_error(e.what());
    return 2;
  }

  try {
    const lodom::ProjectionConfig& cfg = config.projection;
    const lodom::PointCloud scene = lodom::synth_scene(synth.scene);
    const lodom::Trajectory gt = synth_trajectory(synth);
    std::vector<lodom::PointCloud> scans;
    scans.reserve(gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
      scans.push_back(lodom::simulate_scan(scene, gt[i].pose, cfg));
    }

    fs::create_directories(fs::path(config.out_dir));
    char name[64];
    for (std::size_t i = 0; i < scans.size(); ++i) {
      std::snprintf(name, sizeof(name), "/scan_%06zu.bin", i);
      lodom::save_kitti_bin(config.out_dir + name, scans[i]);
    }
    save_trajectories(gt, config.out_dir, "gt", format);
    write_config_used(config);
    std::printf("scans: %zu\n", scans.size());
    std::printf("wrote: %s\n", config.out_dir.c_str());
    return 0;
  } catch (const lodom::Error& e) {
    print_error(e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(e.what());
    return 1;
  }
}

// --- project ----------------------------------------------------------------

int cmd_project(const CommonFlags& common, const CLI::Option* scan_opt,
                const std::string& scan_path) {
  lodom::RunConfig config;
  lodom::SynthSpec synth;
  try {
    config = common.build();
    const bool have_scan = scan_opt->count() > 0;
    const bool have_synth = !config.synth.empty();
    if (have_scan == have_synth) {
      throw lodom::InvalidInputError(
          "project needs exactly one input: --scan FILE or --synth SPEC");
    }
    if (have_synth) synth = parse_synth(config, 1);
  } catch (const lodom::Error& e) {
    print_error(e.what());
    return 2;
  }

  try {
    const lodom::ProjectionConfig& cfg = config.projection;
    lodom::PointCloud cloud;
    if (scan_opt->count() > 0) {
      cloud = lodom::load_kitti_bin(scan_path);
    } else {
      const lodom::PointCloud scene = lodom::synth_scene(synth.scene);
      cloud = lodom::simulate_scan(scene, synth_trajectory(synth)[0].pose, cfg);
    }
    const lodom::Frame frame =
        lodom::build_frame(cloud, cfg, config.normal_gap_m);

    fs::create_directories(fs::path(config.out_dir));
    lodom::write_vertex_map_ppm(config.out_dir + "/vertex.ppm",
                                frame.vertex_map);
    lodom::write_normal_map_ppm(config.out_dir + "/normal.ppm",
                                frame.normal_map);
    lodom::write_vertex_map_csv(config.out_dir + "/vertex.csv",
                                frame.vertex_map);
    lodom::write_normal_map_csv(config.out_dir + "/normal.csv",
                                frame.normal_map);
    write_config_used(config);

    std::printf("size: %dx%d\n", frame.vertex_map.width(),
                frame.vertex_map.height());
    std::printf("points: %zu\n", cloud.size());
    std::printf("valid vertices: %zu\n", frame.vertex_map.valid_count());
    std::printf("valid normals: %zu\n", frame.normal_map.valid_count());
    std::printf("wrote: %s\n", config.out_dir.c_str());
    return 0;
  } catch (const lodom::Error& e) {
    print_error(e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");

  CLI::App app{"lodom: LiDAR odometry from range-image registration"};
  app.require_subcommand(1);

  CLI::App* odo =
      app.add_subcommand("odometry", "estimate a trajectory from scans");
  CommonFlags odo_common;
  odo_common.attach(odo, true);
  FormatFlag odo_format;
  odo_format.attach(odo);
  std::string scans_dir;
  CLI::Option* scans_opt =
      odo->add_option("--scans", scans_dir, "directory of KITTI .bin scans");
  std::string odo_gt;
  CLI::Option* gt_opt = odo->add_option(
      "--gt", odo_gt, "ground-truth trajectory, copied out and summarized");

  CLI::App* land = app.add_subcommand(
      "landscape", "sweep two pose axes and record the losses");
  CommonFlags land_common;
  land_common.attach(land, true);
  std::string scan_a;
  std::string scan_b;
  CLI::Option* scan_a_opt =
      land->add_option("--scan-a", scan_a, "target scan (.bin)");
  CLI::Option* scan_b_opt =
      land->add_option("--scan-b", scan_b, "source scan (.bin)");
  std::string ref_text;
  CLI::Option* ref_opt = land->add_option(
      "--ref", ref_text,
      "reference source->target pose: 7 reals (tx ty tz qx qy qz qw) or "
      "12 reals (3x4 row-major); default identity");
  std::string axes = "translation";
  land->add_option("--axes", axes, "axis pair to sweep")
      ->check(CLI::IsMember({"translation", "rotation"}));
  double range = 10.0;
  land->add_option("--range", range, "sweep half-width (m or deg)");
  double step = 1.0;
  land->add_option("--step", step, "sweep step (m or deg)");

  CLI::App* eval = app.add_subcommand(
      "eval", "compare an estimated trajectory against ground truth");
  CommonFlags eval_common;
  eval_common.attach(eval, false);
  std::string est_path;
  std::string gt_path;
  eval->add_option("est", est_path, "estimated trajectory (TUM or KITTI)")
      ->required();
  eval->add_option("gt", gt_path, "ground-truth trajectory (TUM or KITTI)")
      ->required();

  CLI::App* synth = app.add_subcommand(
      "synth", "render a synthetic scene into scans plus ground truth");
  CommonFlags synth_common;
  synth_common.attach(synth, true);
  FormatFlag synth_format;
  synth_format.attach(synth);

  CLI::App* project = app.add_subcommand(
      "project", "dump the vertex/normal maps of a single scan");
  CommonFlags project_common;
  project_common.attach(project, true);
  std::string scan_path;
  CLI::Option* scan_opt =
      project->add_option("--scan", scan_path, "scan file (.bin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (odo->parsed()) {
    return cmd_odometry(odo_common, odo_format, scans_opt, scans_dir, gt_opt,
                        odo_gt);
  }
  if (land->parsed()) {
    return cmd_landscape(land_common, scan_a_opt, scan_a, scan_b_opt, scan_b,
                         ref_opt, ref_text, axes, range, step);
  }
  if (eval->parsed()) return cmd_eval(eval_common, est_path, gt_path);
  if (synth->parsed()) return cmd_synth(synth_common, synth_format);
  if (project->parsed()) return cmd_project(project_common, scan_opt, scan_path);
  return 2;
}
