#include "lodom/analysis.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lodom/error.hpp"
#include "lodom/geom.hpp"
#include "lodom/imaging.hpp"
#include "lodom/ingest.hpp"
#include "test_support.hpp"

namespace lodom {
namespace {

using testing::random_pose;
using testing::random_unit_quaternion;
using testing::random_unit_vector;
using testing::random_vector;
using testing::Rng;

Frame frame_at(const PointCloud& scene, const PoseSE3& sensor,
               const ProjectionConfig& cfg) {
  return build_frame(simulate_scan(scene, sensor, cfg), cfg);
}

Trajectory traj_from_positions(const std::vector<Eigen::Vector3d>& positions) {
  Trajectory traj;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    traj.push_back(static_cast<double>(i),
                   PoseSE3::from_rt(Eigen::Matrix3d::Identity(), positions[i]));
  }
  return traj;
}

// Smooth planar path with slowly varying heading; poses face along the path.
Trajectory curved_path(int n, double step_m, double turn_deg_per_step) {
  Trajectory traj;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  double heading_deg = 0.0;
  for (int i = 0; i < n; ++i) {
    const Quaternion q = euler_to_quat({0.0, 0.0, heading_deg});
    traj.push_back(static_cast<double>(i), PoseSE3::from_rt(q, p));
    const double h = deg2rad(heading_deg);
    p += step_m * Eigen::Vector3d(std::cos(h), std::sin(h), 0.0);
    heading_deg += turn_deg_per_step;
  }
  return traj;
}

Trajectory perturb_poses(const Trajectory& traj, Rng& rng, double max_t,
                         double max_rot_deg) {
  Trajectory out;
  for (const auto& e : traj.entries) {
    const Eigen::Vector3d dt = random_vector(rng, max_t);
    const Eigen::Vector3d axis = random_unit_vector(rng);
    std::uniform_real_distribution<double> ang(-deg2rad(max_rot_deg),
                                               deg2rad(max_rot_deg));
    const PoseSE3 noise = PoseSE3::from_rt(so3_exp(axis * ang(rng)), dt);
    out.push_back(e.stamp, e.pose * noise);
  }
  return out;
}

Trajectory left_transform(const Trajectory& traj, const PoseSE3& g) {
  Trajectory out;
  for (const auto& e : traj.entries) out.push_back(e.stamp, g * e.pose);
  return out;
}

std::string temp_path(const std::string& name) {
  return ::testing::TempDir() + name;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// ---------------------------------------------------------------------------
// Loss landscape
// ---------------------------------------------------------------------------

TEST(Landscape, SelfPairMinimumAtCenterCell) {
  const PointCloud scene = synth_scene(box_scene({20, 20, 4}, 0.08, 7));
  const auto cfg = ProjectionConfig::kitti();
  const Frame frame = frame_at(scene, PoseSE3(), cfg);

  AxisSpec ax1;
  ax1.axis = PerturbAxis::kTx;
  AxisSpec ax2;
  ax2.axis = PerturbAxis::kTy;
  const LossGrid grid =
      loss_landscape(frame, frame, PoseSE3(), ax1, ax2, LossScales{});

  ASSERT_EQ(grid.n1, 21);
  ASSERT_EQ(grid.n2, 21);
  const auto [i1, i2] = grid.min_uns_cell();
  EXPECT_EQ(i1, 10);
  EXPECT_EQ(i2, 10);
  EXPECT_DOUBLE_EQ(grid.at(10, 10).l_icp, 0.0);
  EXPECT_DOUBLE_EQ(grid.at(10, 10).l_fov, 0.0);
  EXPECT_DOUBLE_EQ(grid.at(10, 10).l_uns, -6.0);
  for (const auto& s : grid.samples) {
    EXPECT_TRUE(std::isfinite(s.l_uns));
    EXPECT_GE(s.l_uns, -6.0);
  }
}

TEST(Landscape, GridHasFourHundredFortyOneCells) {
  AxisSpec ax;
  EXPECT_EQ(ax.count(), 21);
  const PointCloud scene = synth_scene(box_scene({20, 20, 4}, 0.2, 7));
  const auto cfg = ProjectionConfig::kitti();
  const Frame frame = frame_at(scene, PoseSE3(), cfg);
  AxisSpec ax2;
  ax2.axis = PerturbAxis::kTy;
  const LossGrid grid =
      loss_landscape(frame, frame, PoseSE3(), ax, ax2, LossScales{});
  EXPECT_EQ(grid.samples.size(), 441u);
}

TEST(Landscape, CsvHasHeaderAndOneRowPerCell) {
  const PointCloud scene = synth_scene(box_scene({20, 20, 4}, 0.2, 7));
  const auto cfg = ProjectionConfig::kitti();
  const Frame frame = frame_at(scene, PoseSE3(), cfg);
  AxisSpec ax1;
  AxisSpec ax2;
  ax2.axis = PerturbAxis::kTy;
  const LossGrid grid =
      loss_landscape(frame, frame, PoseSE3(), ax1, ax2, LossScales{});

  const std::string path = temp_path("grid.csv");
  write_loss_grid_csv(grid, path);
  const auto lines = read_lines(path);
  ASSERT_EQ(lines.size(), 442u);
  EXPECT_EQ(lines[0], "axis1,axis2,L_icp,L_fov,L_uns");
  EXPECT_EQ(lines[1].rfind("-10,-10,", 0), 0u);
  EXPECT_EQ(lines[441].rfind("10,10,", 0), 0u);
}

TEST(Landscape, TranslationBasinNearGroundTruth) {
  const PointCloud scene = synth_scene(box_scene({20, 20, 4}, 0.08, 11));
  const auto cfg = ProjectionConfig::kitti();
  const PoseSE3 pose_a;
  const PoseSE3 pose_b =
      PoseSE3::from_rt(euler_to_quat({0.0, 0.0, 2.0}), {0.5, 0.2, 0.0});
  const Frame target = frame_at(scene, pose_a, cfg);
  const Frame source = frame_at(scene, pose_b, cfg);
  const PoseSE3 t_gt = relative_pose(pose_a, pose_b);

  AxisSpec ax1;
  ax1.axis = PerturbAxis::kTx;
  AxisSpec ax2;
  ax2.axis = PerturbAxis::kTy;
  const LossGrid grid =
      loss_landscape(target, source, t_gt, ax1, ax2, LossScales{});
  const auto [i1, i2] = grid.min_uns_cell();
  EXPECT_LE(std::abs(i1 - 10), 1);
  EXPECT_LE(std::abs(i2 - 10), 1);
}

TEST(Landscape, RotationBasinNearGroundTruth) {
  const PointCloud scene = synth_scene(box_scene({20, 20, 4}, 0.08, 11));
  const auto cfg = ProjectionConfig::kitti();
  const PoseSE3 pose_a;
  const PoseSE3 pose_b =
      PoseSE3::from_rt(euler_to_quat({0.0, 0.0, 2.0}), {0.5, 0.2, 0.0});
  const Frame target = frame_at(scene, pose_a, cfg);
  const Frame source = frame_at(scene, pose_b, cfg);
  const PoseSE3 t_gt = relative_pose(pose_a, pose_b);

  AxisSpec ax1;
  ax1.axis = PerturbAxis::kRoll;
  AxisSpec ax2;
  ax2.axis = PerturbAxis::kYaw;
  const LossGrid grid =
      loss_landscape(target, source, t_gt, ax1, ax2, LossScales{});
  const auto [i1, i2] = grid.min_uns_cell();
  EXPECT_LE(std::abs(i1 - 10), 1);
  EXPECT_LE(std::abs(i2 - 10), 1);
}

TEST(Landscape, RejectsBadAxisSpecs) {
  const PointCloud scene = synth_scene(box_scene({20, 20, 4}, 0.2, 7));
  const auto cfg = ProjectionConfig::kitti();
  const Frame frame = frame_at(scene, PoseSE3(), cfg);

  AxisSpec good;
  AxisSpec bad_step = good;
  bad_step.step = 0.0;
  EXPECT_THROW(bad_step.validate(), InvalidInputError);

  AxisSpec non_tiling = good;
  non_tiling.step = 0.7;
  EXPECT_THROW(non_tiling.validate(), InvalidInputError);

  AxisSpec inverted = good;
  inverted.min_value = 10.0;
  inverted.max_value = -10.0;
  EXPECT_THROW(inverted.validate(), InvalidInputError);

  AxisSpec same = good;  // same axis on both slots is rejected
  EXPECT_THROW(
      loss_landscape(frame, frame, PoseSE3(), good, same, LossScales{}),
      InvalidInputError);
}

// ---------------------------------------------------------------------------
// KITTI-style segment drift
// ---------------------------------------------------------------------------

TEST(KittiErrors, ExactEstimateIsZero) {
  const Trajectory gt = curved_path(400, 1.0, 0.3);
  const KittiErrors err =
      kitti_relative_errors(gt, gt, std::vector<double>{50.0, 100.0, 200.0});
  EXPECT_NEAR(err.t_rel_percent, 0.0, 1e-9);
  EXPECT_NEAR(err.r_rel_deg_per_100m, 0.0, 1e-5);
  ASSERT_EQ(err.buckets.size(), 3u);
  for (const auto& b : err.buckets) {
    EXPECT_GT(b.n_segments, 0);
    EXPECT_NEAR(b.t_rel_percent, 0.0, 1e-9);
  }
}

TEST(KittiErrors, OnePercentScaleDriftOnStraightPath) {
  std::vector<Eigen::Vector3d> gt_pos;
  std::vector<Eigen::Vector3d> est_pos;
  for (int k = 0; k <= 1000; ++k) {
    gt_pos.push_back({static_cast<double>(k), 0.0, 0.0});
    est_pos.push_back({1.01 * k, 0.0, 0.0});
  }
  const Trajectory gt = traj_from_positions(gt_pos);
  const Trajectory est = traj_from_positions(est_pos);

  const KittiErrors err = kitti_relative_errors(est, gt);
  EXPECT_NEAR(err.t_rel_percent, 1.0, 1e-9);
  EXPECT_NEAR(err.r_rel_deg_per_100m, 0.0, 1e-9);
  ASSERT_EQ(err.buckets.size(), 8u);
  for (const auto& b : err.buckets) {
    EXPECT_GT(b.n_segments, 0);
    EXPECT_NEAR(b.t_rel_percent, 1.0, 1e-9);
  }
}

TEST(KittiErrors, ConstantYawDriftGivesTenDegPer100m) {
  Trajectory gt;
  Trajectory est;
  for (int k = 0; k <= 1000; ++k) {
    const Eigen::Vector3d p(static_cast<double>(k), 0.0, 0.0);
    gt.push_back(k, PoseSE3::from_rt(Eigen::Matrix3d::Identity(), p));
    est.push_back(k, PoseSE3::from_rt(euler_to_quat({0.0, 0.0, 0.1 * k}), p));
  }
  const KittiErrors err = kitti_relative_errors(est, gt);
  EXPECT_NEAR(err.r_rel_deg_per_100m, 10.0, 1e-6);
  for (const auto& b : err.buckets) {
    EXPECT_NEAR(b.r_rel_deg_per_100m, 10.0, 1e-6);
  }
}

TEST(KittiErrors, InvariantToGlobalRigidTransform) {
  Rng rng(99);
  const Trajectory gt = curved_path(150, 1.0, 0.5);
  const Trajectory est = perturb_poses(gt, rng, 0.05, 0.5);
  // lengths chosen off the 1 m frame spacing so segment boundaries are not
  // floating-point ties that a rigid remapping of the positions could flip
  const std::vector<double> lengths{19.7, 41.3, 77.9};

  const KittiErrors base = kitti_relative_errors(est, gt, lengths);
  const PoseSE3 g = random_pose(rng, 50.0);
  const KittiErrors moved =
      kitti_relative_errors(left_transform(est, g), left_transform(gt, g),
                            lengths);
  EXPECT_NEAR(base.t_rel_percent, moved.t_rel_percent, 1e-9);
  EXPECT_NEAR(base.r_rel_deg_per_100m, moved.r_rel_deg_per_100m, 1e-9);
  EXPECT_GT(base.t_rel_percent, 0.0);
}

TEST(KittiErrors, TooShortPathThrowsListingUsable) {
  std::vector<Eigen::Vector3d> pos;
  for (int k = 0; k <= 50; ++k) pos.push_back({static_cast<double>(k), 0, 0});
  const Trajectory traj = traj_from_positions(pos);
  try {
    kitti_relative_errors(traj, traj);
    FAIL() << "expected InvalidInputError";
  } catch (const InvalidInputError& e) {
    EXPECT_NE(std::string(e.what()).find("usable"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("50"), std::string::npos);
  }
}

TEST(KittiErrors, RecordsEmptyBucketsForUnreachableLengths) {
  std::vector<Eigen::Vector3d> pos;
  for (int k = 0; k <= 250; ++k) pos.push_back({static_cast<double>(k), 0, 0});
  const Trajectory traj = traj_from_positions(pos);
  const KittiErrors err = kitti_relative_errors(
      traj, traj, std::vector<double>{100.0, 200.0, 800.0});
  ASSERT_EQ(err.buckets.size(), 3u);
  EXPECT_DOUBLE_EQ(err.buckets[0].length_m, 100.0);
  EXPECT_EQ(err.buckets[0].n_segments, 151);
  EXPECT_EQ(err.buckets[1].n_segments, 51);
  EXPECT_EQ(err.buckets[2].n_segments, 0);
}

TEST(KittiErrors, MismatchedSizesThrow) {
  const Trajectory gt = curved_path(150, 1.0, 0.5);
  Trajectory est = curved_path(150, 1.0, 0.5);
  est.entries.pop_back();
  EXPECT_THROW(kitti_relative_errors(est, gt), InvalidInputError);
}

// ---------------------------------------------------------------------------
// Umeyama alignment
// ---------------------------------------------------------------------------

Trajectory random_walk(Rng& rng, int n, double step) {
  Trajectory traj;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    traj.push_back(i, PoseSE3::from_rt(random_unit_quaternion(rng), p));
    p += step * random_unit_vector(rng);
  }
  return traj;
}

TEST(Umeyama, IdentityForExactMatch) {
  Rng rng(3);
  const Trajectory gt = random_walk(rng, 50, 1.0);
  const PoseSE3 g = umeyama_align(gt, gt);
  EXPECT_LT((g.matrix() - Eigen::Matrix4d::Identity()).norm(), 1e-9);
}

TEST(Umeyama, RecoversKnownRigidTransform) {
  Rng rng(4);
  const Trajectory gt = random_walk(rng, 60, 1.0);
  const PoseSE3 g0 = random_pose(rng, 20.0);
  const Trajectory est = left_transform(gt, g0);
  const PoseSE3 g = umeyama_align(est, gt);
  EXPECT_LT((g.matrix() - g0.inverse().matrix()).norm(), 1e-9);
}

TEST(Umeyama, MatchesEigenUmeyamaOnNoisyData) {
  Rng rng(5);
  const Trajectory gt = random_walk(rng, 80, 1.0);
  const PoseSE3 g0 = random_pose(rng, 10.0);
  Trajectory est;
  for (const auto& e : gt.entries) {
    est.push_back(e.stamp,
                  PoseSE3::from_rt(Eigen::Matrix3d::Identity(),
                                   g0.apply(e.pose.translation()) +
                                       random_vector(rng, 0.05)));
  }

  Eigen::Matrix3Xd src(3, static_cast<int>(est.size()));
  Eigen::Matrix3Xd dst(3, static_cast<int>(gt.size()));
  for (int i = 0; i < src.cols(); ++i) {
    src.col(i) = est[i].pose.translation();
    dst.col(i) = gt[i].pose.translation();
  }
  const Eigen::Matrix4d oracle = Eigen::umeyama(src, dst, false);

  const PoseSE3 g = umeyama_align(est, gt);
  EXPECT_LT((g.matrix() - oracle).norm(), 1e-9);
}

TEST(Umeyama, ThrowsOnDegenerateGeometry) {
  std::vector<Eigen::Vector3d> line;
  for (int k = 0; k < 10; ++k) line.push_back({2.0 * k, 0.0, 0.0});
  const Trajectory collinear = traj_from_positions(line);
  EXPECT_THROW(umeyama_align(collinear, collinear), NumericalError);

  std::vector<Eigen::Vector3d> same(5, Eigen::Vector3d(1.0, 2.0, 3.0));
  const Trajectory coincident = traj_from_positions(same);
  EXPECT_THROW(umeyama_align(coincident, coincident), NumericalError);

  std::vector<Eigen::Vector3d> two{{0, 0, 0}, {1, 1, 0}};
  const Trajectory short_traj = traj_from_positions(two);
  EXPECT_THROW(umeyama_align(short_traj, short_traj), InvalidInputError);
}

// ---------------------------------------------------------------------------
// ATE
// ---------------------------------------------------------------------------

// Integer-lattice walk with turns: offsets of whole meters stay exact in
// floating point, so the constant-offset ATE is exactly 1.
Trajectory lattice_walk(int n) {
  std::vector<Eigen::Vector3d> pos;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  const Eigen::Vector3d steps[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int i = 0; i < n; ++i) {
    pos.push_back(p);
    p += steps[i % 3];
  }
  return traj_from_positions(pos);
}

TEST(Ate, ZeroForIdenticalTrajectories) {
  const Trajectory gt = lattice_walk(30);
  EXPECT_DOUBLE_EQ(ate_rmse(gt, gt, false), 0.0);
  EXPECT_NEAR(ate_rmse(gt, gt, true), 0.0, 1e-9);
}

TEST(Ate, ConstantOffsetExactlyOneUnaligned) {
  const Trajectory gt = lattice_walk(30);
  Trajectory est;
  for (const auto& e : gt.entries) {
    est.push_back(e.stamp,
                  PoseSE3::from_rt(e.pose.rotation(),
                                   e.pose.translation() +
                                       Eigen::Vector3d(1.0, 0.0, 0.0)));
  }
  EXPECT_DOUBLE_EQ(ate_rmse(est, gt, false), 1.0);
  EXPECT_NEAR(ate_rmse(est, gt, true), 0.0, 1e-9);
}

TEST(Ate, MatchesBruteForceOracle) {
  Rng rng(6);
  const Trajectory gt = random_walk(rng, 40, 1.0);
  const Trajectory est = perturb_poses(gt, rng, 0.3, 2.0);

  double sq = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    sq += (est[i].pose.translation() - gt[i].pose.translation()).squaredNorm();
  }
  const double naive = std::sqrt(sq / static_cast<double>(gt.size()));
  EXPECT_NEAR(ate_rmse(est, gt, false), naive, 1e-12);

  Eigen::Matrix3Xd src(3, static_cast<int>(est.size()));
  Eigen::Matrix3Xd dst(3, static_cast<int>(gt.size()));
  for (int i = 0; i < src.cols(); ++i) {
    src.col(i) = est[i].pose.translation();
    dst.col(i) = gt[i].pose.translation();
  }
  const Eigen::Matrix4d g = Eigen::umeyama(src, dst, false);
  double sq_aligned = 0.0;
  for (int i = 0; i < src.cols(); ++i) {
    const Eigen::Vector3d moved =
        g.topLeftCorner<3, 3>() * src.col(i) + g.topRightCorner<3, 1>();
    sq_aligned += (moved - dst.col(i)).squaredNorm();
  }
  const double naive_aligned =
      std::sqrt(sq_aligned / static_cast<double>(src.cols()));
  EXPECT_NEAR(ate_rmse(est, gt, true), naive_aligned, 1e-9);
}

TEST(Ate, AlignmentNeverIncreasesError) {
  for (unsigned seed = 10; seed < 16; ++seed) {
    Rng rng(seed);
    const Trajectory gt = random_walk(rng, 35, 1.0);
    const Trajectory est = perturb_poses(left_transform(gt, random_pose(rng)),
                                         rng, 0.2, 2.0);
    EXPECT_LE(ate_rmse(est, gt, true), ate_rmse(est, gt, false) + 1e-12);
  }
}

TEST(Ate, SizeMismatchThrows) {
  const Trajectory gt = lattice_walk(10);
  Trajectory est = lattice_walk(10);
  est.entries.pop_back();
  EXPECT_THROW(ate_rmse(est, gt, false), InvalidInputError);
  EXPECT_THROW(ate_rmse(Trajectory{}, Trajectory{}, false), InvalidInputError);
}

// ---------------------------------------------------------------------------
// Summary statistics
// ---------------------------------------------------------------------------

TEST(SummaryStatsTest, InterpolatesQuantiles) {
  const SummaryStats s = summarize_samples({4.0, 1.0, 3.0, 2.0});
  EXPECT_DOUBLE_EQ(s.min_value, 1.0);
  EXPECT_DOUBLE_EQ(s.max_value, 4.0);
  EXPECT_DOUBLE_EQ(s.q25, 1.75);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q75, 3.25);

  const SummaryStats one = summarize_samples({5.0});
  EXPECT_DOUBLE_EQ(one.median, 5.0);
  EXPECT_DOUBLE_EQ(one.q25, 5.0);
  EXPECT_DOUBLE_EQ(one.max_value, 5.0);

  EXPECT_THROW(summarize_samples({}), InvalidInputError);
}

// ---------------------------------------------------------------------------
// Sub-trajectory statistics
// ---------------------------------------------------------------------------

TEST(Subtraj, AllZeroForExactEstimate) {
  const Trajectory gt = curved_path(80, 1.0, 0.4);
  const SubtrajReport report =
      relative_errors_subtraj(gt, gt, {10.0, 20.0});
  ASSERT_EQ(report.per_distance.size(), 2u);
  EXPECT_TRUE(report.skipped_m.empty());
  for (const auto& s : report.per_distance) {
    EXPECT_GT(s.n_segments, 0);
    EXPECT_NEAR(s.translation_percent.max_value, 0.0, 1e-9);
    EXPECT_NEAR(s.heading_deg.max_value, 0.0, 1e-6);
  }
}

TEST(Subtraj, HeadingErrorOneDegreeAfterStartRotation) {
  Trajectory gt;
  Trajectory est;
  const PoseSE3 twist = PoseSE3::from_rt(euler_to_quat({0.0, 0.0, 1.0}),
                                         Eigen::Vector3d::Zero());
  for (int k = 0; k <= 100; ++k) {
    const PoseSE3 pose = PoseSE3::from_rt(
        Eigen::Matrix3d::Identity(), {static_cast<double>(k), 0.0, 0.0});
    gt.push_back(k, pose);
    est.push_back(k, k == 0 ? pose : twist * pose);
  }
  const SubtrajReport report = relative_errors_subtraj(est, gt, {100.0});
  ASSERT_EQ(report.per_distance.size(), 1u);
  const auto& s = report.per_distance[0];
  EXPECT_EQ(s.n_segments, 1);
  EXPECT_NEAR(s.heading_deg.median, 1.0, 1e-9);
  EXPECT_NEAR(s.heading_deg.min_value, 1.0, 1e-9);
  EXPECT_NEAR(s.heading_deg.max_value, 1.0, 1e-9);
  // chord error of a 1 degree rotation at 100 m, as a percentage
  const double expected_pct = 200.0 * std::sin(deg2rad(0.5));
  EXPECT_NEAR(s.translation_percent.median, expected_pct, 1e-9);
}

TEST(Subtraj, SkipsDistancesBeyondPathLength) {
  const Trajectory gt = curved_path(51, 1.0, 0.2);  // 50 m of path
  const SubtrajReport report = relative_errors_subtraj(gt, gt, {10.0, 500.0});
  ASSERT_EQ(report.per_distance.size(), 1u);
  EXPECT_DOUBLE_EQ(report.per_distance[0].distance_m, 10.0);
  ASSERT_EQ(report.skipped_m.size(), 1u);
  EXPECT_DOUBLE_EQ(report.skipped_m[0], 500.0);
}

TEST(Subtraj, MatchesBruteForceOracle) {
  Rng rng(21);
  Trajectory gt = curved_path(50, 1.0, 1.5);
  Trajectory est = perturb_poses(gt, rng, 0.1, 1.0);
  const std::vector<double> distances{5.0, 12.0};
  const SubtrajReport report = relative_errors_subtraj(est, gt, distances);

  // naive re-implementation on raw 4x4 matrices
  std::vector<double> dist(gt.size(), 0.0);
  for (std::size_t i = 1; i < gt.size(); ++i) {
    dist[i] = dist[i - 1] + (gt[i].pose.translation() -
                             gt[i - 1].pose.translation())
                                .norm();
  }
  const auto naive_quantile = [](std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double idx = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(idx));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (idx - lo) * (v[hi] - v[lo]);
  };
  ASSERT_EQ(report.per_distance.size(), distances.size());
  for (std::size_t di = 0; di < distances.size(); ++di) {
    std::vector<double> t_pct;
    std::vector<double> heading;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      std::size_t j = gt.size();
      for (std::size_t k = i + 1; k < gt.size(); ++k) {
        if (dist[k] - dist[i] >= distances[di]) {
          j = k;
          break;
        }
      }
      if (j == gt.size()) continue;
      const Eigen::Matrix4d g =
          gt[i].pose.matrix() * est[i].pose.matrix().inverse();
      const Eigen::Matrix4d end = g * est[j].pose.matrix();
      const Eigen::Vector3d dt =
          end.topRightCorner<3, 1>() - gt[j].pose.translation();
      t_pct.push_back(100.0 * dt.norm() / (dist[j] - dist[i]));
      const Eigen::Matrix3d r_err =
          gt[j].pose.rotation().transpose() * end.topLeftCorner<3, 3>();
      const double yaw_deg = rad2deg(std::atan2(r_err(1, 0), r_err(0, 0)));
      heading.push_back(std::abs(yaw_deg));
    }
    const auto& s = report.per_distance[di];
    ASSERT_EQ(s.n_segments, static_cast<int>(t_pct.size()));
    EXPECT_NEAR(s.translation_percent.median, naive_quantile(t_pct, 0.5),
                1e-9);
    EXPECT_NEAR(s.translation_percent.q25, naive_quantile(t_pct, 0.25), 1e-9);
    EXPECT_NEAR(s.translation_percent.q75, naive_quantile(t_pct, 0.75), 1e-9);
    EXPECT_NEAR(s.translation_percent.min_value,
                *std::min_element(t_pct.begin(), t_pct.end()), 1e-9);
    EXPECT_NEAR(s.translation_percent.max_value,
                *std::max_element(t_pct.begin(), t_pct.end()), 1e-9);
    EXPECT_NEAR(s.heading_deg.median, naive_quantile(heading, 0.5), 1e-9);
    EXPECT_NEAR(s.heading_deg.q25, naive_quantile(heading, 0.25), 1e-9);
    EXPECT_NEAR(s.heading_deg.q75, naive_quantile(heading, 0.75), 1e-9);
  }
}

TEST(Subtraj, RejectsNonPositiveDistances) {
  const Trajectory gt = curved_path(20, 1.0, 0.2);
  EXPECT_THROW(relative_errors_subtraj(gt, gt, {0.0}), InvalidInputError);
  EXPECT_THROW(relative_errors_subtraj(gt, gt, {-5.0}), InvalidInputError);
  EXPECT_THROW(relative_errors_subtraj(gt, gt, {}), InvalidInputError);
}

// ---------------------------------------------------------------------------
// Combined report
// ---------------------------------------------------------------------------

TEST(MetricReportTest, ComposesAllSections) {
  const Trajectory gt = curved_path(901, 1.0, 0.25);  // 900 m of path
  const MetricReport report = compute_metric_report(gt, gt);
  EXPECT_TRUE(report.kitti_valid);
  EXPECT_NEAR(report.kitti.t_rel_percent, 0.0, 1e-9);
  EXPECT_TRUE(report.ate_aligned);
  EXPECT_NEAR(report.ate_rmse_m, 0.0, 1e-9);
  EXPECT_DOUBLE_EQ(report.ate_unaligned_m, 0.0);
  EXPECT_EQ(report.subtraj.per_distance.size(), 8u);

  const std::string text_path = temp_path("report.txt");
  const std::string csv_path = temp_path("report.csv");
  write_metric_report_text(report, text_path);
  write_metric_report_csv(report, csv_path);

  const auto text = read_lines(text_path);
  ASSERT_FALSE(text.empty());
  EXPECT_EQ(text[0], "relative drift over segment lengths");

  const auto csv = read_lines(csv_path);
  ASSERT_FALSE(csv.empty());
  EXPECT_EQ(csv[0], "section,length_m,stat,value");
  EXPECT_NE(std::find(csv.begin(), csv.end(), "kitti,,valid,1"), csv.end());
  EXPECT_NE(std::find(csv.begin(), csv.end(), "ate,,aligned,1"), csv.end());
}

TEST(MetricReportTest, DegradesGracefullyOnShortCollinearPath) {
  std::vector<Eigen::Vector3d> pos;
  for (int k = 0; k <= 50; ++k) pos.push_back({static_cast<double>(k), 0, 0});
  const Trajectory gt = traj_from_positions(pos);
  const MetricReport report = compute_metric_report(gt, gt);
  EXPECT_FALSE(report.kitti_valid);
  EXPECT_FALSE(report.ate_aligned);  // collinear path: alignment undefined
  EXPECT_DOUBLE_EQ(report.ate_rmse_m, report.ate_unaligned_m);
  EXPECT_TRUE(report.subtraj.per_distance.empty());
  EXPECT_EQ(report.subtraj.skipped_m.size(), 8u);
  const std::string text = metric_report_text(report);
  EXPECT_NE(text.find("not computed"), std::string::npos);
}

}  // namespace
}  // namespace lodom
