#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lodom/error.hpp"
#include "lodom/geom.hpp"
#include "lodom/imaging.hpp"
#include "lodom/registration.hpp"
#include "lodom/trajectory.hpp"

namespace lodom {

// ---------------------------------------------------------------------------
// Loss landscape: evaluate the registration losses on a regular grid of pose
// perturbations around a reference transform.
// ---------------------------------------------------------------------------

enum class PerturbAxis { kTx, kTy, kTz, kRoll, kPitch, kYaw };

inline bool axis_is_rotation(PerturbAxis a) {
  return a == PerturbAxis::kRoll || a == PerturbAxis::kPitch ||
         a == PerturbAxis::kYaw;
}

inline const char* axis_label(PerturbAxis a) {
  switch (a) {
    case PerturbAxis::kTx: return "tx_m";
    case PerturbAxis::kTy: return "ty_m";
    case PerturbAxis::kTz: return "tz_m";
    case PerturbAxis::kRoll: return "roll_deg";
    case PerturbAxis::kPitch: return "pitch_deg";
    case PerturbAxis::kYaw: return "yaw_deg";
  }
  return "unknown";
}

// One perturbation axis: inclusive [min_value, max_value] sampled every
// `step`. Units are meters for translation axes and degrees for rotation.
struct AxisSpec {
  PerturbAxis axis = PerturbAxis::kTx;
  double min_value = -10.0;
  double max_value = 10.0;
  double step = 1.0;

  void validate() const {
    if (!std::isfinite(min_value) || !std::isfinite(max_value) ||
        !std::isfinite(step)) {
      throw InvalidInputError("AxisSpec: bounds and step must be finite");
    }
    if (!(step > 0.0)) {
      throw InvalidInputError("AxisSpec: step must be positive");
    }
    if (!(max_value > min_value)) {
      throw InvalidInputError("AxisSpec: max_value must exceed min_value");
    }
    const double n = (max_value - min_value) / step;
    if (std::abs(n - std::round(n)) > 1e-9) {
      throw InvalidInputError(
          "AxisSpec: step must tile [min_value, max_value] exactly");
    }
  }

  int count() const {
    validate();
    return static_cast<int>(std::lround((max_value - min_value) / step)) + 1;
  }

  double value_at(int i) const { return min_value + step * i; }
};

struct LossSample {
  double l_icp = 0.0;
  double l_fov = 0.0;
  double l_uns = 0.0;
};

// 2D grid of loss samples. samples is axis1-major: samples[i1 * n2 + i2].
struct LossGrid {
  AxisSpec axis1;
  AxisSpec axis2;
  PoseSE3 reference;
  int n1 = 0;
  int n2 = 0;
  std::vector<LossSample> samples;

  const LossSample& at(int i1, int i2) const {
    return samples[static_cast<std::size_t>(i1) * n2 + i2];
  }

  // Indices of the cell with the smallest combined loss; the first such cell
  // in scan order on ties, so the result is deterministic.
  std::pair<int, int> min_uns_cell() const {
    if (samples.empty()) throw InvalidInputError("LossGrid: empty grid");
    std::size_t best = 0;
    for (std::size_t k = 1; k < samples.size(); ++k) {
      if (samples[k].l_uns < samples[best].l_uns) best = k;
    }
    return {static_cast<int>(best / n2), static_cast<int>(best % n2)};
  }
};

namespace detail {

// Pose built from two axis offsets (all other axes zero). Rotation offsets
// feed the intrinsic Z-Y-X Euler convention; translation offsets are meters.
inline PoseSE3 axis_pair_pose(PerturbAxis a1, double v1, PerturbAxis a2,
                              double v2) {
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  EulerDeg e;
  const auto put = [&t, &e](PerturbAxis axis, double v) {
    switch (axis) {
      case PerturbAxis::kTx: t.x() = v; break;
      case PerturbAxis::kTy: t.y() = v; break;
      case PerturbAxis::kTz: t.z() = v; break;
      case PerturbAxis::kRoll: e.rx = v; break;
      case PerturbAxis::kPitch: e.ry = v; break;
      case PerturbAxis::kYaw: e.rz = v; break;
    }
  };
  put(a1, v1);
  put(a2, v2);
  return PoseSE3::from_rt(euler_to_quat(e), t);
}

}  // namespace detail

// Evaluates the registration losses for source->target transforms
// P(v1, v2) * reference, where P perturbs the two requested axes on a regular
// grid. Cells are independent of each other and are evaluated and stored in
// index order, so results are reproducible.
inline LossGrid loss_landscape(const Frame& target_frame,
                               const Frame& source_frame,
                               const PoseSE3& reference, const AxisSpec& axis1,
                               const AxisSpec& axis2,
                               const LossScales& scales = LossScales{}) {
  axis1.validate();
  axis2.validate();
  scales.validate();
  if (axis1.axis == axis2.axis) {
    throw InvalidInputError("loss_landscape: the two axes must differ");
  }
  LossGrid grid;
  grid.axis1 = axis1;
  grid.axis2 = axis2;
  grid.reference = reference;
  grid.n1 = axis1.count();
  grid.n2 = axis2.count();
  grid.samples.resize(static_cast<std::size_t>(grid.n1) * grid.n2);
  for (int i1 = 0; i1 < grid.n1; ++i1) {
    for (int i2 = 0; i2 < grid.n2; ++i2) {
      const PoseSE3 perturbed =
          detail::axis_pair_pose(axis1.axis, axis1.value_at(i1), axis2.axis,
                                 axis2.value_at(i2)) *
          reference;
      LossSample s;
      s.l_icp = icp_loss(target_frame, source_frame.vertex_map, perturbed).loss;
      s.l_fov = static_cast<double>(
          fov_loss(source_frame.vertex_map, perturbed, target_frame.config()));
      s.l_uns = unsupervised_loss(s.l_icp, s.l_fov, scales);
      grid.samples[static_cast<std::size_t>(i1) * grid.n2 + i2] = s;
    }
  }
  return grid;
}

inline void write_loss_grid_csv(const LossGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_loss_grid_csv: cannot open " + path);
  out << "axis1,axis2,L_icp,L_fov,L_uns\n";
  char buf[256];
  for (int i1 = 0; i1 < grid.n1; ++i1) {
    for (int i2 = 0; i2 < grid.n2; ++i2) {
      const LossSample& s = grid.at(i1, i2);
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    grid.axis1.value_at(i1), grid.axis2.value_at(i2), s.l_icp,
                    s.l_fov, s.l_uns);
      out << buf;
    }
  }
  if (!out) throw IoError("write_loss_grid_csv: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Trajectory metrics.
// ---------------------------------------------------------------------------

inline const std::vector<double>& kitti_segment_lengths() {
  static const std::vector<double> lengths = {100.0, 200.0, 300.0, 400.0,
                                              500.0, 600.0, 700.0, 800.0};
  return lengths;
}

struct KittiLengthBucket {
  double length_m = 0.0;
  int n_segments = 0;
  double t_rel_percent = 0.0;
  double r_rel_deg_per_100m = 0.0;
};

struct KittiErrors {
  std::vector<KittiLengthBucket> buckets;  // one per requested length
  double t_rel_percent = 0.0;              // mean over buckets with segments
  double r_rel_deg_per_100m = 0.0;
};

namespace detail {

inline void check_index_aligned(const Trajectory& est, const Trajectory& gt,
                                const char* who) {
  if (est.size() != gt.size()) {
    throw InvalidInputError(std::string(who) +
                            ": est and gt must have the same length (" +
                            std::to_string(est.size()) + " vs " +
                            std::to_string(gt.size()) + ")");
  }
  if (est.size() < 2) {
    throw InvalidInputError(std::string(who) + ": need at least 2 poses");
  }
}

inline void check_positive_lengths(const std::vector<double>& lengths,
                                   const char* who) {
  if (lengths.empty()) {
    throw InvalidInputError(std::string(who) + ": no segment lengths given");
  }
  for (double l : lengths) {
    if (!std::isfinite(l) || !(l > 0.0)) {
      throw InvalidInputError(std::string(who) +
                              ": segment lengths must be positive");
    }
  }
}

}  // namespace detail

// Relative drift over fixed path-length segments. Segments start at every
// frame; a segment for length L runs to the first frame whose ground-truth
// path distance from the start is >= L, so its true length overshoots L by
// less than one frame spacing. Errors are normalized by the actual segment
// path distance. Per length, t_rel is the RMSE of translation error as a
// percentage of distance and r_rel the RMSE of the geodesic rotation angle
// error in degrees per 100 m; the headline numbers average the per-length
// values over lengths that produced at least one segment.
inline KittiErrors kitti_relative_errors(
    const Trajectory& est, const Trajectory& gt,
    const std::vector<double>& lengths = kitti_segment_lengths()) {
  detail::check_index_aligned(est, gt, "kitti_relative_errors");
  detail::check_positive_lengths(lengths, "kitti_relative_errors");
  const std::vector<double> dist = path_distances(gt);
  const int n = static_cast<int>(gt.size());

  KittiErrors out;
  double t_sum = 0.0;
  double r_sum = 0.0;
  int usable = 0;
  for (double length : lengths) {
    KittiLengthBucket bucket;
    bucket.length_m = length;
    double t_sq = 0.0;
    double r_sq = 0.0;
    int j = 0;  // nondecreasing over i: dist[i] + length is nondecreasing
    for (int i = 0; i + 1 < n; ++i) {
      if (j <= i) j = i + 1;
      while (j < n && dist[j] - dist[i] < length) ++j;
      if (j >= n) break;  // no later start can reach this length either
      const double actual = dist[j] - dist[i];
      const PoseSE3 gt_rel = relative_pose(gt[i].pose, gt[j].pose);
      const PoseSE3 est_rel = relative_pose(est[i].pose, est[j].pose);
      const PoseSE3 err = relative_pose(gt_rel, est_rel);
      const double t_pct = 100.0 * err.translation().norm() / actual;
      const double r_deg_per_100m =
          100.0 * rad2deg(rotation_angle(err.rotation())) / actual;
      t_sq += t_pct * t_pct;
      r_sq += r_deg_per_100m * r_deg_per_100m;
      ++bucket.n_segments;
    }
    if (bucket.n_segments > 0) {
      bucket.t_rel_percent = std::sqrt(t_sq / bucket.n_segments);
      bucket.r_rel_deg_per_100m = std::sqrt(r_sq / bucket.n_segments);
      t_sum += bucket.t_rel_percent;
      r_sum += bucket.r_rel_deg_per_100m;
      ++usable;
    }
    out.buckets.push_back(bucket);
  }
  if (usable == 0) {
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "kitti_relative_errors: gt path length %.3f m is shorter "
                  "than every requested segment length (smallest %.3f m); "
                  "usable lengths: none",
                  dist.back(),
                  *std::min_element(lengths.begin(), lengths.end()));
    throw InvalidInputError(buf);
  }
  out.t_rel_percent = t_sum / usable;
  out.r_rel_deg_per_100m = r_sum / usable;
  return out;
}

// Least-squares rigid transform g (rotation + translation, no scale)
// minimizing sum_i |g(p_est_i) - p_gt_i|^2 over the trajectory positions.
// Throws NumericalError when the positions are collinear or coincident, since
// the rotation is then not determined.
inline PoseSE3 umeyama_align(const Trajectory& est, const Trajectory& gt) {
  if (est.size() != gt.size()) {
    throw InvalidInputError(
        "umeyama_align: est and gt must have the same length");
  }
  const std::size_t n = est.size();
  if (n < 3) {
    throw InvalidInputError("umeyama_align: need at least 3 position pairs");
  }
  Eigen::Vector3d c_est = Eigen::Vector3d::Zero();
  Eigen::Vector3d c_gt = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    c_est += est[i].pose.translation();
    c_gt += gt[i].pose.translation();
  }
  c_est /= static_cast<double>(n);
  c_gt /= static_cast<double>(n);

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    h += (est[i].pose.translation() - c_est) *
         (gt[i].pose.translation() - c_gt).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(1) > sv(0) * 1e-12)) {
    throw NumericalError(
        "umeyama_align: positions are collinear or coincident; the rotation "
        "is rank-deficient");
  }
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant();
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  return PoseSE3::from_rt(r, c_gt - r * c_est);
}

// RMSE of position differences; when align is true, the estimate is first
// mapped through the least-squares rigid alignment, which can only lower the
// result.
inline double ate_rmse(const Trajectory& est, const Trajectory& gt,
                       bool align) {
  if (est.size() != gt.size()) {
    throw InvalidInputError("ate_rmse: est and gt must have the same length");
  }
  if (est.empty()) throw InvalidInputError("ate_rmse: empty trajectories");
  PoseSE3 g;
  if (align) g = umeyama_align(est, gt);
  double sq = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    sq += (g.apply(est[i].pose.translation()) - gt[i].pose.translation())
              .squaredNorm();
  }
  return std::sqrt(sq / static_cast<double>(est.size()));
}

// ---------------------------------------------------------------------------
// Sub-trajectory error statistics.
// ---------------------------------------------------------------------------

struct SummaryStats {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
};

namespace detail {

// Quantile by linear interpolation between order statistics at p * (n - 1)
// (the common "type 7" definition).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double idx = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(idx));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline SummaryStats summarize_samples(std::vector<double> samples) {
  if (samples.empty()) {
    throw InvalidInputError("summarize_samples: no samples");
  }
  std::sort(samples.begin(), samples.end());
  SummaryStats s;
  s.min_value = samples.front();
  s.max_value = samples.back();
  s.q25 = detail::quantile_sorted(samples, 0.25);
  s.median = detail::quantile_sorted(samples, 0.50);
  s.q75 = detail::quantile_sorted(samples, 0.75);
  return s;
}

struct SubtrajDistanceStats {
  double distance_m = 0.0;
  int n_segments = 0;
  SummaryStats translation_percent;
  SummaryStats heading_deg;
};

struct SubtrajReport {
  std::vector<SubtrajDistanceStats> per_distance;
  std::vector<double> skipped_m;  // distances longer than the path
};

// For each travel distance, every sub-trajectory (one per start frame) is
// re-anchored by aligning the estimate to ground truth at its first state;
// the end-point translation error is reported as a percentage of the actual
// sub-trajectory path distance, and the heading error as the absolute yaw of
// the end-pose rotation error in degrees. Segments are collected in start
// order; each distance reports box-plot statistics over its segments.
inline SubtrajReport relative_errors_subtraj(
    const Trajectory& est, const Trajectory& gt,
    const std::vector<double>& distances) {
  detail::check_index_aligned(est, gt, "relative_errors_subtraj");
  detail::check_positive_lengths(distances, "relative_errors_subtraj");
  const std::vector<double> dist = path_distances(gt);
  const int n = static_cast<int>(gt.size());

  SubtrajReport report;
  for (double distance : distances) {
    std::vector<double> t_pct;
    std::vector<double> heading;
    int j = 0;
    for (int i = 0; i + 1 < n; ++i) {
      if (j <= i) j = i + 1;
      while (j < n && dist[j] - dist[i] < distance) ++j;
      if (j >= n) break;
      const double actual = dist[j] - dist[i];
      const PoseSE3 g = gt[i].pose * est[i].pose.inverse();
      const PoseSE3 aligned_end = g * est[j].pose;
      t_pct.push_back(
          100.0 *
          (aligned_end.translation() - gt[j].pose.translation()).norm() /
          actual);
      const Eigen::Matrix3d r_err =
          gt[j].pose.rotation().transpose() * aligned_end.rotation();
      heading.push_back(
          std::abs(quat_to_euler(Quaternion::from_rotation_matrix(r_err)).rz));
    }
    if (t_pct.empty()) {
      report.skipped_m.push_back(distance);
      continue;
    }
    SubtrajDistanceStats s;
    s.distance_m = distance;
    s.n_segments = static_cast<int>(t_pct.size());
    s.translation_percent = summarize_samples(std::move(t_pct));
    s.heading_deg = summarize_samples(std::move(heading));
    report.per_distance.push_back(s);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Combined report.
// ---------------------------------------------------------------------------

struct MetricReport {
  KittiErrors kitti;
  bool kitti_valid = false;  // false when the path is too short to segment
  double ate_rmse_m = 0.0;   // aligned when ate_aligned, else unaligned
  double ate_unaligned_m = 0.0;
  bool ate_aligned = false;
  SubtrajReport subtraj;
};

// Assembles every metric. Degenerate geometry downgrades gracefully: a path
// shorter than the smallest segment length leaves the drift section empty,
// and collinear positions (where the aligning rotation is undefined) fall
// back to the unaligned ATE, flagged by ate_aligned.
inline MetricReport compute_metric_report(
    const Trajectory& est, const Trajectory& gt,
    const std::vector<double>& lengths = kitti_segment_lengths(),
    const std::vector<double>& distances = kitti_segment_lengths()) {
  detail::check_index_aligned(est, gt, "compute_metric_report");
  detail::check_positive_lengths(lengths, "compute_metric_report");
  MetricReport report;
  const std::vector<double> dist = path_distances(gt);
  const double min_len = *std::min_element(lengths.begin(), lengths.end());
  if (dist.back() >= min_len) {
    report.kitti = kitti_relative_errors(est, gt, lengths);
    report.kitti_valid = true;
  }
  report.ate_unaligned_m = ate_rmse(est, gt, false);
  try {
    report.ate_rmse_m = ate_rmse(est, gt, true);
    report.ate_aligned = true;
  } catch (const NumericalError&) {
    report.ate_rmse_m = report.ate_unaligned_m;
    report.ate_aligned = false;
  } catch (const InvalidInputError&) {  // fewer than 3 poses
    report.ate_rmse_m = report.ate_unaligned_m;
    report.ate_aligned = false;
  }
  report.subtraj = relative_errors_subtraj(est, gt, distances);
  return report;
}

inline std::string metric_report_text(const MetricReport& r) {
  std::ostringstream out;
  char buf[320];
  out << "relative drift over segment lengths\n";
  if (r.kitti_valid) {
    std::snprintf(buf, sizeof(buf),
                  "  t_rel %.6f %%  r_rel %.6f deg/100m\n",
                  r.kitti.t_rel_percent, r.kitti.r_rel_deg_per_100m);
    out << buf;
    for (const auto& b : r.kitti.buckets) {
      std::snprintf(buf, sizeof(buf),
                    "  length %.0f m  n %d  t_rel %.6f %%  r_rel %.6f "
                    "deg/100m\n",
                    b.length_m, b.n_segments, b.t_rel_percent,
                    b.r_rel_deg_per_100m);
      out << buf;
    }
  } else {
    out << "  not computed: path shorter than the smallest segment length\n";
  }
  std::snprintf(buf, sizeof(buf),
                "absolute trajectory error\n  rmse %.6f m (%s)  unaligned "
                "%.6f m\n",
                r.ate_rmse_m,
                r.ate_aligned ? "aligned" : "alignment degenerate, unaligned",
                r.ate_unaligned_m);
  out << buf;
  out << "sub-trajectory errors\n";
  for (const auto& s : r.subtraj.per_distance) {
    std::snprintf(buf, sizeof(buf), "  distance %.0f m  n %d\n", s.distance_m,
                  s.n_segments);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "    translation %%: median %.6f  q25 %.6f  q75 %.6f  min "
                  "%.6f  max %.6f\n",
                  s.translation_percent.median, s.translation_percent.q25,
                  s.translation_percent.q75, s.translation_percent.min_value,
                  s.translation_percent.max_value);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "    heading deg:   median %.6f  q25 %.6f  q75 %.6f  min "
                  "%.6f  max %.6f\n",
                  s.heading_deg.median, s.heading_deg.q25, s.heading_deg.q75,
                  s.heading_deg.min_value, s.heading_deg.max_value);
    out << buf;
  }
  if (!r.subtraj.skipped_m.empty()) {
    out << "  skipped distances (exceed path length):";
    for (double d : r.subtraj.skipped_m) {
      std::snprintf(buf, sizeof(buf), " %.0f", d);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

inline void write_metric_report_text(const MetricReport& r,
                                     const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_metric_report_text: cannot open " + path);
  out << metric_report_text(r);
  if (!out) throw IoError("write_metric_report_text: write failed for " + path);
}

// Machine-readable report. Header "section,length_m,stat,value"; scalar rows
// leave length_m empty. Sections: kitti, ate, subtraj.
inline void write_metric_report_csv(const MetricReport& r,
                                    const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_metric_report_csv: cannot open " + path);
  out << "section,length_m,stat,value\n";
  char buf[256];
  const auto row = [&out, &buf](const char* section, const std::string& len,
                                const char* stat, double value) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.17g\n", section, len.c_str(),
                  stat, value);
    out << buf;
  };
  const auto len_str = [](double m) {
    char b[40];
    std::snprintf(b, sizeof(b), "%.17g", m);
    return std::string(b);
  };
  row("kitti", "", "valid", r.kitti_valid ? 1.0 : 0.0);
  if (r.kitti_valid) {
    row("kitti", "", "t_rel_percent", r.kitti.t_rel_percent);
    row("kitti", "", "r_rel_deg_per_100m", r.kitti.r_rel_deg_per_100m);
    for (const auto& b : r.kitti.buckets) {
      const std::string len = len_str(b.length_m);
      row("kitti", len, "n_segments", b.n_segments);
      row("kitti", len, "t_rel_percent", b.t_rel_percent);
      row("kitti", len, "r_rel_deg_per_100m", b.r_rel_deg_per_100m);
    }
  }
  row("ate", "", "rmse_m", r.ate_rmse_m);
  row("ate", "", "aligned", r.ate_aligned ? 1.0 : 0.0);
  row("ate", "", "unaligned_rmse_m", r.ate_unaligned_m);
  for (const auto& s : r.subtraj.per_distance) {
    const std::string len = len_str(s.distance_m);
    row("subtraj", len, "n_segments", s.n_segments);
    row("subtraj", len, "t_percent_median", s.translation_percent.median);
    row("subtraj", len, "t_percent_q25", s.translation_percent.q25);
    row("subtraj", len, "t_percent_q75", s.translation_percent.q75);
    row("subtraj", len, "t_percent_min", s.translation_percent.min_value);
    row("subtraj", len, "t_percent_max", s.translation_percent.max_value);
    row("subtraj", len, "heading_deg_median", s.heading_deg.median);
    row("subtraj", len, "heading_deg_q25", s.heading_deg.q25);
    row("subtraj", len, "heading_deg_q75", s.heading_deg.q75);
    row("subtraj", len, "heading_deg_min", s.heading_deg.min_value);
    row("subtraj", len, "heading_deg_max", s.heading_deg.max_value);
  }
  for (double d : r.subtraj.skipped_m) {
    row("subtraj", len_str(d), "skipped", 1.0);
  }
  if (!out) throw IoError("write_metric_report_csv: write failed for " + path);
}

}  // namespace lodom
