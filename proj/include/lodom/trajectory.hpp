#pragma once

#include <Eigen/Core>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lodom/error.hpp"
#include "lodom/geom.hpp"

namespace lodom {

struct TimedPose {
  double stamp = 0.0;
  PoseSE3 pose;
};

// Timestamped sequence of global poses, strictly increasing stamps.
struct Trajectory {
  std::vector<TimedPose> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  const TimedPose& operator[](std::size_t i) const { return entries[i]; }

  void push_back(double stamp, const PoseSE3& pose) {
    if (!entries.empty() && !(stamp > entries.back().stamp)) {
      throw InvalidInputError("Trajectory: stamps must be strictly increasing");
    }
    entries.push_back({stamp, pose});
  }

  std::vector<Eigen::Vector3d> positions() const {
    std::vector<Eigen::Vector3d> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.pose.translation());
    return out;
  }
};

// Cumulative path distance along the trajectory positions. distances[0] = 0.
inline std::vector<double> path_distances(const Trajectory& traj) {
  std::vector<double> dist(traj.size(), 0.0);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    dist[i] = dist[i - 1] + (traj[i].pose.translation() -
                             traj[i - 1].pose.translation())
                                .norm();
  }
  return dist;
}

namespace detail {

inline std::vector<double> split_reals(const std::string& line) {
  std::istringstream ss(line);
  std::vector<double> vals;
  double v;
  while (ss >> v) vals.push_back(v);
  return vals;
}

// Builds a pose from 12 row-major 3x4 values, re-orthonormalizing when the
// rotation has drifted. Deviations beyond warn_tol count as warnings.
inline PoseSE3 pose_from_kitti_values(const std::vector<double>& v,
                                      double warn_tol, int* warnings) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = v[r * 4 + c];
  double deviation = 0.0;
  const Eigen::Matrix3d rot = m.topLeftCorner<3, 3>();
  deviation = (rot.transpose() * rot - Eigen::Matrix3d::Identity()).norm();
  if (deviation <= PoseSE3::kRigidTol) return PoseSE3(m);
  if (warnings != nullptr && deviation > warn_tol) ++(*warnings);
  return PoseSE3::from_matrix_projected(m);
}

}  // namespace detail

// KITTI pose file: ASCII, 12 reals per nonempty line, row-major 3x4.
// Stamps are the line indices from 0. Rotations drifted beyond 1e-3 are
// counted in *reorthonormalized_warnings and repaired.
inline Trajectory load_trajectory_kitti(const std::string& path,
                                        int* reorthonormalized_warnings =
                                            nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("load_trajectory_kitti: cannot open " + path);
  Trajectory traj;
  std::string line;
  std::size_t lineno = 0;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto vals = detail::split_reals(line);
    if (vals.empty()) continue;
    if (vals.size() != 12) {
      throw FormatError("load_trajectory_kitti: line " +
                        std::to_string(lineno) + " of " + path + " has " +
                        std::to_string(vals.size()) + " fields, expected 12");
    }
    traj.push_back(static_cast<double>(index++),
                   detail::pose_from_kitti_values(vals, 1e-3,
                                                  reorthonormalized_warnings));
  }
  return traj;
}

// TUM format: "timestamp tx ty tz qx qy qz qw" per line.
inline Trajectory load_trajectory_tum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_trajectory_tum: cannot open " + path);
  Trajectory traj;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '#') continue;
    const auto vals = detail::split_reals(line);
    if (vals.empty()) continue;
    if (vals.size() != 8) {
      throw FormatError("load_trajectory_tum: line " + std::to_string(lineno) +
                        " of " + path + " has " + std::to_string(vals.size()) +
                        " fields, expected 8");
    }
    const Quaternion q =
        Quaternion(vals[7], vals[4], vals[5], vals[6]).normalized();
    traj.push_back(vals[0], PoseSE3::from_rt(q.to_rotation_matrix(),
                                             {vals[1], vals[2], vals[3]}));
  }
  return traj;
}

// Auto-detects KITTI (12 fields) vs TUM (8 fields) by the first data line.
inline Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_trajectory: cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '#') continue;
    const auto vals = detail::split_reals(line);
    if (vals.empty()) continue;
    if (vals.size() == 12) return load_trajectory_kitti(path);
    if (vals.size() == 8) return load_trajectory_tum(path);
    throw FormatError("load_trajectory: line " + std::to_string(lineno) +
                      " of " + path + " has " + std::to_string(vals.size()) +
                      " fields; expected 8 (TUM) or 12 (KITTI)");
  }
  return Trajectory{};
}

inline void save_trajectory_kitti(const std::string& path,
                                  const Trajectory& traj) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("save_trajectory_kitti: cannot open " + path);
  char buf[64];
  for (const auto& e : traj.entries) {
    const Eigen::Matrix4d& m = e.pose.matrix();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        std::snprintf(buf, sizeof(buf), "%.12e", m(r, c));
        out << buf << (r == 2 && c == 3 ? "" : " ");
      }
    }
    out << '\n';
  }
  if (!out) throw IoError("save_trajectory_kitti: write failed for " + path);
}

inline void save_trajectory_tum(const std::string& path,
                                const Trajectory& traj) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("save_trajectory_tum: cannot open " + path);
  char buf[256];
  for (const auto& e : traj.entries) {
    const Eigen::Vector3d t = e.pose.translation();
    const Quaternion q = Quaternion::from_rotation_matrix(e.pose.rotation());
    std::snprintf(buf, sizeof(buf),
                  "%.6f %.12f %.12f %.12f %.12f %.12f %.12f %.12f\n", e.stamp,
                  t.x(), t.y(), t.z(), q.x, q.y, q.z, q.w);
    out << buf;
  }
  if (!out) throw IoError("save_trajectory_tum: write failed for " + path);
}

}  // namespace lodom
