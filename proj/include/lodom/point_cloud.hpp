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

// Unordered set of 3D points in a sensor/robot frame, meters. Intensity is
// carried through loading when present and ignored by the geometric pipeline.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<float> intensities;  // empty, or one entry per point

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_intensity() const { return !intensities.empty(); }
};

inline PointCloud transform_cloud(const PointCloud& cloud,
                                  const PoseSE3& pose) {
  PointCloud out;
  out.points.reserve(cloud.size());
  const Eigen::Matrix3d r = pose.rotation();
  const Eigen::Vector3d t = pose.translation();
  for (const auto& p : cloud.points) out.points.push_back(r * p + t);
  out.intensities = cloud.intensities;
  return out;
}

// Generic interchange format: ASCII CSV, "x,y,z" one point per line.
inline void save_cloud_csv(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("save_cloud_csv: cannot open " + path);
  char line[128];
  for (const auto& p : cloud.points) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", p.x(), p.y(),
                  p.z());
    out << line;
  }
  if (!out) throw IoError("save_cloud_csv: write failed for " + path);
}

inline PointCloud load_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_cloud_csv: cannot open " + path);
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double x, y, z;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &z) != 3) {
      throw FormatError("load_cloud_csv: bad line " + std::to_string(lineno) +
                        " in " + path + ": " + line);
    }
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw FormatError("load_cloud_csv: non-finite point at line " +
                        std::to_string(lineno) + " in " + path);
    }
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

}  // namespace lodom
