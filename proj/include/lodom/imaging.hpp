#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "lodom/error.hpp"
#include "lodom/geom.hpp"
#include "lodom/point_cloud.hpp"

namespace lodom {

// Spherical image geometry. Angles in degrees; the grid must tile the FOV
// exactly (integral width and height).
struct ProjectionConfig {
  double fov_h_deg = 360.0;   // full horizontal (azimuth) FOV
  double fov_up_deg = 2.0;    // vertical FOV above the horizon
  double fov_down_deg = 24.0; // vertical FOV below the horizon
  double res_h_deg = 0.5;     // horizontal resolution, deg/pixel
  double res_v_deg = 0.5;     // vertical resolution, deg/pixel
  double min_depth_m = 0.5;   // sensor blind zone, planar depth

  static ProjectionConfig kitti() { return ProjectionConfig{}; }

  double fov_v_deg() const { return fov_up_deg + fov_down_deg; }

  int width() const {
    return static_cast<int>(std::lround(fov_h_deg / res_h_deg));
  }
  int height() const {
    return static_cast<int>(std::lround(fov_v_deg() / res_v_deg));
  }

  // The image covers the full circle, so column indices wrap.
  bool wraps_horizontally() const { return fov_h_deg >= 360.0 - 1e-9; }

  void validate() const {
    if (!(fov_h_deg > 0.0) || !(fov_up_deg + fov_down_deg > 0.0) ||
        !(res_h_deg > 0.0) || !(res_v_deg > 0.0) || !(min_depth_m >= 0.0)) {
      throw InvalidInputError("ProjectionConfig: fields must be positive");
    }
    if (fov_h_deg > 360.0 + 1e-9) {
      throw InvalidInputError("ProjectionConfig: horizontal FOV over 360 deg");
    }
    const double w = fov_h_deg / res_h_deg;
    const double h = fov_v_deg() / res_v_deg;
    if (std::abs(w - std::lround(w)) > 1e-6 ||
        std::abs(h - std::lround(h)) > 1e-6) {
      throw InvalidInputError(
          "ProjectionConfig: resolutions must tile the FOV into whole pixels");
    }
  }
};

struct PixelCoord {
  int u = 0;
  int v = 0;
  double depth = 0.0;  // planar depth sqrt(x^2 + y^2)
};

// Spherical projection of a point onto the image plane:
//   u = floor((f_h/2 - azimuth) / res_h)    (wrapped when FOV is 360 deg)
//   v = floor((f_vu - elevation) / res_v)
// Returns nullopt when the point leaves the image or sits inside the
// blind zone.
inline std::optional<PixelCoord> project_point(const Eigen::Vector3d& p,
                                               const ProjectionConfig& cfg) {
  if (!p.allFinite()) return std::nullopt;
  const double d = std::sqrt(p.x() * p.x() + p.y() * p.y());
  if (d < cfg.min_depth_m) return std::nullopt;

  const int w = cfg.width();
  const int h = cfg.height();
  const double az = rad2deg(std::atan2(p.y(), p.x()));
  const double el = rad2deg(std::atan2(p.z(), d));

  int u = static_cast<int>(std::floor((cfg.fov_h_deg / 2.0 - az) /
                                      cfg.res_h_deg));
  if (cfg.wraps_horizontally()) {
    u = ((u % w) + w) % w;
  } else if (u < 0 || u >= w) {
    return std::nullopt;
  }

  const int v =
      static_cast<int>(std::floor((cfg.fov_up_deg - el) / cfg.res_v_deg));
  if (v < 0 || v >= h) return std::nullopt;

  return PixelCoord{u, v, d};
}

// Image-grid representation storing, per pixel, the exact coordinates of the
// nearest projecting point. No quantization: stored vertices are the input
// doubles, so reconstruction is lossless.
class VertexMap {
 public:
  struct Cell {
    Eigen::Vector3d vertex = Eigen::Vector3d::Zero();
    double depth = 0.0;
    bool valid = false;
  };

  VertexMap() = default;
  explicit VertexMap(const ProjectionConfig& cfg)
      : cfg_(cfg), w_(cfg.width()), h_(cfg.height()), cells_(w_ * h_) {}

  const ProjectionConfig& config() const { return cfg_; }
  int width() const { return w_; }
  int height() const { return h_; }

  const Cell& at(int u, int v) const { return cells_[v * w_ + u]; }
  Cell& at(int u, int v) { return cells_[v * w_ + u]; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (const auto& c : cells_) n += c.valid ? 1 : 0;
    return n;
  }

 private:
  ProjectionConfig cfg_;
  int w_ = 0;
  int h_ = 0;
  std::vector<Cell> cells_;
};

// Companion grid of unit normals; valid only where the vertex map is valid
// and enough neighbors pass the depth-gap filter.
class NormalMap {
 public:
  struct Cell {
    Eigen::Vector3d normal = Eigen::Vector3d::Zero();
    bool valid = false;
  };

  NormalMap() = default;
  NormalMap(int w, int h) : w_(w), h_(h), cells_(w * h) {}

  int width() const { return w_; }
  int height() const { return h_; }

  const Cell& at(int u, int v) const { return cells_[v * w_ + u]; }
  Cell& at(int u, int v) { return cells_[v * w_ + u]; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (const auto& c : cells_) n += c.valid ? 1 : 0;
    return n;
  }

 private:
  int w_ = 0;
  int h_ = 0;
  std::vector<Cell> cells_;
};

// Sequential nearest-point reduction: a pixel keeps the smallest-depth point,
// ties resolving to the earliest point in input order.
inline VertexMap build_vertex_map(const PointCloud& cloud,
                                  const ProjectionConfig& cfg) {
  cfg.validate();
  VertexMap map(cfg);
  for (const auto& p : cloud.points) {
    const auto px = project_point(p, cfg);
    if (!px) continue;
    auto& cell = map.at(px->u, px->v);
    if (!cell.valid || px->depth < cell.depth) {
      cell.vertex = p;
      cell.depth = px->depth;
      cell.valid = true;
    }
  }
  return map;
}

namespace detail {

// Picks a tangent along one image axis from the two opposing neighbors,
// skipping invalid neighbors and depth gaps. `du, dv` select the axis.
inline bool tangent_along_axis(const VertexMap& map, int u, int v, int du,
                               int dv, double gap_m, Eigen::Vector3d* out) {
  const int w = map.width();
  const int h = map.height();
  const bool wrap = map.config().wraps_horizontally();
  const auto& center = map.at(u, v);

  const auto neighbor = [&](int step) -> const VertexMap::Cell* {
    int nu = u + du * step;
    int nv = v + dv * step;
    if (dv == 0 && wrap) nu = ((nu % w) + w) % w;
    if (nu < 0 || nu >= w || nv < 0 || nv >= h) return nullptr;
    const auto& c = map.at(nu, nv);
    if (!c.valid || std::abs(c.depth - center.depth) > gap_m) return nullptr;
    return &c;
  };

  if (const auto* plus = neighbor(+1)) {
    *out = plus->vertex - center.vertex;
    return true;
  }
  if (const auto* minus = neighbor(-1)) {
    *out = center.vertex - minus->vertex;
    return true;
  }
  return false;
}

}  // namespace detail

// Cross product of the 4-neighborhood tangents, oriented toward the sensor
// (n . v < 0). Neighbors further than gap_threshold_m in depth are treated
// as missing; a pixel without a usable tangent on each axis stays invalid.
inline NormalMap build_normal_map(const VertexMap& vmap,
                                  double gap_threshold_m = 0.5) {
  NormalMap nmap(vmap.width(), vmap.height());
  for (int v = 0; v < vmap.height(); ++v) {
    for (int u = 0; u < vmap.width(); ++u) {
      const auto& center = vmap.at(u, v);
      if (!center.valid) continue;
      Eigen::Vector3d horiz, vert;
      if (!detail::tangent_along_axis(vmap, u, v, 1, 0, gap_threshold_m,
                                      &horiz) ||
          !detail::tangent_along_axis(vmap, u, v, 0, 1, gap_threshold_m,
                                      &vert)) {
        continue;
      }
      Eigen::Vector3d n = horiz.cross(vert);
      const double len = n.norm();
      if (len < 1e-12) continue;
      n /= len;
      if (n.dot(center.vertex) > 0.0) n = -n;
      auto& cell = nmap.at(u, v);
      cell.normal = n;
      cell.valid = true;
    }
  }
  return nmap;
}

// Paired vertex and normal maps built from one point cloud.
struct Frame {
  VertexMap vertex_map;
  NormalMap normal_map;

  const ProjectionConfig& config() const { return vertex_map.config(); }
};

inline Frame build_frame(const PointCloud& cloud, const ProjectionConfig& cfg,
                         double gap_threshold_m = 0.5) {
  Frame f;
  f.vertex_map = build_vertex_map(cloud, cfg);
  f.normal_map = build_normal_map(f.vertex_map, gap_threshold_m);
  return f;
}

// Exact stored vertices of all valid pixels, in pixel-scan order.
inline PointCloud reconstruct_cloud(const VertexMap& vmap) {
  PointCloud out;
  out.points.reserve(vmap.valid_count());
  for (int v = 0; v < vmap.height(); ++v) {
    for (int u = 0; u < vmap.width(); ++u) {
      const auto& cell = vmap.at(u, v);
      if (cell.valid) out.points.push_back(cell.vertex);
    }
  }
  return out;
}

// Baseline representation for comparison: stores only the scalar range per
// pixel and reconstructs along the pixel-center ray. Reconstruction error is
// bounded by r * (resolution in radians) per point.
inline PointCloud range_map_roundtrip(const PointCloud& cloud,
                                      const ProjectionConfig& cfg) {
  cfg.validate();
  const int w = cfg.width();
  const int h = cfg.height();
  std::vector<double> range(static_cast<std::size_t>(w) * h, -1.0);
  std::vector<double> depth(static_cast<std::size_t>(w) * h, 0.0);
  for (const auto& p : cloud.points) {
    const auto px = project_point(p, cfg);
    if (!px) continue;
    auto& cell_depth = depth[px->v * w + px->u];
    auto& cell_range = range[px->v * w + px->u];
    if (cell_range < 0.0 || px->depth < cell_depth) {
      cell_depth = px->depth;
      cell_range = p.norm();
    }
  }

  PointCloud out;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double r = range[v * w + u];
      if (r < 0.0) continue;
      const double az =
          deg2rad(cfg.fov_h_deg / 2.0 - (u + 0.5) * cfg.res_h_deg);
      const double el = deg2rad(cfg.fov_up_deg - (v + 0.5) * cfg.res_v_deg);
      out.points.emplace_back(r * std::cos(el) * std::cos(az),
                              r * std::cos(el) * std::sin(az),
                              r * std::sin(el));
    }
  }
  return out;
}

// --- Debug dumps ---------------------------------------------------------
//
// PPM dumps are 8-bit binary RGB (P6). Vertex maps scale each coordinate by
// the maximum absolute coordinate s over valid pixels: byte = 128 + 127*c/s,
// rounded. Normal maps map the unit components directly: byte = 128 + 127*n.
// Valid pixels use bytes in [1, 255]; pure black marks invalid pixels.
// The CSV dumps are lossless.

namespace detail {

inline unsigned char scale_byte(double value, double scale) {
  const double b =
      std::lround(128.0 + 127.0 * (scale > 0.0 ? value / scale : 0.0));
  return static_cast<unsigned char>(std::clamp(b, 1.0, 255.0));
}

inline void write_ppm(const std::string& path, int w, int h,
                      const std::vector<unsigned char>& rgb) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("write_ppm: cannot open " + path);
  out << "P6\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()),
            static_cast<std::streamsize>(rgb.size()));
  if (!out) throw IoError("write_ppm: write failed for " + path);
}

}  // namespace detail

inline void write_vertex_map_ppm(const std::string& path,
                                 const VertexMap& vmap) {
  double scale = 0.0;
  for (int v = 0; v < vmap.height(); ++v)
    for (int u = 0; u < vmap.width(); ++u)
      if (vmap.at(u, v).valid)
        scale = std::max(scale, vmap.at(u, v).vertex.cwiseAbs().maxCoeff());
  std::vector<unsigned char> rgb(
      static_cast<std::size_t>(vmap.width()) * vmap.height() * 3, 0);
  for (int v = 0; v < vmap.height(); ++v) {
    for (int u = 0; u < vmap.width(); ++u) {
      const auto& cell = vmap.at(u, v);
      if (!cell.valid) continue;
      const std::size_t i = (static_cast<std::size_t>(v) * vmap.width() + u) * 3;
      for (int c = 0; c < 3; ++c)
        rgb[i + c] = detail::scale_byte(cell.vertex[c], scale);
    }
  }
  detail::write_ppm(path, vmap.width(), vmap.height(), rgb);
}

inline void write_normal_map_ppm(const std::string& path,
                                 const NormalMap& nmap) {
  std::vector<unsigned char> rgb(
      static_cast<std::size_t>(nmap.width()) * nmap.height() * 3, 0);
  for (int v = 0; v < nmap.height(); ++v) {
    for (int u = 0; u < nmap.width(); ++u) {
      const auto& cell = nmap.at(u, v);
      if (!cell.valid) continue;
      const std::size_t i = (static_cast<std::size_t>(v) * nmap.width() + u) * 3;
      for (int c = 0; c < 3; ++c)
        rgb[i + c] = detail::scale_byte(cell.normal[c], 1.0);
    }
  }
  detail::write_ppm(path, nmap.width(), nmap.height(), rgb);
}

inline void write_vertex_map_csv(const std::string& path,
                                 const VertexMap& vmap) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_vertex_map_csv: cannot open " + path);
  out << "u,v,x,y,z\n";
  char buf[160];
  for (int v = 0; v < vmap.height(); ++v) {
    for (int u = 0; u < vmap.width(); ++u) {
      const auto& cell = vmap.at(u, v);
      if (!cell.valid) continue;
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", u, v,
                    cell.vertex.x(), cell.vertex.y(), cell.vertex.z());
      out << buf;
    }
  }
  if (!out) throw IoError("write_vertex_map_csv: write failed for " + path);
}

inline void write_normal_map_csv(const std::string& path,
                                 const NormalMap& nmap) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_normal_map_csv: cannot open " + path);
  out << "u,v,nx,ny,nz\n";
  char buf[160];
  for (int v = 0; v < nmap.height(); ++v) {
    for (int u = 0; u < nmap.width(); ++u) {
      const auto& cell = nmap.at(u, v);
      if (!cell.valid) continue;
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g\n", u, v,
                    cell.normal.x(), cell.normal.y(), cell.normal.z());
      out << buf;
    }
  }
  if (!out) throw IoError("write_normal_map_csv: write failed for " + path);
}

}  // namespace lodom
