#pragma once

#include <Eigen/Core>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "lodom/error.hpp"
#include "lodom/geom.hpp"
#include "lodom/imaging.hpp"
#include "lodom/point_cloud.hpp"

namespace lodom {

static_assert(std::endian::native == std::endian::little,
              "scan decoding assumes a little-endian host");

// Decodes consecutive little-endian float32 quadruples (x, y, z, intensity).
inline PointCloud load_kitti_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_kitti_bin: cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() % 16 != 0) {
    throw FormatError("load_kitti_bin: truncated record in " + path + " (" +
                      std::to_string(bytes.size()) + " bytes)");
  }
  PointCloud cloud;
  const std::size_t n = bytes.size() / 16;
  cloud.points.reserve(n);
  cloud.intensities.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    float rec[4];
    std::memcpy(rec, bytes.data() + i * 16, 16);
    if (!std::isfinite(rec[0]) || !std::isfinite(rec[1]) ||
        !std::isfinite(rec[2])) {
      throw FormatError("load_kitti_bin: non-finite coordinate in record " +
                        std::to_string(i) + " of " + path);
    }
    cloud.points.emplace_back(rec[0], rec[1], rec[2]);
    cloud.intensities.push_back(rec[3]);
  }
  return cloud;
}

// Writes the inverse of load_kitti_bin. Coordinates are narrowed to float32;
// a cloud without intensities gets zeros.
inline void save_kitti_bin(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("save_kitti_bin: cannot open " + path);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    const float rec[4] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                          static_cast<float>(p.z()),
                          cloud.has_intensity() ? cloud.intensities[i] : 0.0f};
    out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
  }
  if (!out) throw IoError("save_kitti_bin: write failed for " + path);
}

// --- Synthetic scenes ------------------------------------------------------

// Rectangular patch of the local z = 0 plane, moved by `pose`. Extents are
// full side lengths along the local x/y axes.
struct PlanePatch {
  PoseSE3 pose;
  double extent_x_m = 1.0;
  double extent_y_m = 1.0;
};

// Axis-aligned cuboid in its local frame, moved by `pose`; expands to six
// PlanePatch faces when sampled. Size holds full edge lengths.
struct BoxSpec {
  PoseSE3 pose;
  Eigen::Vector3d size_m = Eigen::Vector3d::Ones();
};

struct SceneSpec {
  std::vector<PlanePatch> patches;
  std::vector<BoxSpec> boxes;
  double spacing_m = 0.05;
  double jitter_frac = 0.35;  // in-plane jitter, fraction of spacing
  std::uint64_t seed = 0;

  void validate() const {
    if (!(spacing_m > 0.0)) {
      throw InvalidInputError("SceneSpec: spacing must be positive");
    }
    if (!(jitter_frac >= 0.0) || jitter_frac > 0.5) {
      throw InvalidInputError("SceneSpec: jitter must lie in [0, 0.5]");
    }
    for (const auto& p : patches) {
      if (!(p.extent_x_m > 0.0) || !(p.extent_y_m > 0.0)) {
        throw InvalidInputError("SceneSpec: patch extents must be positive");
      }
    }
    for (const auto& b : boxes) {
      if (!(b.size_m.minCoeff() > 0.0)) {
        throw InvalidInputError("SceneSpec: box sizes must be positive");
      }
    }
  }
};

namespace detail {

inline int lattice_count(double extent, double spacing) {
  const int n = static_cast<int>(std::floor(extent / spacing + 1e-9));
  return n < 1 ? 1 : n;
}

// Six faces of a box as plane patches. Face rotations are axis permutations
// (exact in floating point), so sampled points satisfy the face equations
// without rounding error for axis-aligned boxes.
inline std::vector<PlanePatch> box_faces(const BoxSpec& box) {
  std::vector<PlanePatch> faces;
  for (int axis = 0; axis < 3; ++axis) {
    const int b = (axis + 1) % 3;
    const int c = (axis + 2) % 3;
    Eigen::Matrix3d r = Eigen::Matrix3d::Zero();
    r.col(0) = Eigen::Vector3d::Unit(b);
    r.col(1) = Eigen::Vector3d::Unit(c);
    r.col(2) = Eigen::Vector3d::Unit(axis);
    for (const double sign : {-1.0, 1.0}) {
      const Eigen::Vector3d t =
          sign * 0.5 * box.size_m[axis] * Eigen::Vector3d::Unit(axis);
      PlanePatch face;
      face.pose = box.pose * PoseSE3::from_rt(r, t);
      face.extent_x_m = box.size_m[b];
      face.extent_y_m = box.size_m[c];
      faces.push_back(face);
    }
  }
  return faces;
}

inline void sample_patch(const PlanePatch& patch, double spacing,
                         double jitter_frac, std::mt19937_64& rng,
                         PointCloud* out) {
  const int nx = lattice_count(patch.extent_x_m, spacing);
  const int ny = lattice_count(patch.extent_y_m, spacing);
  std::uniform_real_distribution<double> jitter(-jitter_frac * spacing,
                                                jitter_frac * spacing);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      double lx = (i + 0.5) * spacing - 0.5 * nx * spacing;
      double ly = (j + 0.5) * spacing - 0.5 * ny * spacing;
      if (jitter_frac > 0.0) {
        lx += jitter(rng);
        ly += jitter(rng);
      }
      out->points.push_back(patch.pose.apply({lx, ly, 0.0}));
    }
  }
}

}  // namespace detail

// Samples every declared surface on a jittered lattice. Deterministic for a
// fixed seed; jitter stays in-plane, so points sit on their surfaces exactly.
inline PointCloud synth_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  PointCloud cloud;
  for (const auto& patch : spec.patches) {
    detail::sample_patch(patch, spec.spacing_m, spec.jitter_frac, rng, &cloud);
  }
  for (const auto& box : spec.boxes) {
    for (const auto& face : detail::box_faces(box)) {
      detail::sample_patch(face, spec.spacing_m, spec.jitter_frac, rng,
                           &cloud);
    }
  }
  return cloud;
}

// Views a world-frame scene from `sensor_pose`: transforms into the sensor
// frame, projects, and keeps the nearest point per pixel. The result is a
// self-consistent scan (its own vertex map retains every point).
inline PointCloud simulate_scan(const PointCloud& scene,
                                const PoseSE3& sensor_pose,
                                const ProjectionConfig& cfg) {
  const PoseSE3 world_to_sensor = sensor_pose.inverse();
  const PointCloud local = transform_cloud(scene, world_to_sensor);
  return reconstruct_cloud(build_vertex_map(local, cfg));
}

// Accumulates the scans whose pose lies within window_length_m / 2 of path
// distance (cumulative translation) around the center scan, re-expressed in
// the center scan's frame.
inline PointCloud build_submap(const std::vector<PointCloud>& scans,
                               const std::vector<PoseSE3>& poses,
                               std::size_t center_index,
                               double window_length_m) {
  if (scans.empty() || scans.size() != poses.size()) {
    throw InvalidInputError("build_submap: scans and poses must be nonempty "
                            "lists of equal length");
  }
  if (center_index >= scans.size()) {
    throw InvalidInputError("build_submap: center index out of range");
  }
  if (!(window_length_m > 0.0)) {
    throw InvalidInputError("build_submap: window length must be positive");
  }

  std::vector<double> dist(poses.size(), 0.0);
  for (std::size_t i = 1; i < poses.size(); ++i) {
    dist[i] = dist[i - 1] +
              (poses[i].translation() - poses[i - 1].translation()).norm();
  }

  PointCloud submap;
  const double half = 0.5 * window_length_m;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    if (std::abs(dist[i] - dist[center_index]) > half) continue;
    const PoseSE3 rel = relative_pose(poses[center_index], poses[i]);
    for (const auto& p : scans[i].points) {
      submap.points.push_back(rel.apply(p));
    }
  }
  if (submap.empty()) {
    throw InvalidInputError("build_submap: empty selection");
  }
  return submap;
}

// --- Scene presets and the --synth mini-language ---------------------------

inline SceneSpec box_scene(const Eigen::Vector3d& size, double spacing_m,
                           std::uint64_t seed) {
  SceneSpec spec;
  BoxSpec box;
  box.size_m = size;
  spec.boxes.push_back(box);
  spec.spacing_m = spacing_m;
  spec.seed = seed;
  return spec;
}

// Scene description string: NAME(:key=value)*, where NAME is box, room,
// corridor, or plane. Keys: size=AxBxC (plane: AxB), spacing, jitter, seed,
// frames, step. Example: "corridor:size=60x8x4:spacing=0.08:frames=20".
struct SynthSpec {
  SceneSpec scene;
  int frames = 2;      // scans generated along the path
  double step_m = 1.0; // sensor advance per frame, along +x
};

namespace detail {

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = text.find(sep, start);
    if (at == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, at - start));
    start = at + 1;
  }
}

inline double parse_real(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(value)) throw std::exception();
    return value;
  } catch (...) {
    throw InvalidInputError("scene spec: bad " + what + " value '" + text +
                            "'");
  }
}

inline std::vector<double> parse_dims(const std::string& text) {
  std::vector<double> dims;
  for (const auto& part : split(text, 'x')) {
    dims.push_back(parse_real(part, "size"));
  }
  return dims;
}

}  // namespace detail

inline SynthSpec parse_scene_spec(const std::string& text) {
  const auto parts = detail::split(text, ':');
  const std::string& name = parts.front();

  SynthSpec synth;
  std::vector<double> dims;
  if (name == "box" || name == "room") {
    dims = {20.0, 20.0, 4.0};
  } else if (name == "corridor") {
    dims = {50.0, 8.0, 4.0};
  } else if (name == "plane") {
    dims = {40.0, 40.0};
  } else {
    throw InvalidInputError("scene spec: unknown scene '" + name + "'");
  }

  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto kv = detail::split(parts[i], '=');
    if (kv.size() != 2 || kv[0].empty()) {
      throw InvalidInputError("scene spec: expected key=value, got '" +
                              parts[i] + "'");
    }
    const std::string& key = kv[0];
    const std::string& value = kv[1];
    if (key == "size") {
      dims = detail::parse_dims(value);
    } else if (key == "spacing") {
      synth.scene.spacing_m = detail::parse_real(value, "spacing");
    } else if (key == "jitter") {
      synth.scene.jitter_frac = detail::parse_real(value, "jitter");
    } else if (key == "seed") {
      synth.scene.seed =
          static_cast<std::uint64_t>(detail::parse_real(value, "seed"));
    } else if (key == "frames") {
      synth.frames = static_cast<int>(detail::parse_real(value, "frames"));
      if (synth.frames < 1) {
        throw InvalidInputError("scene spec: frames must be at least 1");
      }
    } else if (key == "step") {
      synth.step_m = detail::parse_real(value, "step");
    } else {
      throw InvalidInputError("scene spec: unknown key '" + key + "'");
    }
  }

  if (name == "plane") {
    if (dims.size() != 2) {
      throw InvalidInputError("scene spec: plane size must be AxB");
    }
    PlanePatch patch;
    patch.pose = PoseSE3::from_rt(Eigen::Matrix3d::Identity(),
                                  Eigen::Vector3d(0.0, 0.0, -2.0));
    patch.extent_x_m = dims[0];
    patch.extent_y_m = dims[1];
    synth.scene.patches.push_back(patch);
  } else {
    if (dims.size() != 3) {
      throw InvalidInputError("scene spec: box size must be AxBxC");
    }
    BoxSpec box;
    box.size_m = Eigen::Vector3d(dims[0], dims[1], dims[2]);
    synth.scene.boxes.push_back(box);
  }
  synth.scene.validate();
  return synth;
}

}  // namespace lodom
