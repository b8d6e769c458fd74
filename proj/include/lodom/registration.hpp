#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>
#include <cstddef>
#include <optional>

#include "lodom/error.hpp"
#include "lodom/geom.hpp"
#include "lodom/imaging.hpp"

namespace lodom {

// One projective match: a source point, its transform into the target frame,
// and the target vertex/normal found at the pixel it lands in.
struct Correspondence {
  Eigen::Vector3d source = Eigen::Vector3d::Zero();       // v in source frame
  Eigen::Vector3d transformed = Eigen::Vector3d::Zero();  // T * v
  Eigen::Vector3d target = Eigen::Vector3d::Zero();       // matched vertex
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();       // matched normal
};

// Balancing scales for the combined losses. The homoscedastic form
// L*exp(-s) + s leaves these as explicit, finite inputs.
struct LossScales {
  double s_icp = -3.0;
  double s_fov = -3.0;
  double s_t = -3.0;
  double s_r = -3.0;

  void validate() const {
    if (!std::isfinite(s_icp) || !std::isfinite(s_fov) ||
        !std::isfinite(s_t) || !std::isfinite(s_r)) {
      throw InvalidInputError("LossScales: scales must be finite");
    }
  }
};

// Relative motion split into translation + unit quaternion, convertible to
// and from a rigid pose.
struct RelativeMotion {
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  Quaternion q = Quaternion::identity();

  static RelativeMotion from_pose(const PoseSE3& pose) {
    return {pose.translation(), Quaternion::from_rotation_matrix(pose.rotation())};
  }

  PoseSE3 to_pose() const { return PoseSE3::from_rt(q.normalized(), t); }
};

// Projective data association: transform the source point into the target
// frame, project it, and read the target map at that pixel. Fails when the
// projection leaves the image or the pixel lacks a vertex or normal.
inline std::optional<Correspondence> associate(const Frame& target_frame,
                                               const Eigen::Vector3d& source,
                                               const PoseSE3& transform) {
  Correspondence corr;
  corr.source = source;
  corr.transformed = transform.apply(source);
  const auto px = project_point(corr.transformed, target_frame.config());
  if (!px) return std::nullopt;
  const auto& vcell = target_frame.vertex_map.at(px->u, px->v);
  const auto& ncell = target_frame.normal_map.at(px->u, px->v);
  if (!vcell.valid || !ncell.valid) return std::nullopt;
  corr.target = vcell.vertex;
  corr.normal = ncell.normal;
  return corr;
}

struct IcpLossResult {
  double loss = 0.0;           // sum of absolute point-to-plane distances, m
  double mean_residual = 0.0;  // loss / n_corr (0 when no correspondences)
  std::size_t n_corr = 0;
};

// Sum of absolute normal distances |n . (T*v - target)| over all source
// vertices that associate, accumulated in pixel-scan order of the source map
// so repeated evaluations are bit-identical.
inline IcpLossResult icp_loss(const Frame& target_frame,
                              const VertexMap& source_map,
                              const PoseSE3& transform) {
  IcpLossResult result;
  for (int v = 0; v < source_map.height(); ++v) {
    for (int u = 0; u < source_map.width(); ++u) {
      const auto& cell = source_map.at(u, v);
      if (!cell.valid) continue;
      const auto corr = associate(target_frame, cell.vertex, transform);
      if (!corr) continue;
      result.loss +=
          std::abs(corr->normal.dot(corr->transformed - corr->target));
      ++result.n_corr;
    }
  }
  if (result.n_corr > 0) {
    result.mean_residual = result.loss / static_cast<double>(result.n_corr);
  }
  return result;
}

// Hard count of source vertices whose transform projects outside the image
// (horizontal bounds, vertical bounds, or blind zone), once per point.
inline std::size_t fov_loss(const VertexMap& source_map,
                            const PoseSE3& transform,
                            const ProjectionConfig& cfg) {
  std::size_t count = 0;
  for (int v = 0; v < source_map.height(); ++v) {
    for (int u = 0; u < source_map.width(); ++u) {
      const auto& cell = source_map.at(u, v);
      if (!cell.valid) continue;
      if (!project_point(transform.apply(cell.vertex), cfg)) ++count;
    }
  }
  return count;
}

// Combined geometric loss with learnable-style balancing:
// L_icp*exp(-s_icp) + s_icp + L_fov*exp(-s_fov) + s_fov.
inline double unsupervised_loss(double l_icp, double l_fov,
                                const LossScales& scales) {
  scales.validate();
  if (!std::isfinite(l_icp) || !std::isfinite(l_fov)) {
    throw InvalidInputError("unsupervised_loss: losses must be finite");
  }
  return l_icp * std::exp(-scales.s_icp) + scales.s_icp +
         l_fov * std::exp(-scales.s_fov) + scales.s_fov;
}

// Pose-supervision loss: L1 translation error (m) plus L1 error of the
// Euler-angle triples (deg, per-axis wrapped to [-180, 180]), each balanced
// by its scale. The Euler conversion absorbs the quaternion double cover.
inline double supervised_loss(const RelativeMotion& pred,
                              const RelativeMotion& gt,
                              const LossScales& scales) {
  scales.validate();
  const double l_t = (pred.t - gt.t).lpNorm<1>();
  const EulerDeg ep = quat_to_euler(pred.q);
  const EulerDeg eg = quat_to_euler(gt.q);
  const double l_r = std::abs(wrap_deg(ep.rx - eg.rx)) +
                     std::abs(wrap_deg(ep.ry - eg.ry)) +
                     std::abs(wrap_deg(ep.rz - eg.rz));
  return l_t * std::exp(-scales.s_t) + scales.s_t +
         l_r * std::exp(-scales.s_r) + scales.s_r;
}

struct ResidualJacobian {
  double residual = 0.0;                 // n . (T*v - target), signed, m
  Eigen::Matrix<double, 1, 6> jacobian;  // d r / d(twist), translation first
};

// Analytic derivative of the point-to-plane residual with respect to a
// left-multiplied twist perturbation exp(d) * T:
//   dr/d(rho) = n,  dr/d(omega) = (T*v) x n.
inline ResidualJacobian icp_residual_jacobian(const Correspondence& corr,
                                              const PoseSE3& transform) {
  ResidualJacobian out;
  const Eigen::Vector3d moved = transform.apply(corr.source);
  out.residual = corr.normal.dot(moved - corr.target);
  out.jacobian.leftCols<3>() = corr.normal.transpose();
  out.jacobian.rightCols<3>() = moved.cross(corr.normal).transpose();
  return out;
}

}  // namespace lodom
