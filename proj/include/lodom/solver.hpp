#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "lodom/error.hpp"
#include "lodom/geom.hpp"
#include "lodom/imaging.hpp"
#include "lodom/registration.hpp"
#include "lodom/trajectory.hpp"

namespace lodom {

enum class InitMode { kIdentity, kConstantVelocity, kFixedForward };

struct SolverOptions {
  int max_iterations = 30;
  double tolerance = 1e-6;          // convergence threshold on |twist update|
  double lambda0 = 1e-4;            // Levenberg damping (x10 reject, /10 accept)
  std::size_t min_correspondences = 100;
  double fov_reject_fraction = 0.5; // reject steps pushing this fraction out
  InitMode init_mode = InitMode::kConstantVelocity;
  double fixed_forward_distance_m = 1.0;
  double max_step_translation_m = 2.0;
  double max_step_rotation_deg = 10.0;

  void validate() const {
    if (max_iterations < 1 || !(tolerance > 0.0) || !(lambda0 > 0.0) ||
        min_correspondences == 0 || !(fov_reject_fraction > 0.0) ||
        !(fixed_forward_distance_m >= 0.0) ||
        !(max_step_translation_m > 0.0) || !(max_step_rotation_deg > 0.0)) {
      throw InvalidInputError("SolverOptions: fields must be positive");
    }
  }
};

struct SolveStats {
  int iterations = 0;
  double final_loss = 0.0;      // sum of absolute normal distances, m
  double mean_residual = 0.0;   // final_loss / n_corr
  std::size_t n_corr = 0;
  std::size_t fov_count = 0;
  bool converged = false;
};

struct SolveResult {
  PoseSE3 transform;
  SolveStats stats;
};

namespace detail {

struct NormalEquations {
  Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
  double squared_sum = 0.0;
  std::size_t n_corr = 0;

  double mean_squared() const {
    return n_corr > 0 ? squared_sum / static_cast<double>(n_corr)
                      : std::numeric_limits<double>::infinity();
  }
};

inline NormalEquations build_normal_equations(
    const Frame& target, const std::vector<Eigen::Vector3d>& source,
    const PoseSE3& transform) {
  NormalEquations eq;
  for (const auto& point : source) {
    const auto corr = associate(target, point, transform);
    if (!corr) continue;
    const auto rj = icp_residual_jacobian(*corr, transform);
    eq.h.noalias() += rj.jacobian.transpose() * rj.jacobian;
    eq.g.noalias() += rj.jacobian.transpose() * rj.residual;
    eq.squared_sum += rj.residual * rj.residual;
    ++eq.n_corr;
  }
  return eq;
}

// Mean squared point-to-plane distance at a candidate pose (for step
// acceptance under re-association).
inline std::pair<double, std::size_t> mean_squared_at(
    const Frame& target, const std::vector<Eigen::Vector3d>& source,
    const PoseSE3& transform) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& point : source) {
    const auto corr = associate(target, point, transform);
    if (!corr) continue;
    const double r = corr->normal.dot(corr->transformed - corr->target);
    sum += r * r;
    ++n;
  }
  return {n > 0 ? sum / static_cast<double>(n)
                : std::numeric_limits<double>::infinity(),
          n};
}

inline std::vector<Eigen::Vector3d> valid_vertices(const VertexMap& map) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(map.valid_count());
  for (int v = 0; v < map.height(); ++v) {
    for (int u = 0; u < map.width(); ++u) {
      if (map.at(u, v).valid) out.push_back(map.at(u, v).vertex);
    }
  }
  return out;
}

}  // namespace detail

// Minimizes the squared point-to-plane objective over SE(3) with damped
// Gauss-Newton, re-associating at every step. Steps are rejected when the
// mean squared residual increases or too many points leave the target FOV;
// accepted updates left-multiply via the exponential map.
inline SolveResult estimate_relative_pose(const Frame& target,
                                          const Frame& source,
                                          const PoseSE3& init,
                                          const SolverOptions& opts = {}) {
  opts.validate();
  const std::vector<Eigen::Vector3d> points =
      detail::valid_vertices(source.vertex_map);

  {
    const auto [mean0, n0] = detail::mean_squared_at(target, points, init);
    (void)mean0;
    if (n0 < opts.min_correspondences) {
      throw InsufficientOverlapError(
          "estimate_relative_pose: " + std::to_string(n0) +
          " correspondences at initialization (minimum " +
          std::to_string(opts.min_correspondences) + ")");
    }
  }

  const std::size_t fov_limit = static_cast<std::size_t>(
      opts.fov_reject_fraction * static_cast<double>(points.size()));
  const double max_rot_rad = deg2rad(opts.max_step_rotation_deg);

  PoseSE3 current = init;
  double lambda = opts.lambda0;
  SolveStats stats;

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    stats.iterations = iter;
    const auto eq = detail::build_normal_equations(target, points, current);
    if (!eq.h.allFinite() || !eq.g.allFinite()) {
      throw NumericalError(
          "estimate_relative_pose: non-finite normal equations");
    }
    if (eq.n_corr == 0) break;

    Eigen::Matrix<double, 6, 6> damped = eq.h;
    damped.diagonal() += lambda * eq.h.diagonal();
    Twist delta = damped.ldlt().solve(-eq.g);
    if (!delta.allFinite()) {
      lambda *= 10.0;
      continue;
    }

    // Trust region: scale the whole step so the translation part stays
    // under the cap and the rotation part under the angle cap.
    double scale = 1.0;
    const double t_norm = delta.head<3>().norm();
    const double w_norm = delta.tail<3>().norm();
    if (t_norm > opts.max_step_translation_m) {
      scale = std::min(scale, opts.max_step_translation_m / t_norm);
    }
    if (w_norm > max_rot_rad) {
      scale = std::min(scale, max_rot_rad / w_norm);
    }
    delta *= scale;

    if (delta.norm() < opts.tolerance) {
      stats.converged = true;
      break;
    }

    const PoseSE3 candidate = se3_exp(delta) * current;
    const auto [cand_mean, cand_n] =
        detail::mean_squared_at(target, points, candidate);
    const bool fov_ok =
        fov_loss(source.vertex_map, candidate, target.config()) <= fov_limit;
    if (cand_mean <= eq.mean_squared() && cand_n > 0 && fov_ok) {
      current = candidate;
      lambda /= 10.0;
    } else {
      lambda *= 10.0;
    }
  }

  const auto final_loss = icp_loss(target, source.vertex_map, current);
  stats.final_loss = final_loss.loss;
  stats.mean_residual = final_loss.mean_residual;
  stats.n_corr = final_loss.n_corr;
  stats.fov_count = fov_loss(source.vertex_map, current, target.config());
  return {current, stats};
}

struct PairLog {
  SolveStats stats;
  PoseSE3 relative;
  bool fell_back = false;
};

struct OdometryResult {
  Trajectory trajectory;
  std::vector<PairLog> pairs;
};

// Chains pairwise estimates into a trajectory starting at the identity.
// Initialization follows opts.init_mode; a failed pair falls back to its
// initialization motion and is flagged rather than aborting the run.
// Streaming core: frame_at(i) is called once per index in increasing order
// and only two frames are held at a time, so arbitrarily long sequences run
// in constant memory.
inline OdometryResult run_odometry(
    std::size_t n_frames, const std::function<Frame(std::size_t)>& frame_at,
    const SolverOptions& opts = {}) {
  opts.validate();
  if (n_frames == 0) {
    throw InvalidInputError("run_odometry: no frames");
  }

  OdometryResult result;
  PoseSE3 pose;
  result.trajectory.push_back(0.0, pose);
  PoseSE3 previous_rel;

  Frame current = frame_at(0);
  for (std::size_t k = 0; k + 1 < n_frames; ++k) {
    Frame next = frame_at(k + 1);
    PoseSE3 init;
    switch (opts.init_mode) {
      case InitMode::kIdentity:
        break;
      case InitMode::kConstantVelocity:
        init = previous_rel;
        break;
      case InitMode::kFixedForward:
        init = PoseSE3::from_rt(
            Quaternion::identity(),
            Eigen::Vector3d(opts.fixed_forward_distance_m, 0.0, 0.0));
        break;
    }

    PairLog log;
    try {
      const SolveResult solved =
          estimate_relative_pose(current, next, init, opts);
      log.stats = solved.stats;
      log.relative = solved.transform;
    } catch (const Error&) {
      log.relative = init;
      log.fell_back = true;
    }

    pose = pose * log.relative;
    result.trajectory.push_back(static_cast<double>(k + 1), pose);
    previous_rel = log.relative;
    result.pairs.push_back(log);
    current = std::move(next);
  }
  return result;
}

inline OdometryResult run_odometry(const std::vector<Frame>& frames,
                                   const SolverOptions& opts = {}) {
  return run_odometry(
      frames.size(), [&frames](std::size_t i) { return frames[i]; }, opts);
}

}  // namespace lodom
