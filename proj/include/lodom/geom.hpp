#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>

#include "lodom/error.hpp"

namespace lodom {

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle in degrees to (-180, 180].
inline double wrap_deg(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

// Unit quaternion, scalar-first storage. q and -q encode the same rotation.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Quaternion() = default;
  Quaternion(double w_, double x_, double y_, double z_)
      : w(w_), x(x_), y(y_), z(z_) {}

  static Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quaternion normalized() const {
    const double n = norm();
    if (!(n > 1e-12)) {
      throw InvalidInputError("Quaternion::normalized: zero-norm quaternion");
    }
    return {w / n, x / n, y / n, z / n};
  }

  Quaternion conjugate() const { return {w, -x, -y, -z}; }

  // Hamilton product.
  Quaternion operator*(const Quaternion& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }

  // Rotation matrix of a unit quaternion. Every entry is a sum of
  // two-factor products, so R(q) == R(-q) bit-for-bit.
  Eigen::Matrix3d to_rotation_matrix() const {
    Eigen::Matrix3d r;
    r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),  //
        2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),  //
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y);
    return r;
  }

  // Shepperd's method: branch on the largest of trace and diagonal entries.
  static Quaternion from_rotation_matrix(const Eigen::Matrix3d& r) {
    Quaternion q;
    const double tr = r.trace();
    if (tr > 0.0) {
      double s = std::sqrt(tr + 1.0) * 2.0;
      q.w = 0.25 * s;
      q.x = (r(2, 1) - r(1, 2)) / s;
      q.y = (r(0, 2) - r(2, 0)) / s;
      q.z = (r(1, 0) - r(0, 1)) / s;
    } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
      double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
      q.w = (r(2, 1) - r(1, 2)) / s;
      q.x = 0.25 * s;
      q.y = (r(0, 1) + r(1, 0)) / s;
      q.z = (r(0, 2) + r(2, 0)) / s;
    } else if (r(1, 1) > r(2, 2)) {
      double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
      q.w = (r(0, 2) - r(2, 0)) / s;
      q.x = (r(0, 1) + r(1, 0)) / s;
      q.y = 0.25 * s;
      q.z = (r(1, 2) + r(2, 1)) / s;
    } else {
      double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
      q.w = (r(1, 0) - r(0, 1)) / s;
      q.x = (r(0, 2) + r(2, 0)) / s;
      q.y = (r(1, 2) + r(2, 1)) / s;
      q.z = 0.25 * s;
    }
    return q.normalized();
  }
};

// Euler angles in degrees, intrinsic Z-Y-X (yaw-pitch-roll).
// Canonical ranges: rx, rz in [-180, 180], ry in [-90, 90].
struct EulerDeg {
  double rx = 0.0;  // roll, about x
  double ry = 0.0;  // pitch, about y
  double rz = 0.0;  // yaw, about z
};

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return s;
}

// Rigid transform as a 4x4 homogeneous matrix. Construction validates the
// rotation block; the last row is always exactly (0, 0, 0, 1).
class PoseSE3 {
 public:
  static constexpr double kRigidTol = 1e-9;

  PoseSE3() : m_(Eigen::Matrix4d::Identity()) {}

  explicit PoseSE3(const Eigen::Matrix4d& m) : m_(m) {
    m_.row(3) << 0.0, 0.0, 0.0, 1.0;
    validate_rotation(rotation());
  }

  static PoseSE3 from_rt(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = r;
    m.topRightCorner<3, 1>() = t;
    return PoseSE3(m);
  }

  static PoseSE3 from_rt(const Quaternion& q, const Eigen::Vector3d& t) {
    return from_rt(q.to_rotation_matrix(), t);
  }

  // Replaces the rotation block with the nearest rotation matrix (SVD
  // projection). Returns the Frobenius deviation R'R - I of the input.
  static PoseSE3 from_matrix_projected(const Eigen::Matrix4d& m,
                                       double* deviation = nullptr) {
    const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
    if (deviation != nullptr) {
      *deviation = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(
        r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant();
    const Eigen::Matrix3d fixed =
        svd.matrixU() * d * svd.matrixV().transpose();
    return from_rt(fixed, m.topRightCorner<3, 1>());
  }

  const Eigen::Matrix4d& matrix() const { return m_; }
  Eigen::Matrix3d rotation() const { return m_.topLeftCorner<3, 3>(); }
  Eigen::Vector3d translation() const { return m_.topRightCorner<3, 1>(); }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return m_.topLeftCorner<3, 3>() * p + m_.topRightCorner<3, 1>();
  }

  PoseSE3 inverse() const {
    const Eigen::Matrix3d rt = rotation().transpose();
    return from_rt(rt, -(rt * translation()));
  }

  PoseSE3 operator*(const PoseSE3& o) const {
    return PoseSE3(m_ * o.m_);
  }

 private:
  static void validate_rotation(const Eigen::Matrix3d& r) {
    const double ortho =
        (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
    if (!(ortho <= kRigidTol)) {
      throw InvalidInputError("PoseSE3: rotation block is not orthonormal");
    }
    if (!(std::abs(r.determinant() - 1.0) <= kRigidTol)) {
      throw InvalidInputError("PoseSE3: rotation block determinant is not 1");
    }
  }

  Eigen::Matrix4d m_;
};

// Tangent-space parameterization of SE(3): (rho, omega) with the
// translational part first, rotational part (radians) last.
using Twist = Eigen::Matrix<double, 6, 1>;

inline Twist make_twist(const Eigen::Vector3d& rho,
                        const Eigen::Vector3d& omega) {
  Twist xi;
  xi.head<3>() = rho;
  xi.tail<3>() = omega;
  return xi;
}

// Rodrigues formula with a Taylor fallback for small angles.
inline Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d k = skew(omega);
  double a, b;  // sin(t)/t, (1-cos(t))/t^2
  if (theta < 1e-8) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Eigen::Matrix3d::Identity() + a * k + b * (k * k);
}

inline PoseSE3 se3_exp(const Twist& xi) {
  const Eigen::Vector3d rho = xi.head<3>();
  const Eigen::Vector3d omega = xi.tail<3>();
  const double theta = omega.norm();
  const Eigen::Matrix3d k = skew(omega);
  double b, c;  // (1-cos(t))/t^2, (t-sin(t))/t^3
  if (theta < 1e-8) {
    const double t2 = theta * theta;
    b = 0.5 - t2 / 24.0;
    c = 1.0 / 6.0 - t2 / 120.0;
  } else {
    const double t2 = theta * theta;
    b = (1.0 - std::cos(theta)) / t2;
    c = (theta - std::sin(theta)) / (t2 * theta);
  }
  const Eigen::Matrix3d v = Eigen::Matrix3d::Identity() + b * k + c * (k * k);
  return PoseSE3::from_rt(so3_exp(omega), v * rho);
}

// Geodesic rotation angle of R, in radians.
inline double rotation_angle(const Eigen::Matrix3d& r) {
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

inline Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
  const double theta = rotation_angle(r);
  if (theta > kPi - 1e-6) {
    throw NumericalError("so3_log: rotation angle at or near pi");
  }
  Eigen::Vector3d axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0),
                       r(1, 0) - r(0, 1));
  double scale;  // theta / (2 sin(theta))
  if (theta < 1e-8) {
    scale = 0.5 + theta * theta / 12.0;
  } else {
    scale = theta / (2.0 * std::sin(theta));
  }
  return scale * axis;
}

inline Twist se3_log(const PoseSE3& pose) {
  const Eigen::Vector3d omega = so3_log(pose.rotation());
  const double theta = omega.norm();
  const Eigen::Matrix3d k = skew(omega);
  double c;  // 1/t^2 - (1+cos(t)) / (2 t sin(t))
  if (theta < 1e-8) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    c = 1.0 / (theta * theta) -
        (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  const Eigen::Matrix3d v_inv =
      Eigen::Matrix3d::Identity() - 0.5 * k + c * (k * k);
  return make_twist(v_inv * pose.translation(), omega);
}

// Relative transform from pose a to pose b: a^-1 * b.
inline PoseSE3 relative_pose(const PoseSE3& a, const PoseSE3& b) {
  return a.inverse() * b;
}

// Intrinsic Z-Y-X (yaw-pitch-roll) decomposition, canonical ranges.
// Invariant under q -> -q because the rotation matrix is.
inline EulerDeg quat_to_euler(const Quaternion& q) {
  const Eigen::Matrix3d r = q.normalized().to_rotation_matrix();
  EulerDeg e;
  const double sp = -r(2, 0);  // sin(pitch)
  if (std::abs(sp) >= 1.0 - 1e-12) {
    // Gimbal lock: pitch at +-90 deg, roll fixed to zero.
    e.ry = std::copysign(90.0, sp);
    e.rx = 0.0;
    e.rz = rad2deg(std::atan2(-r(0, 1), r(1, 1)));
  } else {
    e.ry = rad2deg(std::asin(sp));
    e.rx = rad2deg(std::atan2(r(2, 1), r(2, 2)));
    e.rz = rad2deg(std::atan2(r(1, 0), r(0, 0)));
  }
  return e;
}

inline Quaternion euler_to_quat(const EulerDeg& e) {
  const double hx = deg2rad(e.rx) * 0.5;
  const double hy = deg2rad(e.ry) * 0.5;
  const double hz = deg2rad(e.rz) * 0.5;
  const Quaternion qz(std::cos(hz), 0.0, 0.0, std::sin(hz));
  const Quaternion qy(std::cos(hy), 0.0, std::sin(hy), 0.0);
  const Quaternion qx(std::cos(hx), std::sin(hx), 0.0, 0.0);
  return (qz * qy * qx).normalized();
}

}  // namespace lodom
