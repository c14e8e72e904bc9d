#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace behaviorplan {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// Rotation matrix of an axis-angle rotation vector (exponential map).
inline Mat3 exp_so3(const Vec3& phi) {
  const double theta = phi.norm();
  if (theta < 1e-12) return Mat3::Identity() + skew(phi);
  return Eigen::AngleAxisd(theta, phi / theta).toRotationMatrix();
}

/// Inverse of exp_so3 restricted to angles in [0, pi].
inline Vec3 log_so3(const Mat3& r) {
  Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

/// Right Jacobian of SO(3): body angular velocity = jr(phi) * d(phi)/dt.
inline Mat3 right_jacobian(const Vec3& phi) {
  const double t = phi.norm();
  const Mat3 k = skew(phi);
  if (t < 1e-6) return Mat3::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  const double t2 = t * t;
  return Mat3::Identity() - ((1.0 - std::cos(t)) / t2) * k +
         ((t - std::sin(t)) / (t2 * t)) * k * k;
}

/// Slerp between two rotation vectors, returning the rotation vector closest
/// to `from` among the equivalent representations.
inline Vec3 slerp_rotvec(const Vec3& from, const Vec3& to, double s) {
  const Eigen::Quaterniond qa(exp_so3(from));
  const Eigen::Quaterniond qb(exp_so3(to));
  const Mat3 r = qa.slerp(s, qb).toRotationMatrix();
  Vec3 out = log_so3(r);
  const double t = out.norm();
  if (t > 1e-9) {
    // Unwrap toward `from` so the path stays continuous.
    const Vec3 axis = out / t;
    Vec3 best = out;
    for (int k = -2; k <= 2; ++k) {
      const Vec3 cand = (t + 2.0 * kPi * k) * axis;
      if ((cand - from).norm() < (best - from).norm()) best = cand;
    }
    out = best;
  }
  return out;
}

}  // namespace behaviorplan
