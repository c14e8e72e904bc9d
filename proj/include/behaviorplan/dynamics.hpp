#pragma once

// Rigid-body dynamics on the skeleton: composite-rigid-body mass matrix,
// recursive Newton-Euler, semi-implicit Euler stepping with penalty ground
// contact, stable PD tracking, capsule collision distances and the low-level
// trajectory constraint.

#include "behaviorplan/constraints.hpp"
#include "behaviorplan/errors.hpp"
#include "behaviorplan/inbetween.hpp"
#include "behaviorplan/math.hpp"
#include "behaviorplan/skeleton.hpp"

#include <Eigen/Cholesky>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace behaviorplan {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Rotor inertia (kg*m^2) added to DOFs that carry no mass, so the mass
/// matrix stays positive-definite for end joints such as the feet.
inline constexpr double kMasslessArmature = 1e-3;

struct ContactParams {
  double kp = 2e4;  // N/m per sample point
  double kd = 2e2;  // N*s/m per sample point
  double mu = 0.9;
  bool feet_only = false;  // false: every link sample can touch the ground
};

struct SimParams {
  double gravity = 9.81;  // along -Y
  bool contact = true;
  ContactParams contact_params;
  bool joint_limits = true;      // penalty springs outside the joint limits
  double limit_stiffness = 500.0;  // N*m/rad
  double limit_damping = 10.0;     // N*m*s/rad, only outside the limits
  double passive_damping = 0.5;    // N*m*s/rad on every joint DOF

  /// Bare rigid-body mechanics: no ground, no limit springs, no damping.
  static SimParams ideal(double g = 9.81) {
    SimParams p;
    p.gravity = g;
    p.contact = false;
    p.joint_limits = false;
    return p;
  }
};

struct SimState {
  VecX q;  // generalized coordinates, to_generalized order
  VecX v;  // their time derivatives
  double t = 0.0;

  bool all_finite() const { return q.allFinite() && v.allFinite(); }
};

inline VecX state_coordinates(const Skeleton& skel, const Configuration& c) { return to_generalized(skel, c); }

/// A fixed-root skeleton is rooted at the origin.
inline Configuration state_configuration(const Skeleton& skel, const VecX& q) { return from_generalized(skel, q); }

inline void check_state(const Skeleton& skel, const VecX& q, const VecX& v) {
  if (q.size() != skel.dof_count() || v.size() != skel.dof_count())
    throw DimensionError("state size does not match the skeleton DOF count");
}

namespace detail {

/// Time derivative of the right Jacobian along phi_dot.
inline Mat3 right_jacobian_dot(const Vec3& phi, const Vec3& phi_dot) {
  const double t = phi.norm();
  const Mat3 k = skew(phi), kd = skew(phi_dot);
  double a, b, da, db;  // coefficients and their derivatives along t, times t_dot
  const double tdot_t = phi.dot(phi_dot);  // t * t_dot
  if (t < 1e-4) {
    const double t2 = t * t;
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
    da = -tdot_t / 12.0;
    db = -tdot_t / 60.0;
  } else {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    const double s = std::sin(t), c = std::cos(t);
    a = (1.0 - c) / t2;
    b = (t - s) / t3;
    const double tdot = tdot_t / t;
    da = (t * s - 2.0 * (1.0 - c)) / t3 * tdot;
    db = ((1.0 - c) / t3 - 3.0 * (t - s) / t4) * tdot;
  }
  return -da * k - a * kd + db * k * k + b * (kd * k + k * kd);
}

/// Kinematic tree evaluated at (q, v): joint origins, orientations, world
/// motion axes per DOF and body velocities.
struct Tree {
  int n = 0;
  std::vector<Vec3> p;               // joint origins
  std::vector<Mat3> r;               // body orientations
  std::vector<int> first;            // first generalized index of each joint
  std::vector<Eigen::Matrix<double, 3, Eigen::Dynamic>> s;  // world angular axes
  std::vector<Vec3> sdot_v;          // d/dt(S) * qdot for the joint
  std::vector<Vec3> w;               // angular velocity
  std::vector<Vec3> vel;             // origin linear velocity
};

inline Tree build_tree(const Skeleton& skel, const VecX& q, const VecX* v) {
  Tree t;
  const std::size_t J = skel.size();
  t.n = skel.dof_count();
  t.p.resize(J);
  t.r.resize(J);
  t.first.assign(J, 0);
  t.s.resize(J);
  t.sdot_v.assign(J, Vec3::Zero());
  t.w.assign(J, Vec3::Zero());
  t.vel.assign(J, Vec3::Zero());
  const Configuration c = state_configuration(skel, q);
  const int R = skel.root_dof_count();
  t.p[0] = c.root_position;
  t.r[0] = exp_so3(c.root_orientation);
  if (R == 6) {
    t.first[0] = 0;
    t.s[0] = t.r[0] * right_jacobian(c.root_orientation);
    if (v) {
      const Vec3 pd = v->segment<3>(3);
      t.vel[0] = v->segment<3>(0);
      t.w[0] = t.s[0] * pd;
      t.sdot_v[0] = t.w[0].cross(t.w[0]) + t.r[0] * right_jacobian_dot(c.root_orientation, pd) * pd;
    }
  } else {
    t.s[0].resize(3, 0);
  }
  int idx = R;
  for (std::size_t j = 1; j < J; ++j) {
    const auto& d = skel.joints[j];
    const int par = d.parent;
    const Vec3 phi = c.rotation(static_cast<int>(j));
    t.p[j] = t.p[par] + t.r[par] * d.offset;
    t.r[j] = t.r[par] * exp_so3(phi);
    t.first[j] = idx;
    if (d.dofs == 0) {
      t.s[j].resize(3, 0);
    } else if (d.dofs == 1) {
      t.s[j] = t.r[j] * d.axis;
    } else {
      t.s[j] = t.r[j] * right_jacobian(phi);
    }
    if (v) {
      const VecX qd = v->segment(idx, d.dofs);
      t.vel[j] = t.vel[par] + t.w[par].cross(t.r[par] * d.offset);
      const Vec3 rel = t.s[j] * qd;
      t.w[j] = t.w[par] + rel;
      t.sdot_v[j] = t.w[j].cross(rel);
      if (d.dofs == 3) t.sdot_v[j] += t.r[j] * right_jacobian_dot(phi, qd) * qd;
    }
    idx += d.dofs;
  }
  return t;
}

/// Mass properties of a link in world coordinates.
struct LinkInertia {
  double m = 0.0;
  Vec3 c = Vec3::Zero();         // center of mass
  Mat3 i = Mat3::Zero();         // rotational inertia about c
};

inline LinkInertia link_inertia(const LinkDef& l, const std::vector<Vec3>& p) {
  LinkInertia out;
  out.m = l.mass;
  if (l.point_mass) {
    out.c = p[l.b];
    return out;
  }
  const Vec3 a = p[l.a], b = p[l.b];
  out.c = 0.5 * (a + b);
  const double len = (b - a).norm();
  const double r = l.radius;
  // Solid cylinder of the capsule's length and radius.
  const double i_axis = 0.5 * l.mass * r * r;
  const double i_perp = l.mass * (3.0 * r * r + len * len) / 12.0;
  if (len < 1e-12) {
    out.i = Mat3::Identity() * (0.4 * l.mass * r * r);
  } else {
    const Vec3 u = (b - a) / len;
    out.i = i_perp * (Mat3::Identity() - u * u.transpose()) + i_axis * u * u.transpose();
  }
  return out;
}

/// Spatial inertia about the world origin, motion ordered (angular, linear).
inline Mat6 spatial_inertia(const LinkInertia& li) {
  const Mat3 cx = skew(li.c);
  Mat6 s;
  s.topLeftCorner<3, 3>() = li.i - li.m * cx * cx;
  s.topRightCorner<3, 3>() = li.m * cx;
  s.bottomLeftCorner<3, 3>() = -li.m * cx;
  s.bottomRightCorner<3, 3>() = li.m * Mat3::Identity();
  return s;
}

/// Plucker motion columns of a joint about its origin.
inline Eigen::Matrix<double, 6, Eigen::Dynamic> motion_columns(const Skeleton& skel, const Tree& t, int j) {
  const int R = skel.root_dof_count();
  if (j == 0) {
    Eigen::Matrix<double, 6, Eigen::Dynamic> m(6, R);
    if (R == 0) return m;
    m.setZero();
    m.block<3, 3>(3, 0) = Mat3::Identity();
    m.block<3, 3>(0, 3) = t.s[0];
    for (int k = 0; k < 3; ++k) m.block<3, 1>(3, 3 + k) = t.p[0].cross(t.s[0].col(k));
    return m;
  }
  const int n = skel.joints[j].dofs;
  Eigen::Matrix<double, 6, Eigen::Dynamic> m(6, n);
  for (int k = 0; k < n; ++k) {
    m.block<3, 1>(0, k) = t.s[j].col(k);
    m.block<3, 1>(3, k) = t.p[j].cross(t.s[j].col(k));
  }
  return m;
}

inline std::vector<double> subtree_mass(const Skeleton& skel) {
  std::vector<double> m(skel.size(), 0.0);
  for (const auto& l : skel.links) m[l.a] += l.mass;
  for (std::size_t j = skel.size(); j-- > 1;) m[skel.joints[j].parent] += m[j];
  return m;
}

}  // namespace detail

/// Joint-space inertia by the composite-rigid-body recursion.
inline MatX mass_matrix(const Skeleton& skel, const VecX& q) {
  if (q.size() != skel.dof_count()) throw DimensionError("q size does not match the skeleton DOF count");
  const auto t = detail::build_tree(skel, q, nullptr);
  const std::size_t J = skel.size();
  std::vector<Mat6> ic(J, Mat6::Zero());
  for (const auto& l : skel.links) ic[l.a] += detail::spatial_inertia(detail::link_inertia(l, t.p));
  for (std::size_t j = J; j-- > 1;) ic[skel.joints[j].parent] += ic[j];

  MatX m = MatX::Zero(t.n, t.n);
  const auto massive = detail::subtree_mass(skel);
  for (std::size_t j = J; j-- > 0;) {
    const auto sj = detail::motion_columns(skel, t, static_cast<int>(j));
    if (sj.cols() == 0) continue;
    const Eigen::Matrix<double, 6, Eigen::Dynamic> f = ic[j] * sj;
    const int fj = t.first[j];
    m.block(fj, fj, sj.cols(), sj.cols()) = sj.transpose() * f;
    if (j > 0 && massive[j] <= 0.0)
      m.block(fj, fj, sj.cols(), sj.cols()).diagonal().array() += kMasslessArmature;
    if (j == 0) break;
    for (int i = skel.joints[j].parent;; i = skel.joints[i].parent) {
      const auto si = detail::motion_columns(skel, t, i);
      if (si.cols() > 0) {
        const MatX b = si.transpose() * f;
        m.block(t.first[i], fj, si.cols(), sj.cols()) = b;
        m.block(fj, t.first[i], sj.cols(), si.cols()) = b.transpose();
      }
      if (i == 0) break;
    }
  }
  return m;
}

/// Recursive Newton-Euler: generalized force producing acceleration `a` at
/// state (q, v) under gravity along -Y. Armature of massless DOFs included.
inline VecX inverse_dynamics(const Skeleton& skel, const VecX& q, const VecX& v, const VecX& a,
                             double gravity = 9.81) {
  check_state(skel, q, v);
  if (a.size() != q.size()) throw DimensionError("acceleration size does not match the skeleton DOF count");
  const auto t = detail::build_tree(skel, q, &v);
  const std::size_t J = skel.size();
  const int R = skel.root_dof_count();

  std::vector<Vec3> alpha(J, Vec3::Zero()), acc(J, Vec3::Zero());
  acc[0] = Vec3(0.0, gravity, 0.0);
  if (R == 6) {
    acc[0] += a.segment<3>(0);
    alpha[0] = t.s[0] * a.segment<3>(3) + t.sdot_v[0];
  }
  for (std::size_t j = 1; j < J; ++j) {
    const auto& d = skel.joints[j];
    const int par = d.parent;
    const Vec3 off = t.r[par] * d.offset;
    acc[j] = acc[par] + alpha[par].cross(off) + t.w[par].cross(t.w[par].cross(off));
    alpha[j] = alpha[par] + t.s[j] * a.segment(t.first[j], d.dofs) + t.sdot_v[j];
  }

  std::vector<Vec3> f(J, Vec3::Zero()), n(J, Vec3::Zero());  // n about the joint origin
  for (const auto& l : skel.links) {
    const auto li = detail::link_inertia(l, t.p);
    const Vec3 dc = li.c - t.p[l.a];
    const Vec3 wa = t.w[l.a];
    const Vec3 ac = acc[l.a] + alpha[l.a].cross(dc) + wa.cross(wa.cross(dc));
    const Vec3 fl = li.m * ac;
    const Vec3 nl = li.i * alpha[l.a] + wa.cross(li.i * wa);
    f[l.a] += fl;
    n[l.a] += nl + dc.cross(fl);
  }
  for (std::size_t j = J; j-- > 1;) {
    const int par = skel.joints[j].parent;
    f[par] += f[j];
    n[par] += n[j] + (t.p[j] - t.p[par]).cross(f[j]);
  }

  VecX tau(t.n);
  if (R == 6) {
    tau.segment<3>(0) = f[0];
    tau.segment<3>(3) = t.s[0].transpose() * n[0];
  }
  const auto massive = detail::subtree_mass(skel);
  for (std::size_t j = 1; j < J; ++j) {
    const int dofs = skel.joints[j].dofs;
    tau.segment(t.first[j], dofs) = t.s[j].transpose() * n[j];
    if (massive[j] <= 0.0) tau.segment(t.first[j], dofs) += kMasslessArmature * a.segment(t.first[j], dofs);
  }
  return tau;
}

/// C(q, v) + G(q).
inline VecX bias_forces(const Skeleton& skel, const VecX& q, const VecX& v, double gravity = 9.81) {
  return inverse_dynamics(skel, q, v, VecX::Zero(q.size()), gravity);
}

/// Jacobian of a world point rigidly attached to body `j`.
inline Eigen::Matrix<double, 3, Eigen::Dynamic> point_jacobian(const Skeleton& skel, const detail::Tree& t, int j,
                                                              const Vec3& x) {
  Eigen::Matrix<double, 3, Eigen::Dynamic> jac = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, t.n);
  for (int k = j;; k = skel.joints[k].parent) {
    const Vec3 r = x - t.p[k];
    if (k == 0) {
      if (skel.root_dof_count() == 6) {
        jac.block<3, 3>(0, 0) = Mat3::Identity();
        for (int c = 0; c < 3; ++c) jac.col(3 + c) = t.s[0].col(c).cross(r);
      }
      break;
    }
    for (int c = 0; c < skel.joints[k].dofs; ++c) jac.col(t.first[k] + c) = t.s[k].col(c).cross(r);
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Contact and stepping

/// Penalty ground contact in generalized coordinates with its stiffness and
/// damping linearized about the current state for implicit stepping.
struct ContactModel {
  VecX force;
  MatX stiffness;  // -d force / d q
  MatX damping;    // -d force / d v
};

/// Spring-damper normal force at every link sample below the ground and
/// viscous friction capped by the Coulomb cone.
inline ContactModel contact_model(const Skeleton& skel, const detail::Tree& t, const ContactParams& cp,
                                  bool linearize) {
  ContactModel out;
  out.force = VecX::Zero(t.n);
  if (linearize) {
    out.stiffness = MatX::Zero(t.n, t.n);
    out.damping = MatX::Zero(t.n, t.n);
  }
  WorldPose w;
  w.positions = t.p;
  w.orientations = t.r;
  for (const auto& l : skel.links) {
    if (cp.feet_only && !skel.is_foot_link(l)) continue;
    for (const Vec3& x : link_samples(l, w)) {
      if (x.y() >= 0.0) continue;
      const Vec3 vel = t.vel[l.a] + t.w[l.a].cross(x - t.p[l.a]);
      const double fn = std::max(0.0, -cp.kp * x.y() - cp.kd * vel.y());
      if (fn <= 0.0) continue;
      Vec3 f(0.0, fn, 0.0);
      const Vec3 vt(vel.x(), 0.0, vel.z());
      const double speed = vt.norm();
      const bool sliding = cp.kd * speed > cp.mu * fn;
      if (speed > 1e-12) f -= std::min(cp.mu * fn, cp.kd * speed) * vt / speed;
      const auto jac = point_jacobian(skel, t, l.a, x);
      out.force += jac.transpose() * f;
      if (linearize) {
        const auto jy = jac.row(1);
        out.stiffness += cp.kp * jy.transpose() * jy;
        out.damping += cp.kd * jy.transpose() * jy;
        if (!sliding) {
          out.damping += cp.kd * jac.row(0).transpose() * jac.row(0);
          out.damping += cp.kd * jac.row(2).transpose() * jac.row(2);
        }
      }
    }
  }
  return out;
}

inline VecX contact_forces(const Skeleton& skel, const VecX& q, const VecX& v, const ContactParams& cp = {}) {
  check_state(skel, q, v);
  return contact_model(skel, detail::build_tree(skel, q, &v), cp, false).force;
}

/// Forward dynamics: M^-1 (tau + contact - bias).
inline VecX forward_dynamics(const Skeleton& skel, const VecX& q, const VecX& v, const VecX& tau,
                             const SimParams& p = {}) {
  check_state(skel, q, v);
  if (tau.size() != q.size()) throw DimensionError("torque size does not match the skeleton DOF count");
  VecX rhs = tau - bias_forces(skel, q, v, p.gravity);
  if (p.contact) rhs += contact_forces(skel, q, v, p.contact_params);
  const Eigen::LLT<MatX> llt(mass_matrix(skel, q));
  if (llt.info() != Eigen::Success) throw Error("mass matrix is singular");
  return llt.solve(rhs);
}

/// Solves (M + h D + h^2 K) a = rhs + f - h K v for contact linearized at the
/// current state, so that stiff ground springs stay stable at coarse steps.
inline VecX implicit_acceleration(const Skeleton& skel, const SimState& s, MatX lhs, VecX rhs, double h,
                                  const SimParams& p) {
  if (p.contact) {
    const auto c = contact_model(skel, detail::build_tree(skel, s.q, &s.v), p.contact_params, true);
    lhs += h * c.damping + h * h * c.stiffness;
    rhs += c.force - h * (c.stiffness * s.v);
  }
  if (p.joint_limits) {
    int i = skel.root_dof_count();
    for (std::size_t j = 1; j < skel.size(); ++j)
      for (int k = 0; k < skel.joints[j].dofs; ++k, ++i) {
        const auto& lim = skel.joints[j].limits[k];
        const double over = s.q[i] > lim.hi ? s.q[i] - lim.hi : (s.q[i] < lim.lo ? s.q[i] - lim.lo : 0.0);
        double c = p.passive_damping;
        if (over != 0.0) {
          c += p.limit_damping;
          lhs(i, i) += h * h * p.limit_stiffness;
          rhs[i] -= p.limit_stiffness * (over + h * s.v[i]);
        }
        lhs(i, i) += h * c;
        rhs[i] -= c * s.v[i];
      }
  }
  const Eigen::LLT<MatX> llt(lhs);
  if (llt.info() != Eigen::Success) throw Error("mass matrix is singular");
  return llt.solve(rhs);
}

/// Semi-implicit Euler: velocity first, then position with the new velocity.
/// Ground contact enters implicitly.
inline SimState step(const Skeleton& skel, const SimState& s, const VecX& tau, double dt, const SimParams& p = {}) {
  if (!(dt > 0.0)) throw Error("dt must be positive");
  check_state(skel, s.q, s.v);
  if (tau.size() != s.q.size()) throw DimensionError("torque size does not match the skeleton DOF count");
  const VecX a = implicit_acceleration(skel, s, mass_matrix(skel, s.q), tau - bias_forces(skel, s.q, s.v, p.gravity),
                                       dt, p);
  SimState out;
  out.v = s.v + dt * a;
  out.q = s.q + dt * out.v;
  out.t = s.t + dt;
  return out;
}

/// Total mechanical energy without contact: kinetic plus gravitational.
inline double mechanical_energy(const Skeleton& skel, const SimState& s, double gravity = 9.81) {
  const auto t = detail::build_tree(skel, s.q, nullptr);
  double pe = 0.0;
  for (const auto& l : skel.links) pe += l.mass * gravity * detail::link_inertia(l, t.p).c.y();
  return 0.5 * s.v.dot(mass_matrix(skel, s.q) * s.v) + pe;
}

// ---------------------------------------------------------------------------
// PD tracking

struct PDGains {
  double kp = 300.0;
  std::optional<double> kd;      // per-DOF 2 sqrt(kp M_ii) when unset
  double root_kp = 2e4;          // residual root wrench, N/m and N*m/rad
  bool feedforward = true;       // add the reference bias forces
};

struct TrackingResult {
  Trajectory motion;               // resampled at the reference dt
  std::vector<VecX> torques;       // applied generalized force at each frame
};

/// Per-DOF torque bounds; the root residual is unbounded.
inline VecX torque_limits(const Skeleton& skel) {
  VecX lim = VecX::Constant(skel.dof_count(), std::numeric_limits<double>::infinity());
  for (std::size_t j = 1; j < skel.size(); ++j)
    for (int k = 0; k < skel.joints[j].dofs; ++k)
      lim[skel.dof_offset(static_cast<int>(j)) + k] = skel.joints[j].torque_limit;
  return lim;
}

namespace detail {

/// Reference sampled piecewise-linearly between frames.
inline std::pair<VecX, VecX> reference_at(const std::vector<VecX>& ref, double frame_dt, double t) {
  const std::size_t n = ref.size();
  if (n == 1) return {ref[0], VecX::Zero(ref[0].size())};
  const double f = std::clamp(t / frame_dt, 0.0, static_cast<double>(n - 1));
  const std::size_t k = std::min(static_cast<std::size_t>(f), n - 2);
  const double u = f - static_cast<double>(k);
  const VecX slope = (ref[k + 1] - ref[k]) / frame_dt;
  return {ref[k] + u * (ref[k + 1] - ref[k]), slope};
}

}  // namespace detail

/// Stable PD tracking of a reference trajectory. The damping term is treated
/// implicitly, torques are clamped to the joint limits and the root receives a
/// PD residual wrench.
inline TrackingResult simulate_tracking(const Skeleton& skel, const Trajectory& reference, const PDGains& gains = {},
                                        double dt = 1.0 / 300.0, const SimParams& p = {}) {
  reference.validate();
  if (!(dt > 0.0)) throw Error("dt must be positive");
  if (gains.kp < 0.0 || gains.root_kp < 0.0 || (gains.kd && *gains.kd < 0.0))
    throw Error("gains must be non-negative");
  std::vector<VecX> ref;
  ref.reserve(reference.size());
  for (const auto& f : reference.frames) ref.push_back(state_coordinates(skel, f));
  const int n = skel.dof_count();
  const int R = skel.root_dof_count();
  const int sub = std::max(1, static_cast<int>(std::lround(reference.dt / dt)));
  const double h = reference.dt / sub;
  const VecX lim = torque_limits(skel);

  SimState s;
  std::tie(s.q, s.v) = detail::reference_at(ref, reference.dt, 0.0);
  TrackingResult out;
  out.motion.dt = reference.dt;
  out.motion.keyframe_indices = reference.keyframe_indices;

  auto control = [&](const SimState& st, bool advance, SimState* next) {
    const auto [qr, vr] = detail::reference_at(ref, reference.dt, st.t);
    const MatX m = mass_matrix(skel, st.q);
    const VecX bias = bias_forces(skel, st.q, st.v, p.gravity);
    VecX kp(n), kd(n);
    for (int i = 0; i < n; ++i) {
      kp[i] = i < R ? gains.root_kp : gains.kp;
      kd[i] = (gains.kd && i >= R) ? *gains.kd : 2.0 * std::sqrt(kp[i] * m(i, i));
    }
    VecX ff = gains.feedforward ? bias_forces(skel, qr, vr, p.gravity) : VecX::Zero(n);
    const VecX pd = kp.cwiseProduct(qr - st.q - h * st.v) + kd.cwiseProduct(vr - st.v);
    MatX lhs = m;
    lhs.diagonal() += h * kd;
    VecX a = implicit_acceleration(skel, st, lhs, ff + pd - bias, h, p);
    VecX tau = ff + pd - h * kd.cwiseProduct(a);
    bool clamped = false;
    for (int i = R; i < n; ++i) {
      const double c = std::clamp(tau[i], -lim[i], lim[i]);
      if (c != tau[i]) clamped = true;
      tau[i] = c;
    }
    if (clamped) a = implicit_acceleration(skel, st, m, tau - bias, h, p);
    if (advance) {
      next->v = st.v + h * a;
      next->q = st.q + h * next->v;
      next->t = st.t + h;
    }
    return tau;
  };

  for (std::size_t k = 0; k < reference.size(); ++k) {
    out.motion.frames.push_back(state_configuration(skel, s.q));
    const bool last = k + 1 == reference.size();
    for (int i = 0; i < (last ? 1 : sub); ++i) {
      SimState next;
      const VecX tau = control(s, !last, &next);
      if (i == 0) out.torques.push_back(tau);
      if (last) break;
      if (!next.all_finite() || next.q.cwiseAbs().maxCoeff() > 1e3)
        throw Error("simulation diverged at frame " + std::to_string(k + 1));
      s = next;
    }
    s.t = static_cast<double>(k + 1) * reference.dt;
  }
  return out;
}

inline void write_torque_log(std::ostream& os, const std::vector<VecX>& torques, double dt) {
  for (std::size_t k = 0; k < torques.size(); ++k) {
    nlohmann::json line;
    line["t"] = static_cast<double>(k) * dt;
    line["tau"] = std::vector<double>(torques[k].data(), torques[k].data() + torques[k].size());
    os << line.dump() << '\n';
  }
}

inline std::vector<VecX> read_torque_log(std::istream& is) {
  std::vector<VecX> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("torque log line ") + std::to_string(out.size() + 1) + ": " + e.what(),
                       json_error_offset(e.byte));
    }
    if (!j.contains("tau") || !j["tau"].is_array())
      throw StructuralError("torque log line lacks 'tau'", static_cast<long>(out.size()));
    const auto v = j["tau"].get<std::vector<double>>();
    out.push_back(Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Collisions

/// Distance between segments [p1, q1] and [p2, q2].
inline double segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 1e-18 && e <= 1e-18) return r.norm();
  if (a <= 1e-18) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-18) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2), denom = a * e - b * b;
      s = denom > 1e-18 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

namespace detail {

inline int tree_distance(const Skeleton& skel, int a, int b) {
  auto depth = [&](int j) {
    int d = 0;
    for (; j > 0; j = skel.joints[j].parent) ++d;
    return d;
  };
  int da = depth(a), db = depth(b), n = 0;
  while (da > db) a = skel.joints[a].parent, --da, ++n;
  while (db > da) b = skel.joints[b].parent, --db, ++n;
  while (a != b) a = skel.joints[a].parent, b = skel.joints[b].parent, n += 2;
  return n;
}

}  // namespace detail

/// Capsule pairs checked for collision: links whose bodies are at least three
/// tree edges apart.
inline std::vector<std::array<int, 2>> collision_pairs(const Skeleton& skel) {
  std::vector<std::array<int, 2>> out;
  const int n = static_cast<int>(skel.links.size());
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      if (detail::tree_distance(skel, skel.links[i].a, skel.links[k].a) > 2) out.push_back({i, k});
  return out;
}

struct CollisionDistance {
  int first = 0;   // link index
  int second = 0;  // link index
  double distance = 0.0;  // surface gap, negative under penetration
};

inline std::vector<CollisionDistance> collision_distances(const Skeleton& skel, const Configuration& q) {
  const WorldPose w = forward_kinematics(skel, q);
  std::vector<CollisionDistance> out;
  for (const auto& [i, k] : collision_pairs(skel)) {
    const auto& a = skel.links[i];
    const auto& b = skel.links[k];
    const double d = segment_distance(w.positions[a.a], w.positions[a.b], w.positions[b.a], w.positions[b.b]);
    out.push_back({i, k, d - a.radius - b.radius});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Low-level trajectory constraint

struct CMFrame {
  double g_j = 0.0;
  double g_c = 0.0;
  double g_d = 0.0;
};

struct CMReport {
  double g_j = 0.0;
  double g_c = 0.0;
  double g_d = 0.0;
  double total = 0.0;
  bool satisfied = false;
  bool g_d_undefined = false;  // fewer than three frames
  std::vector<CMFrame> per_frame;

  nlohmann::json to_json() const {
    return {{"g_j", g_j}, {"g_c", g_c}, {"g_d", g_d}, {"total", total}, {"satisfied", satisfied},
            {"g_d_undefined", g_d_undefined}};
  }
};

/// Trapezoid rule over lambda in [0, 1] with equally spaced samples.
inline double trapezoid(const std::vector<double>& y) {
  if (y.empty()) return 0.0;
  if (y.size() == 1) return y[0];
  const double h = 1.0 / static_cast<double>(y.size() - 1);
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * h;
}

inline double collision_penalty(double d, const ConstraintWeights& w) {
  return sigma(d, w.d_min) / (1.0 + std::exp(-w.kappa_c * (w.d_min - d)));
}

/// Joint-limit, collision and dynamics penalties integrated along the
/// trajectory. Without a torque log the actuators are assumed to supply the
/// inverse-dynamics torque less contact, clamped to the joint limits.
inline CMReport eval_CM(const Skeleton& skel, const Trajectory& traj, const std::vector<VecX>* torque_log,
                        const ConstraintWeights& w, const SimParams& p = {}) {
  traj.validate();
  for (const auto& f : traj.frames) check_dimensions(skel, f);
  const std::size_t N = traj.size();
  if (torque_log) {
    if (torque_log->size() != N) throw DimensionError("torque log length does not match the trajectory");
    for (const auto& t : *torque_log)
      if (t.size() != skel.dof_count()) throw DimensionError("torque log entry size mismatch");
  }
  CMReport r;
  r.per_frame.resize(N);
  std::vector<VecX> x(N);
  for (std::size_t k = 0; k < N; ++k) {
    x[k] = state_coordinates(skel, traj.frames[k]);
    r.per_frame[k].g_j = f_r(skel, traj.frames[k]);
    for (const auto& c : collision_distances(skel, traj.frames[k]))
      r.per_frame[k].g_c += collision_penalty(c.distance, w);
  }
  r.g_d_undefined = N < 3;
  if (!r.g_d_undefined) {
    const VecX lim = torque_limits(skel);
    const int R = skel.root_dof_count();
    const double h = traj.dt;
    for (std::size_t k = 1; k + 1 < N; ++k) {
      const VecX v = (x[k + 1] - x[k - 1]) / (2.0 * h);
      const VecX a = (x[k + 1] - 2.0 * x[k] + x[k - 1]) / (h * h);
      const VecX id = inverse_dynamics(skel, x[k], v, a, p.gravity);
      const VecX fc = p.contact ? contact_forces(skel, x[k], v, p.contact_params) : VecX::Zero(x[k].size());
      VecX tau;
      if (torque_log) {
        tau = (*torque_log)[k];
      } else {
        tau = id - fc;
        for (int i = R; i < tau.size(); ++i) tau[i] = std::clamp(tau[i], -lim[i], lim[i]);
      }
      r.per_frame[k].g_d = (id - fc - tau).squaredNorm();
    }
    r.per_frame[0].g_d = r.per_frame[1].g_d;
    r.per_frame[N - 1].g_d = r.per_frame[N - 2].g_d;
  }
  std::vector<double> gj(N), gc(N), gd(N);
  for (std::size_t k = 0; k < N; ++k) {
    gj[k] = r.per_frame[k].g_j;
    gc[k] = r.per_frame[k].g_c;
    gd[k] = r.per_frame[k].g_d;
  }
  r.g_j = trapezoid(gj);
  r.g_c = trapezoid(gc);
  r.g_d = trapezoid(gd);
  r.total = w.w3 * r.g_j + w.w4 * r.g_c + w.w5 * r.g_d;
  r.satisfied = r.total <= w.eps_M;
  return r;
}

}  // namespace behaviorplan
