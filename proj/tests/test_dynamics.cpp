#include "behaviorplan/dynamics.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace behaviorplan;

namespace {

const Skeleton& skel() { return default_skeleton(); }

JointDef joint(std::string name, int parent, Vec3 offset, int dofs, Vec3 axis = Vec3::UnitZ()) {
  JointDef d;
  d.name = std::move(name);
  d.parent = parent;
  d.offset = offset;
  d.dofs = dofs;
  d.axis = axis;
  d.limits.assign(dofs, DofLimit{-100.0, 100.0});
  d.torque_limit = 1e6;
  return d;
}

// Fixed-root chain of hinge links about Z with point masses at each tip.
Skeleton pendulum(std::vector<double> masses, std::vector<double> lengths) {
  Skeleton s;
  s.fixed_root = true;
  s.joints.push_back(joint("base", -1, Vec3::Zero(), 0));
  int prev = 0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    s.joints.push_back(joint("hinge" + std::to_string(i), prev, i == 0 ? Vec3::Zero() : Vec3(0, -lengths[i - 1], 0), 1));
    prev = static_cast<int>(s.joints.size()) - 1;
  }
  s.joints.push_back(joint("tip", prev, Vec3(0, -lengths.back(), 0), 0));
  for (std::size_t i = 0; i < masses.size(); ++i) {
    LinkDef l;
    l.a = static_cast<int>(i) + 1;
    l.b = static_cast<int>(i) + 2;
    l.mass = masses[i];
    l.radius = 0.01;
    l.point_mass = true;
    s.links.push_back(l);
  }
  s.validate();
  return s;
}

VecX vec(std::initializer_list<double> v) {
  VecX x(static_cast<Eigen::Index>(v.size()));
  std::size_t i = 0;
  for (double d : v) x[static_cast<Eigen::Index>(i++)] = d;
  return x;
}

SimParams no_contact(double g = 9.81) { return SimParams::ideal(g); }

VecX random_state(std::mt19937_64& rng, const Skeleton& s, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  VecX q(s.dof_count());
  for (int i = 0; i < q.size(); ++i) q[i] = u(rng);
  if (!s.fixed_root) q[1] += 1.0;
  return q;
}

Configuration standing() { return grounded(skel(), zero_configuration(skel())); }

}  // namespace

TEST(MassMatrix, SinglePendulum) {
  const auto p = pendulum({1.0}, {1.0});
  const MatX m = mass_matrix(p, vec({0.3}));
  ASSERT_EQ(m.rows(), 1);
  EXPECT_NEAR(m(0, 0), 1.0, 1e-12);
}

TEST(MassMatrix, DoublePendulumStraight) {
  const double m1 = 1.5, m2 = 0.7, l1 = 0.8, l2 = 0.6;
  const auto p = pendulum({m1, m2}, {l1, l2});
  const MatX m = mass_matrix(p, vec({0.4, 0.0}));
  EXPECT_NEAR(m(0, 0), m1 * l1 * l1 + m2 * (l1 + l2) * (l1 + l2), 1e-12);
  // Oracle: M12 = m2 l2^2 + m2 l1 l2 cos(th2), M22 = m2 l2^2.
  const MatX bent = mass_matrix(p, vec({0.0, 0.9}));
  EXPECT_NEAR(bent(0, 1), m2 * l2 * l2 + m2 * l1 * l2 * std::cos(0.9), 1e-12);
  EXPECT_NEAR(bent(1, 1), m2 * l2 * l2, 1e-12);
}

TEST(MassMatrix, SymmetricPositiveDefinite) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const VecX q = random_state(rng, skel(), 1.5);
    const MatX m = mass_matrix(skel(), q);
    ASSERT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    ASSERT_EQ(Eigen::LLT<MatX>(m).info(), Eigen::Success);
  }
}

TEST(MassMatrix, KineticEnergyMatchesFiniteDifferences) {
  // Oracle: 1/2 sum m |c_dot|^2 from finite-difference link centers, point masses only.
  const auto p = pendulum({1.2, 0.8, 0.5}, {0.5, 0.4, 0.3});
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const VecX q = random_state(rng, p, 2.0), v = random_state(rng, p, 2.0);
    const double h = 1e-6;
    const auto wa = forward_kinematics(p, state_configuration(p, q + h * v));
    const auto wb = forward_kinematics(p, state_configuration(p, q - h * v));
    double ke = 0.0;
    for (const auto& l : p.links) ke += 0.5 * l.mass * ((wa.positions[l.b] - wb.positions[l.b]) / (2 * h)).squaredNorm();
    EXPECT_NEAR(0.5 * v.dot(mass_matrix(p, q) * v), ke, 1e-7);
  }
}

TEST(Bias, PendulumGravity) {
  const auto p = pendulum({1.0}, {1.0});
  EXPECT_NEAR(bias_forces(p, vec({0.0}), vec({0.0}))[0], 0.0, 1e-12);
  EXPECT_NEAR(bias_forces(p, vec({kPi / 2}), vec({0.0}))[0], 9.81, 1e-12);
}

TEST(Bias, ZeroVelocityIsGravityOnly) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const VecX q = random_state(rng, skel(), 1.0);
    const VecX g = bias_forces(skel(), q, VecX::Zero(q.size()));
    const VecX zero_g = bias_forces(skel(), q, VecX::Zero(q.size()), 0.0);
    EXPECT_LT(zero_g.cwiseAbs().maxCoeff(), 1e-12);
    // Oracle: gravity torque is the gradient of potential energy.
    SimState s{q, VecX::Zero(q.size()), 0.0};
    for (int n = 0; n < q.size(); n += 7) {
      SimState a = s, b = s;
      a.q[n] += 1e-6;
      b.q[n] -= 1e-6;
      const double fd = (mechanical_energy(skel(), a) - mechanical_energy(skel(), b)) / 2e-6;
      EXPECT_NEAR(g[n], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(InverseDynamics, PendulumOracle) {
  const auto p = pendulum({1.0}, {1.0});
  EXPECT_NEAR(inverse_dynamics(p, vec({0.0}), vec({0.0}), vec({2.0}))[0], 2.0, 1e-12);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const double m = 1.3, l = 0.7;
  const auto q = pendulum({m}, {l});
  for (int i = 0; i < 1000; ++i) {
    const double th = u(rng), w = u(rng), a = u(rng);
    const double tau = m * l * l * a + m * 9.81 * l * std::sin(th);
    EXPECT_NEAR(inverse_dynamics(q, vec({th}), vec({w}), vec({a}))[0], tau, 1e-6);
  }
}

TEST(InverseDynamics, DoublePendulumCoriolis) {
  // Oracle: textbook two-link equations with point masses, angles from hanging.
  const double m1 = 1.1, m2 = 0.9, l1 = 0.6, l2 = 0.5, g = 9.81;
  const auto p = pendulum({m1, m2}, {l1, l2});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double t1 = u(rng), t2 = u(rng), w1 = u(rng), w2 = u(rng), a1 = u(rng), a2 = u(rng);
    const double c2 = std::cos(t2), s2 = std::sin(t2);
    const double m11 = m1 * l1 * l1 + m2 * (l1 * l1 + l2 * l2 + 2 * l1 * l2 * c2);
    const double m12 = m2 * (l2 * l2 + l1 * l2 * c2), m22 = m2 * l2 * l2;
    const double hq = m2 * l1 * l2 * s2;
    const double g1 = (m1 + m2) * g * l1 * std::sin(t1) + m2 * g * l2 * std::sin(t1 + t2);
    const double g2 = m2 * g * l2 * std::sin(t1 + t2);
    const double tau1 = m11 * a1 + m12 * a2 - hq * (2 * w1 * w2 + w2 * w2) + g1;
    const double tau2 = m12 * a1 + m22 * a2 + hq * w1 * w1 + g2;
    const VecX tau = inverse_dynamics(p, vec({t1, t2}), vec({w1, w2}), vec({a1, a2}));
    EXPECT_NEAR(tau[0], tau1, 1e-9);
    EXPECT_NEAR(tau[1], tau2, 1e-9);
  }
}

TEST(InverseDynamics, ConsistentWithMassMatrixAndBias) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const VecX q = random_state(rng, skel(), 1.0), v = random_state(rng, skel(), 2.0);
    const VecX a = random_state(rng, skel(), 3.0);
    const VecX tau = inverse_dynamics(skel(), q, v, a);
    const VecX lin = mass_matrix(skel(), q) * a + bias_forces(skel(), q, v);
    EXPECT_LT((tau - lin).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, tau.cwiseAbs().maxCoeff()));
  }
}

TEST(InverseDynamics, ForwardRoundTrip) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 100; ++i) {
    const VecX q = random_state(rng, skel(), 1.0), v = random_state(rng, skel(), 2.0);
    const VecX tau = random_state(rng, skel(), 50.0);
    const VecX a = forward_dynamics(skel(), q, v, tau, no_contact());
    const VecX back = inverse_dynamics(skel(), q, v, a);
    EXPECT_LT((back - tau).norm(), 1e-8 * std::max(1.0, tau.norm()));
  }
}

TEST(InverseDynamics, FreeRootAngularMomentumRate) {
  // Oracle: in zero gravity with no torque the spatial momentum stays constant.
  std::mt19937_64 rng(11);
  VecX q = random_state(rng, skel(), 0.5), v = random_state(rng, skel(), 0.5);
  auto momentum = [&](const VecX& qq, const VecX& vv) {
    Vec3 lin = Vec3::Zero();
    const double h = 1e-7;
    const auto wa = forward_kinematics(skel(), state_configuration(skel(), qq + h * vv));
    const auto wb = forward_kinematics(skel(), state_configuration(skel(), qq - h * vv));
    for (const auto& l : skel().links) {
      const Vec3 ca = 0.5 * (wa.positions[l.a] + wa.positions[l.b]);
      const Vec3 cb = 0.5 * (wb.positions[l.a] + wb.positions[l.b]);
      lin += l.mass * (ca - cb) / (2 * h);
    }
    return lin;
  };
  const Vec3 p0 = momentum(q, v);
  SimState s{q, v, 0.0};
  for (int k = 0; k < 200; ++k) s = step(skel(), s, VecX::Zero(q.size()), 1e-4, no_contact(0.0));
  EXPECT_LT((momentum(s.q, s.v) - p0).norm(), 1e-3 * std::max(1.0, p0.norm()));
}

TEST(Step, HandComputedPendulum) {
  const auto p = pendulum({1.0}, {1.0});
  const SimState s = step(p, SimState{vec({0.0}), vec({0.0}), 0.0}, vec({1.0}), 0.01, no_contact());
  EXPECT_NEAR(s.v[0], 0.01, 1e-15);
  EXPECT_NEAR(s.q[0], 1e-4, 1e-17);
  EXPECT_NEAR(s.t, 0.01, 1e-15);
}

TEST(Step, ForceBalanceHoldsStill) {
  const auto p = pendulum({1.0, 0.5}, {0.7, 0.4});
  const VecX q = vec({0.6, -0.3});
  const SimState s0{q, VecX::Zero(2), 0.0};
  const SimState s = step(p, s0, bias_forces(p, q, VecX::Zero(2)), 0.01, no_contact());
  EXPECT_LT((s.q - q).norm(), 1e-14);
  EXPECT_LT(s.v.norm(), 1e-12);
}

TEST(Step, FreeMotionWithoutGravity) {
  VecX q = to_generalized(skel(), zero_configuration(skel()));
  q[1] = 5.0;
  VecX v = VecX::Zero(q.size());
  v[0] = 0.3;
  v[2] = -0.2;
  SimState s{q, v, 0.0};
  for (int k = 0; k < 100; ++k) s = step(skel(), s, VecX::Zero(q.size()), 0.01, no_contact(0.0));
  EXPECT_LT((s.v - v).norm(), 1e-10);
  EXPECT_NEAR(s.q[0], 0.3, 1e-10);
  EXPECT_NEAR(s.q[2], -0.2, 1e-10);
}

TEST(Step, RejectsBadDt) {
  const auto p = pendulum({1.0}, {1.0});
  EXPECT_THROW(step(p, SimState{vec({0.0}), vec({0.0}), 0.0}, vec({0.0}), 0.0), Error);
}

TEST(Step, PendulumEnergyConserved) {
  const auto p = pendulum({1.0}, {1.0});
  SimState s{vec({1.2}), vec({0.0}), 0.0};
  const double e0 = mechanical_energy(p, s);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    s = step(p, s, vec({0.0}), 1e-3, no_contact());
    worst = std::max(worst, std::abs(mechanical_energy(p, s) - e0));
  }
  EXPECT_LT(worst, 0.01 * std::abs(e0));
}

TEST(Contact, SupportsWeightAtRest) {
  Configuration c = standing();
  c.root_position.y() -= 0.002;
  const VecX q = to_generalized(skel(), c);
  const VecX f = contact_forces(skel(), q, VecX::Zero(q.size()));
  EXPECT_GT(f[1], 0.0);
  const SimState s = step(skel(), SimState{to_generalized(skel(), standing()), VecX::Zero(q.size()), 0.0},
                          VecX::Zero(q.size()), 1e-3);
  EXPECT_LT(s.v[1], 0.0);  // falls until the springs engage
}

TEST(Tracking, StandingPoseHeld) {
  Trajectory ref;
  ref.dt = 1.0 / 30.0;
  ref.frames.assign(31, standing());
  ref.keyframe_indices = {0, 30};
  const auto r = simulate_tracking(skel(), ref);
  ASSERT_EQ(r.motion.size(), 31u);
  ASSERT_EQ(r.torques.size(), 31u);
  const VecX err = to_generalized(skel(), r.motion.frames.back()) - to_generalized(skel(), ref.frames.back());
  EXPECT_LT(err.cwiseAbs().maxCoeff(), 0.05);
}

TEST(Tracking, FreeFallWithoutActuation) {
  Trajectory ref;
  ref.dt = 1.0 / 30.0;
  Configuration c = standing();
  c.root_position.y() += 0.3;
  ref.frames.assign(21, c);
  ref.keyframe_indices = {0, 20};
  PDGains g;
  g.kp = 0.0;
  g.kd = 0.0;
  g.root_kp = 0.0;
  g.feedforward = false;
  const auto r = simulate_tracking(skel(), ref, g);
  EXPECT_LT(r.motion.frames[5].root_position.y(), c.root_position.y() - 0.05);
  const auto w = forward_kinematics(skel(), r.motion.frames.back());
  EXPECT_GT(lowest_height(skel(), w), -0.05);
}

TEST(Tracking, EquilibriumTorqueIsGravityCompensation) {
  const auto p = pendulum({1.0, 0.5}, {0.7, 0.4});
  Trajectory ref;
  ref.dt = 0.02;
  Configuration c = zero_configuration(p);
  set_dof_value(p, c, 1, 0, 0.5);
  set_dof_value(p, c, 2, 0, -0.2);
  ref.frames.assign(10, c);
  ref.keyframe_indices = {0, 9};
  const auto r = simulate_tracking(p, ref, {}, 1.0 / 300.0, no_contact());
  const VecX q = to_generalized(p, c);
  const VecX g = bias_forces(p, q, VecX::Zero(2));
  for (const auto& t : r.torques) EXPECT_LT((t - g).norm(), 1e-6);
}

TEST(Tracking, ClampsJointTorques) {
  auto p = pendulum({50.0}, {1.0});
  p.joints[1].torque_limit = 5.0;
  Trajectory ref;
  ref.dt = 0.05;
  Configuration c = zero_configuration(p);
  set_dof_value(p, c, 1, 0, 1.5);
  ref.frames.assign(5, c);
  ref.keyframe_indices = {0, 4};
  const auto r = simulate_tracking(p, ref, {}, 1.0 / 300.0, no_contact());
  for (const auto& t : r.torques) EXPECT_LE(std::abs(t[0]), 5.0);
}

TEST(Tracking, DivergenceIsReported) {
  const auto p = pendulum({1.0}, {1.0});
  Trajectory ref;
  ref.dt = 0.1;
  Configuration a = zero_configuration(p), b = a;
  set_dof_value(p, b, 1, 0, 5e4);
  ref.frames = {a, b};
  ref.keyframe_indices = {0, 1};
  PDGains g;
  g.kp = 1e3;
  EXPECT_THROW(simulate_tracking(p, ref, g, 0.01, no_contact()), Error);
}

TEST(TorqueLog, RoundTrip) {
  std::vector<VecX> log = {vec({1.0, -2.5}), vec({0.125, 3.0})};
  std::stringstream ss;
  write_torque_log(ss, log, 0.1);
  const auto back = read_torque_log(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1], log[1]);
  std::stringstream bad("{\"t\": 0}\n");
  EXPECT_THROW(read_torque_log(bad), StructuralError);
}

TEST(Collision, ParallelCapsules) {
  EXPECT_NEAR(segment_distance(Vec3(0, 0, 0), Vec3(0, 1, 0), Vec3(0.3, 0, 0), Vec3(0.3, 1, 0)) - 0.1, 0.2, 1e-15);
  EXPECT_NEAR(segment_distance(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, 0.1, -1), Vec3(0.5, 0.1, 1)), 0.1, 1e-15);
  EXPECT_NEAR(segment_distance(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)), 1.0, 1e-15);
  EXPECT_NEAR(segment_distance(Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(0, 3, 4), Vec3(0, 3, 4)), 5.0, 1e-15);
}

TEST(Collision, AdjacentExcludedAndStandingClear) {
  for (const auto& [i, k] : collision_pairs(skel())) {
    const auto& a = skel().links[i];
    const auto& b = skel().links[k];
    EXPECT_NE(a.a, b.a);
    EXPECT_NE(skel().joints[a.a].parent, b.a);
    EXPECT_NE(skel().joints[b.a].parent, a.a);
  }
  for (const auto& c : collision_distances(skel(), standing())) EXPECT_GT(c.distance, 0.02) << c.first << " " << c.second;
}

TEST(Collision, OverlapIsNegative) {
  Configuration c = standing();
  const int sh = skel().index_of("left_shoulder");
  const int el = skel().index_of("left_elbow");
  // Upper arm forward, forearm folded back across the chest.
  c.set_rotation(sh, Vec3(0, -kPi / 2, 0));
  set_dof_value(skel(), c, el, 0, 2.6);
  double lo = 1.0;
  for (const auto& d : collision_distances(skel(), c)) lo = std::min(lo, d.distance);
  EXPECT_LT(lo, 0.0);
}

TEST(CM, StaticEquilibrium) {
  Trajectory t;
  t.dt = 1.0 / 30.0;
  t.frames.assign(5, standing());
  t.keyframe_indices = {0, 4};
  const VecX q = to_generalized(skel(), standing());
  const std::vector<VecX> log(5, bias_forces(skel(), q, VecX::Zero(q.size())));
  const ConstraintWeights w;
  const auto r = eval_CM(skel(), t, &log, w);
  EXPECT_EQ(r.g_j, 0.0);
  EXPECT_LT(r.g_c, 1e-9);
  EXPECT_LT(r.g_d, 1e-6);
  EXPECT_TRUE(r.satisfied);
  EXPECT_LT(eval_CM(skel(), t, nullptr, w).g_d, 1e-6);
}

TEST(CM, JointLimitSweepClosedForm) {
  // 13 frames; frames 4..8 sit 0.1 rad past the knee limit. Trapezoid with
  // h = 1/12 over a plateau of 5 samples: 0.01 * (4 + 2 * 0.5) / 12.
  Trajectory t;
  t.dt = 1.0 / 30.0;
  t.frames.assign(13, standing());
  t.keyframe_indices = {0, 12};
  const int k = skel().index_of("left_knee");
  for (int f = 4; f <= 8; ++f) set_dof_value(skel(), t.frames[f], k, 0, skel().joints[k].limits[0].hi + 0.1);
  const auto r = eval_CM(skel(), t, nullptr, ConstraintWeights{});
  EXPECT_NEAR(r.g_j, 0.01 * 5.0 / 12.0, 1e-12);
}

TEST(CM, TotalIsWeightedSum) {
  Trajectory t;
  t.dt = 1.0 / 30.0;
  std::mt19937_64 rng(12);
  for (int f = 0; f < 6; ++f) t.frames.push_back(state_configuration(skel(), random_state(rng, skel(), 1.0)));
  t.keyframe_indices = {0, 5};
  ConstraintWeights w;
  w.w3 = 0.3;
  w.w4 = 2.0;
  w.w5 = 1e-4;
  const auto r = eval_CM(skel(), t, nullptr, w);
  EXPECT_GE(r.g_j, 0.0);
  EXPECT_GE(r.g_c, 0.0);
  EXPECT_GE(r.g_d, 0.0);
  EXPECT_NEAR(r.total, w.w3 * r.g_j + w.w4 * r.g_c + w.w5 * r.g_d, 1e-12 * std::max(1.0, r.total));
}

TEST(CM, TwoFramesFlagsDynamics) {
  Trajectory t;
  t.frames.assign(2, standing());
  t.keyframe_indices = {0, 1};
  const auto r = eval_CM(skel(), t, nullptr, ConstraintWeights{});
  EXPECT_TRUE(r.g_d_undefined);
  EXPECT_EQ(r.g_d, 0.0);
}

TEST(CM, HorizontalTranslationInvariant) {
  Trajectory t;
  t.dt = 1.0 / 30.0;
  std::mt19937_64 rng(13);
  for (int f = 0; f < 6; ++f) t.frames.push_back(state_configuration(skel(), random_state(rng, skel(), 1.2)));
  t.keyframe_indices = {0, 5};
  Trajectory moved = t;
  for (auto& f : moved.frames) f.root_position += Vec3(0.5, 0.0, -0.25);
  const ConstraintWeights w;
  const auto a = eval_CM(skel(), t, nullptr, w);
  const auto b = eval_CM(skel(), moved, nullptr, w);
  EXPECT_EQ(a.g_j, b.g_j);
  EXPECT_NEAR(a.g_c, b.g_c, 1e-12 * std::max(1.0, a.g_c));
  EXPECT_NEAR(a.g_d, b.g_d, 1e-9 * std::max(1.0, a.g_d));
}

TEST(CM, TrapezoidConvergesQuadratically) {
  // Knee excess 0.2 x^2 over lambda = x; exact integral of its square is 0.04 / 5.
  const int k = skel().index_of("left_knee");
  const double hi = skel().joints[k].limits[0].hi;
  auto g_j = [&](int n) {
    Trajectory t;
    t.dt = 1.0 / 30.0;
    for (int f = 0; f <= n; ++f) {
      const double x = static_cast<double>(f) / n;
      Configuration c = standing();
      set_dof_value(skel(), c, k, 0, hi + 0.2 * x * x);
      t.frames.push_back(c);
    }
    t.keyframe_indices = {0, static_cast<std::size_t>(n)};
    return eval_CM(skel(), t, nullptr, ConstraintWeights{}).g_j;
  };
  const double truth = 0.04 / 5.0;
  const double e1 = std::abs(g_j(16) - truth), e2 = std::abs(g_j(32) - truth);
  EXPECT_NEAR(e1 / e2, 4.0, 0.1);
}
