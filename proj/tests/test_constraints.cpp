#include "behaviorplan/constraints.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace behaviorplan;

namespace {

const Skeleton& skel() { return default_skeleton(); }

// Independent hinge oracle: explicit branches rather than the library helper.
double hinge_sq(double c, double v) { return v > c ? (v - c) * (v - c) : 0.0; }

}  // namespace

TEST(Sigma, Examples) {
  EXPECT_DOUBLE_EQ(sigma(1.0, 1.5), 0.25);
  EXPECT_DOUBLE_EQ(sigma(1.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(sigma(0.0, 0.0), 0.0);
}

TEST(Sigma, LipschitzBound) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0), uh(0.0, 0.5);
  for (int i = 0; i < 10000; ++i) {
    const double c = u(rng), v = u(rng), h = uh(rng);
    EXPECT_GE(sigma(c, v), 0.0);
    EXPECT_LE(std::abs(sigma(c, v + h) - sigma(c, v)), (2.0 * std::abs(v - c) + h) * h * (1.0 + 1e-12) + 1e-15);
  }
}

TEST(FR, InsideLimitsIsZero) {
  EXPECT_EQ(f_r(skel(), zero_configuration(skel())), 0.0);
}

TEST(FR, SingleOverMax) {
  Configuration q = zero_configuration(skel());
  const int e = skel().index_of("left_elbow");
  set_dof_value(skel(), q, e, 0, skel().joints[e].limits[0].hi + 0.5);
  EXPECT_NEAR(f_r(skel(), q), 0.25, 1e-12);
}

TEST(FR, UnderAndOver) {
  Configuration q = zero_configuration(skel());
  const int e = skel().index_of("left_elbow");
  const int k = skel().index_of("right_knee");
  set_dof_value(skel(), q, e, 0, skel().joints[e].limits[0].lo - 0.2);
  set_dof_value(skel(), q, k, 0, skel().joints[k].limits[0].hi + 0.3);
  EXPECT_NEAR(f_r(skel(), q), 0.13, 1e-12);
}

TEST(FR, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.5, 3.5);
  Configuration q = zero_configuration(skel());
  for (std::size_t j = 1; j < skel().size(); ++j)
    for (int k = 0; k < skel().joints[j].dofs; ++k) set_dof_value(skel(), q, static_cast<int>(j), k, u(rng));
  const VecX g = f_r_gradient(skel(), q);
  VecX x = to_generalized(skel(), q);
  const double h = 1e-6;
  for (int n = 6; n < x.size(); ++n) {
    VecX a = x, b = x;
    a[n] += h;
    b[n] -= h;
    const double fd = (f_r(skel(), from_generalized(skel(), a)) - f_r(skel(), from_generalized(skel(), b))) / (2 * h);
    EXPECT_NEAR(fd, g[n - 6], 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(FB, ZeroMotion) {
  const ConstraintWeights w;
  const Configuration q = zero_configuration(skel());
  EXPECT_EQ(f_b(skel(), q, q, w), 0.0);
  EXPECT_EQ(f_b(skel(), q, q, w, &q), 0.0);
}

TEST(FB, OneOverAndBoundary) {
  ConstraintWeights w;
  const Configuration a = zero_configuration(skel());
  Configuration b = a;
  const int j = skel().index_of("neck");
  const double vbar = skel().joints[j].max_velocity;
  b.set_rotation(j, Vec3(0, vbar + 1.0, 0) * w.keyframe_dt);
  EXPECT_NEAR(f_b(skel(), a, b, w), 1.0, 1e-12);
  b.set_rotation(j, Vec3(0, vbar, 0) * w.keyframe_dt);
  EXPECT_EQ(f_b(skel(), a, b, w), 0.0);
}

TEST(FB, AccelerationTermOnlyWithThirdKeyframe) {
  ConstraintWeights w;
  const int j = skel().index_of("head");
  const double abar = skel().joints[j].max_acceleration;
  Configuration prev = zero_configuration(skel()), cur = prev, next = prev;
  // velocity 0 then 10 rad/s over dt = 0.05 -> acceleration 200 rad/s^2.
  w.keyframe_dt = 0.05;
  next.set_rotation(j, Vec3(0.5, 0, 0));
  const double vel = hinge_sq(skel().joints[j].max_velocity, 10.0);
  EXPECT_NEAR(f_b(skel(), cur, next, w), vel, 1e-9);
  EXPECT_NEAR(f_b(skel(), cur, next, w, &prev), vel + hinge_sq(abar, 200.0), 1e-9);
}

TEST(FB, GradientMatchesFiniteDifference) {
  ConstraintWeights w;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  const Configuration a = zero_configuration(skel());
  Configuration b = a;
  for (std::size_t j = 1; j < skel().size(); ++j) b.set_rotation(static_cast<int>(j), Vec3(u(rng), u(rng), u(rng)));
  const auto g = f_b_gradient(skel(), a, b, w);
  const double h = 1e-6;
  for (std::size_t j = 1; j < skel().size(); ++j)
    for (int k = 0; k < 3; ++k) {
      Configuration p = b, m = b;
      p.joint_rotations(j, k) += h;
      m.joint_rotations(j, k) -= h;
      const double fd = (f_b(skel(), a, p, w) - f_b(skel(), a, m, w)) / (2 * h);
      EXPECT_NEAR(fd, g(j, k), 1e-5 * std::max(1.0, std::abs(fd)));
    }
}

TEST(FS, Examples) {
  ConstraintWeights w;
  VecX g = VecX::Zero(3);
  EXPECT_EQ(f_s(g, g, w), 0.0);
  VecX h = g;
  h[1] = w.eps_s;
  EXPECT_NEAR(f_s(h, g, w), w.eps_s * w.eps_s / 2.0, 1e-15);
  w.kappa = 5.0;
  w.eps_s = 1.0;
  h[1] = 10.0;
  EXPECT_NEAR(f_s(h, g, w), 100.0 / (1.0 + std::exp(-45.0)), 1e-12);
  EXPECT_THROW(f_s(VecX::Zero(2), g, w), DimensionError);
}

TEST(FS, MonotoneInDefaultRegime) {
  const ConstraintWeights w;
  ASSERT_LE(w.kappa * w.eps_s, 4.0);
  double prev = 0.0;
  for (double d = 0.0; d <= 5.0; d += 1e-3) {
    const double v = f_s_of_distance(d, w);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(FS, BagProviderAgainstTemplate) {
  const auto a = parse_motion_script("The person moves forward slowly.");
  const auto t = parse_motion_script("The person turns clockwise.");
  const ConstraintWeights w;
  EXPECT_EQ(f_s(a, BagOfPrimitivesProvider(), w), 0.0);
  EXPECT_EQ(f_s(a, BagOfPrimitivesProvider(a), w), 0.0);
  const VecX ga = PrimitiveBag::of(a), gt = PrimitiveBag::of(t);
  EXPECT_EQ(ga.size(), 27);
  EXPECT_DOUBLE_EQ(ga[PrimitiveBag::direction_slot(Direction::forward)], 1.0);
  EXPECT_NEAR(f_s(a, BagOfPrimitivesProvider(t), w), f_s_of_distance((ga - gt).norm(), w), 1e-15);
}

TEST(CT, IdenticalKeyframesZero) {
  const auto a = parse_motion_script("The person holds the pose.");
  const Configuration q = zero_configuration(skel());
  const auto b = eval_CT(q, a, q, skel(), BagOfPrimitivesProvider(), ConstraintWeights{});
  EXPECT_EQ(b.total, 0.0);
  EXPECT_TRUE(b.satisfied);
}

TEST(CT, BreakdownIdentityAndLinearity) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const auto a = parse_motion_script("The person moves forward. Then the left knee bends.");
  const BagOfPrimitivesProvider provider(parse_motion_script("The person turns clockwise."));
  for (int trial = 0; trial < 50; ++trial) {
    Configuration x = zero_configuration(skel()), y = x;
    for (std::size_t j = 1; j < skel().size(); ++j) {
      x.set_rotation(static_cast<int>(j), Vec3(u(rng), u(rng), u(rng)));
      y.set_rotation(static_cast<int>(j), Vec3(u(rng), u(rng), u(rng)));
    }
    ConstraintWeights w;
    w.w1 = 0.7;
    w.w_a = 1.3;
    w.w_b = 0.4;
    const auto b = eval_CT(x, a, y, skel(), provider, w);
    EXPECT_NEAR(b.total, w.w1 * (w.w_a * b.f_r + w.w_b * b.f_b) + w.w2 * b.f_s, 1e-12 * std::max(1.0, b.total));
    ConstraintWeights w2 = w;
    w2.w2 *= 2.0;
    const auto c = eval_CT(x, a, y, skel(), provider, w2);
    EXPECT_NEAR(c.total - w.w1 * c.f_j, 2.0 * (b.total - w.w1 * b.f_j), 1e-9 * std::max(1.0, b.total));
    EXPECT_EQ(c.f_j, b.f_j);
  }
}

TEST(Weights, JsonRoundTripAndValidation) {
  ConstraintWeights w;
  w.kappa = 3.0;
  const auto back = ConstraintWeights::from_json(w.to_json());
  EXPECT_EQ(back.kappa, 3.0);
  EXPECT_THROW(ConstraintWeights::from_json({{"w1", 0.0}}), StructuralError);
  EXPECT_THROW(ConstraintWeights::from_json({{"bogus", 1.0}}), StructuralError);
}
