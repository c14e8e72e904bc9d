#include "behaviorplan/pose_solver.hpp"

#include <gtest/gtest.h>

using namespace behaviorplan;

namespace {

const Skeleton& skel() { return default_skeleton(); }

PoseScriptAST one(std::vector<std::string> subject, Category c, std::string value) {
  return PoseScriptAST{{PoseStatement{std::move(subject), {c, std::move(value)}}}};
}

bool recovered(const PoseScriptAST& have, const PoseStatement& want) {
  return std::find(have.statements.begin(), have.statements.end(), want) != have.statements.end();
}

}  // namespace

TEST(Residual, StraightWithinBin) {
  const auto r = pose_residual(one({"left_elbow"}, Category::angle, "straight"), skel(),
                               zero_configuration(skel()));
  ASSERT_EQ(r.per_statement.size(), 1u);
  EXPECT_LE(r.per_statement[0].second, std::pow(deg2rad(12.5), 2) + 1e-15);
  EXPECT_GT(r.per_statement[0].second, 0.0);
}

TEST(Residual, IgnoredCodesAreVacuous) {
  PoseScriptAST ast;
  ast.statements.push_back({{"left_wrist", "head"}, {Category::relpos_x, "x-ignored"}});
  ast.statements.push_back({{"left_wrist", "head"}, {Category::relpos_y, "y-ignored"}});
  ast.statements.push_back({{"left_wrist", "head"}, {Category::relpos_z, "z-ignored"}});
  ast.statements.push_back({{"left_shoulder"}, {Category::pitch_roll, "pitch-roll-ignored"}});
  ast.statements.push_back({{"left_foot"}, {Category::ground_contact, "ground-ignored"}});
  const auto r = pose_residual(ast, skel(), zero_configuration(skel()));
  EXPECT_EQ(r.total, 0.0);
  EXPECT_EQ(r.per_statement.size(), 5u);
}

TEST(Residual, AtTargetIsZero) {
  Configuration q = zero_configuration(skel());
  set_dof_value(skel(), q, skel().index_of("left_elbow"), 0, kPi / 2);
  EXPECT_NEAR(pose_residual(one({"left_elbow"}, Category::angle, "bent at a right angle"), skel(), q).total, 0.0,
              1e-24);
}

TEST(Residual, TotalIsSum) {
  const auto ast = parse_pose_script(
      "The person is standing upright with a slight forward lean. The left arm is slightly bent and "
      "extended outward. The right arm is bent at a right angle, with the hand positioned near the chest. "
      "The legs are straight and shoulder-width apart.");
  const auto r = pose_residual(ast, skel(), zero_configuration(skel()));
  double s = 0.0;
  for (const auto& [i, v] : r.per_statement) s += v;
  EXPECT_NEAR(r.total, s, 1e-12);
}

TEST(Residual, UnknownSubject) {
  EXPECT_THROW(pose_residual(one({"tail"}, Category::angle, "straight"), skel(), zero_configuration(skel())), Error);
}

TEST(Solve, RightAngleElbow) {
  const auto ast = one({"left_elbow"}, Category::angle, "bent at a right angle");
  const Configuration q = solve_pose(ast, skel(), zero_configuration(skel()));
  const double deg = bend_degrees(skel(), q, skel().index_of("left_elbow"));
  EXPECT_GE(deg, 85.0);
  EXPECT_LE(deg, 95.0);
  EXPECT_TRUE(recovered(classify_posecodes(skel(), q), ast.statements[0]));
  EXPECT_EQ(f_r(skel(), q), 0.0);
}

TEST(Solve, FixedPoint) {
  Configuration init = zero_configuration(skel());
  set_dof_value(skel(), init, skel().index_of("right_knee"), 0, deg2rad(45.0));
  const auto ast = one({"right_knee"}, Category::angle, "slightly bent");
  EXPECT_EQ(solve_pose(ast, skel(), init), init);
}

TEST(Solve, ContradictionReportsBoth) {
  PoseScriptAST ast;
  ast.statements.push_back({{"left_elbow"}, {Category::angle, "straight"}});
  ast.statements.push_back({{"left_elbow"}, {Category::angle, "completely bent"}});
  try {
    solve_pose(ast, skel(), zero_configuration(skel()));
    FAIL() << "expected PoseSolveError";
  } catch (const PoseSolveError& e) {
    ASSERT_EQ(e.best().report.per_statement.size(), 2u);
    EXPECT_GT(e.best().report.per_statement[0].second, 1e-4);
    EXPECT_GT(e.best().report.per_statement[1].second, 1e-4);
    EXPECT_EQ(f_r(skel(), e.best().q), 0.0);
  }
}

TEST(Solve, EveryHingeEveryAngleToken) {
  for (std::size_t j = 1; j < skel().size(); ++j) {
    if (!skel().is_hinge(static_cast<int>(j))) continue;
    for (const auto& bin : kAngleBins) {
      const auto ast = one({skel().joints[j].name}, Category::angle, bin.token);
      const Configuration q = solve_pose(ast, skel(), zero_configuration(skel()));
      EXPECT_TRUE(recovered(classify_posecodes(skel(), q), ast.statements[0]))
          << skel().joints[j].name << " " << bin.token;
      EXPECT_EQ(f_r(skel(), q), 0.0);
    }
  }
}

TEST(Solve, MonotoneLogAndIdempotent) {
  const auto ast = parse_pose_script(
      "The person is standing upright with a slight forward lean. The left arm is slightly bent and "
      "extended outward. The right arm is bent at a right angle, with the hand positioned near the chest. "
      "The legs are straight and shoulder-width apart.");
  SolveOptions opt;
  opt.record_log = true;
  const auto r = solve_pose_detailed(ast, skel(), zero_configuration(skel()), opt);
  ASSERT_TRUE(r.converged) << r.report.max();
  for (std::size_t i = 1; i < r.residual_log.size(); ++i) EXPECT_LE(r.residual_log[i], r.residual_log[i - 1]);
  EXPECT_EQ(f_r(skel(), r.q), 0.0);
  for (const auto& st : ast.statements)
    if (st.predicate.category == Category::angle ||
        (st.predicate.category == Category::distance && st.subject[0] == "left_foot")) {
      EXPECT_TRUE(recovered(classify_posecodes(skel(), r.q), st)) << st.predicate.value;
    }
  const auto again = pose_residual(ast, skel(), solve_pose(ast, skel(), r.q), r.q.root_position);
  EXPECT_LT(again.max(), 1e-4);
}

TEST(Solve, SeededPerturbationIsDeterministic) {
  const auto ast = one({"left_knee"}, Category::angle, "partially bent");
  SolveOptions opt;
  opt.seed = 42;
  const auto a = solve_pose(ast, skel(), zero_configuration(skel()), opt);
  const auto b = solve_pose(ast, skel(), zero_configuration(skel()), opt);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, solve_pose(ast, skel(), zero_configuration(skel())));
}

TEST(Solve, OtherCategories) {
  PoseScriptAST ast;
  ast.statements.push_back({{"right_wrist", "head"}, {Category::relpos_y, "above"}});
  ast.statements.push_back({{"left_shoulder"}, {Category::pitch_roll, "horizontal"}});
  ast.statements.push_back({{"pelvis"}, {Category::orientation, "turned slightly clockwise"}});
  ast.statements.push_back({{"pelvis"}, {Category::position, "positioned slightly forward"}});
  ast.statements.push_back({{"left_foot"}, {Category::ground_contact, "on the ground"}});
  const auto r = solve_pose_detailed(ast, skel(), zero_configuration(skel()));
  EXPECT_TRUE(r.converged) << r.report.max();
  const auto w = forward_kinematics(skel(), r.q);
  EXPECT_GT(w.positions[skel().index_of("right_wrist")].y(), w.positions[skel().index_of("head")].y());
  EXPECT_NEAR(r.q.root_position.z(), 0.25, 0.011);
}
