#include "behaviorplan/planner.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace behaviorplan;

namespace {

const std::string kPlanPath = std::string(BEHAVIORPLAN_SOURCE_DIR) + "/data/examples/two_step_plan.json";

nlohmann::json shipped_entry(const std::string& name) {
  const auto doc = nlohmann::json::parse(data::kTemplatesJson);
  for (const auto& e : doc["templates"])
    if (e["name"] == name) return e;
  return {};
}

BehaviorScript hold_plan(std::size_t n) {
  BehaviorScript s;
  for (std::size_t i = 0; i < n; ++i)
    s.steps.push_back({"The person is standing upright. The left knee is straight. The right knee is straight.",
                       i + 1 < n ? "The person holds the pose." : "", {}, {}});
  return s;
}

PipelineConfig quick(std::size_t C) {
  PipelineConfig cfg;
  cfg.C = C;
  cfg.blend_frames = 0;
  cfg.jobs = 1;
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// Template library.

TEST(Templates, ShipsTheRequiredBehaviors) {
  std::set<std::string> names;
  for (const auto& e : default_templates().entries()) names.insert(e.name);
  for (const char* want : {"stand", "walk forward", "wave right hand", "squat", "turn around", "sit down"})
    EXPECT_TRUE(names.count(want)) << want;
}

TEST(Templates, EntriesSatisfyTheirInvariants) {
  const auto& g = default_grammar();
  for (const auto& e : default_templates().entries()) {
    ASSERT_GE(e.steps.size(), 2u) << e.name;
    EXPECT_TRUE(e.steps.back().transition_text.empty()) << e.name;
    EXPECT_EQ(e.references.size(), e.steps.size() - 1) << e.name;
    for (const auto& st : e.steps) {
      EXPECT_EQ(g.render_pose_script(g.parse_pose_script(st.keyframe_text)), st.keyframe_text);
      if (!st.transition_text.empty()) {
        EXPECT_EQ(g.render_motion_script(g.parse_motion_script(st.transition_text)), st.transition_text);
      }
    }
  }
}

TEST(Templates, RejectsMalformedEntries) {
  const auto one_step = R"({"templates": [{"name": "x", "keywords": ["x"],
      "steps": [{"keyframe": "The left knee is straight.", "transition": ""}]}]})";
  EXPECT_THROW(TemplateLibrary::from_string(one_step), StructuralError);
  const auto open_cycle = R"({"templates": [{"name": "x", "keywords": ["x"], "cyclic": true, "steps": [
      {"keyframe": "The left knee is straight.", "transition": "The person moves forward."},
      {"keyframe": "The right knee is straight.", "transition": ""}]}]})";
  EXPECT_THROW(TemplateLibrary::from_string(open_cycle), StructuralError);
  const auto bad_text = R"({"templates": [{"name": "x", "keywords": ["x"], "steps": [
      {"keyframe": "The tail is straight.", "transition": "The person holds the pose."},
      {"keyframe": "The left knee is straight.", "transition": ""}]}]})";
  EXPECT_THROW(TemplateLibrary::from_string(bad_text), GrammarError);
}

TEST(PlanFromTemplate, WalkMatchesShippedEntryVerbatim) {
  const auto s = plan_from_template("walk forward", default_templates(), 1);
  const auto entry = shipped_entry("walk forward");
  ASSERT_EQ(s.steps.size(), entry["steps"].size());
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    EXPECT_EQ(s.steps[i].keyframe_text, entry["steps"][i]["keyframe"].get<std::string>());
    EXPECT_EQ(s.steps[i].transition_text, entry["steps"][i]["transition"].get<std::string>());
  }
}

TEST(PlanFromTemplate, UnknownKeywordListsAvailableOnes) {
  try {
    plan_from_template("quantum levitation");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("quantum levitation"), std::string::npos);
    EXPECT_NE(what.find("'walk forward'"), std::string::npos);
    EXPECT_NE(what.find("'squat'"), std::string::npos);
  }
}

TEST(PlanFromTemplate, CyclicRepetitionSharesJunctions) {
  for (const auto& e : default_templates().entries()) {
    if (!e.cyclic) continue;
    const std::size_t n = e.steps.size();
    for (std::size_t r = 1; r <= 6; ++r) {
      const auto s = plan_from_template(e.keywords.front(), default_templates(), r);
      ASSERT_EQ(s.steps.size(), r * n - (r - 1)) << e.name << " r=" << r;
      check_behavior_script(s);
      for (std::size_t k = 0; k <= r; ++k)
        EXPECT_EQ(s.steps[k * (n - 1)].keyframe_text, e.steps.front().keyframe_text);
    }
    EXPECT_EQ(plan_from_template(e.keywords.front(), default_templates(), 3).steps.size(), 3 * n - 2);
  }
}

TEST(PlanFromTemplate, NonCyclicEntriesDoNotRepeat) {
  EXPECT_THROW(plan_from_template("sit down", default_templates(), 2), Error);
  EXPECT_EQ(plan_from_template("sit down", default_templates(), 1).steps.size(),
            default_templates().match("sit down")->steps.size());
}

TEST(PlanFromTemplate, LongestKeywordWinsAndNormalizes) {
  EXPECT_EQ(default_templates().match("Stand up, then WALK FORWARD!")->name, "walk forward");
  EXPECT_EQ(default_templates().match("please   sit-down")->name, "sit down");
  EXPECT_EQ(default_templates().match("walking"), default_templates().match("walk forward"));
  EXPECT_EQ(default_templates().match("standstill"), nullptr);
}

TEST(PlanFromTemplate, Deterministic) {
  EXPECT_EQ(serialize_behavior_script(plan_from_template("squat", default_templates(), 4)),
            serialize_behavior_script(plan_from_template("squat", default_templates(), 4)));
}

TEST(PlanFromTemplate, ReferencesFollowTheExpansion) {
  const auto s = plan_from_template("wave right hand", default_templates(), 3);
  const auto refs = template_references("wave right hand", default_templates(), 3);
  ASSERT_EQ(refs.size(), s.transition_count());
  for (std::size_t i = 0; i < refs.size(); ++i)
    EXPECT_EQ(refs[i], PrimitiveBag::of(parse_motion_script(s.steps[i].transition_text)));
}

// ---------------------------------------------------------------------------
// External plans.

TEST(ExternalPlan, LoadsTheTwoStepExample) {
  const auto s = load_external_plan(kPlanPath);
  ASSERT_EQ(s.steps.size(), 2u);
  ASSERT_TRUE(s.steps[0].keyframe_ast && s.steps[0].transition_ast);
  EXPECT_EQ(s.steps[0].transition_ast->phases.size(), 4u);
  EXPECT_FALSE(s.steps[1].transition_ast.has_value());
}

TEST(ExternalPlan, StrictModeRejectsGrammarViolations) {
  const std::string doc = R"([{"keyframe": "The tail is straight.", "transition": "The person juggles."},
                              {"keyframe": "The left knee is straight.", "transition": ""}])";
  try {
    load_external_plan_text(doc);
    FAIL() << "expected rejection";
  } catch (const PlanRejected& e) {
    ASSERT_EQ(e.diagnostics().size(), 2u);
    EXPECT_EQ(e.diagnostics()[0].field, "keyframe");
    EXPECT_EQ(e.diagnostics()[1].field, "transition");
  }
  const auto s = load_external_plan_text(doc, true);
  EXPECT_TRUE(s.steps[0].keyframe_ast->statements.empty());
  EXPECT_EQ(s.steps[0].transition_ast->primitive_count(), 0u);
  EXPECT_FALSE(s.steps[1].keyframe_ast->statements.empty());
}

TEST(ExternalPlan, MissingFile) {
  EXPECT_THROW(load_external_plan("/nonexistent/plan.json"), Error);
}

// ---------------------------------------------------------------------------
// Configuration.

TEST(PipelineConfig, FileValuesOverlayDefaults) {
  const auto cfg = PipelineConfig::from_json(
      nlohmann::json::parse(R"({"C": 40, "simulate": true, "weights": {"eps_M": 0.5}})"));
  EXPECT_EQ(cfg.C, 40u);
  EXPECT_TRUE(cfg.simulate);
  EXPECT_EQ(cfg.weights.eps_M, 0.5);
  EXPECT_EQ(cfg.window_keyframes, 8u);
  EXPECT_EQ(cfg.blend_frames, 10u);
  const auto round = PipelineConfig::from_json(cfg.to_json());
  EXPECT_EQ(round.to_json(), cfg.to_json());
}

TEST(PipelineConfig, RejectsBadValues) {
  EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"bogus": 1})")), StructuralError);
  EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"window_keyframes": 1})")), StructuralError);
  EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"C": 3, "blend_frames": 4})")), StructuralError);
  EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"dt": 0})")), StructuralError);
  EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"C": "many"})")), StructuralError);
}

TEST(Windows, CoverEveryGapOnce) {
  for (std::size_t gaps : {1u, 2u, 7u, 34u})
    for (std::size_t W : {2u, 3u, 8u, 40u}) {
      std::vector<int> seen(gaps, 0);
      for (auto [a, b] : detail::window_gaps(gaps, W, false))
        for (std::size_t i = a; i <= b; ++i) ++seen[i];
      for (int s : seen) EXPECT_EQ(s, 1);
      if (W < 3) continue;
      const auto ov = detail::window_gaps(gaps, W, true);
      for (std::size_t k = 1; k < ov.size(); ++k) EXPECT_EQ(ov[k].first, ov[k - 1].second);
      EXPECT_EQ(ov.front().first, 0u);
      EXPECT_EQ(ov.back().second, gaps - 1);
    }
}

// ---------------------------------------------------------------------------
// Pipeline.

TEST(Pipeline, FiveKeyframesThreeInbetweens) {
  const auto s = plan_from_template("walk forward", default_templates(), 2);
  ASSERT_EQ(s.steps.size(), 5u);
  const auto r = run_pipeline(s, quick(3));
  EXPECT_EQ(r.motion.size(), 17u);
  EXPECT_EQ(r.ct.size(), 4u);
  EXPECT_EQ(r.report()["frames"], 17);
  EXPECT_EQ(r.report()["ct"].size(), 4u);
  EXPECT_TRUE(r.report().contains("cm"));
  EXPECT_TRUE(r.report().contains("phys_err"));
}

TEST(Pipeline, FrameCountLawOverGrid) {
  for (std::size_t N : {1u, 2u, 3u, 5u, 8u})
    for (std::size_t C : {0u, 1u, 3u, 7u}) {
      auto cfg = quick(C);
      cfg.blend_frames = std::min<std::size_t>(C, 2);
      cfg.window_keyframes = 3;
      const auto r = run_pipeline(hold_plan(N), cfg);
      EXPECT_EQ(r.motion.size(), N + C * (N - 1)) << "N=" << N << " C=" << C;
      for (std::size_t i = 0; i < N; ++i) EXPECT_EQ(r.motion.keyframe_indices[i], i * (C + 1));
    }
}

TEST(Pipeline, KeyframesSurviveAssembly) {
  const auto r = run_pipeline(plan_from_template("squat", default_templates(), 2), quick(6));
  for (std::size_t i = 0; i < r.keyframes.size(); ++i)
    EXPECT_EQ(r.motion.frames[r.motion.keyframe_indices[i]], r.keyframes[i]);
}

TEST(Pipeline, WindowIndependenceWithoutBlending) {
  const auto s = plan_from_template("walk forward", default_templates(), 4);
  auto cfg = quick(5);
  cfg.blend_frames = 0;
  cfg.window_keyframes = 100;
  const std::string mono = motion_to_string(run_pipeline(s, cfg).motion);
  for (std::size_t W : {2u, 3u, 4u, 8u}) {
    cfg.window_keyframes = W;
    EXPECT_EQ(motion_to_string(run_pipeline(s, cfg).motion), mono) << "W=" << W;
  }
}

TEST(Pipeline, OutputIndependentOfJobs) {
  const auto s = plan_from_template("wave right hand", default_templates(), 4);
  for (std::size_t blend : {0u, 3u}) {
    auto cfg = quick(6);
    cfg.blend_frames = blend;
    cfg.window_keyframes = 3;
    const std::string one = motion_to_string(run_pipeline(s, cfg).motion);
    cfg.jobs = 4;
    EXPECT_EQ(motion_to_string(run_pipeline(s, cfg).motion), one);
    EXPECT_EQ(motion_to_string(run_pipeline(s, cfg).motion), one);
  }
}

TEST(Pipeline, CrossfadeStaysBetweenWindowResults) {
  const auto s = plan_from_template("squat", default_templates(), 3);
  auto cfg = quick(8);
  cfg.window_keyframes = 3;
  cfg.blend_frames = 4;
  const auto r = run_pipeline(s, cfg);
  EXPECT_EQ(r.motion.size(), frame_count(s.steps.size(), 8));
  for (const auto& f : r.motion.frames) EXPECT_TRUE(f.all_finite());
  EXPECT_LE(r.cm.g_j, 1e-9);
}

TEST(Pipeline, SeededPerturbationIsReproducible) {
  const auto s = plan_from_template("wave right hand", default_templates(), 1);
  auto cfg = quick(2);
  cfg.perturbation = 0.05;
  cfg.seed = 7;
  const auto a = run_pipeline(s, cfg);
  const auto b = run_pipeline(s, cfg);
  EXPECT_EQ(motion_to_string(a.motion), motion_to_string(b.motion));
  cfg.seed = 8;
  EXPECT_NE(motion_to_string(run_pipeline(s, cfg).motion), motion_to_string(a.motion));
}

TEST(Pipeline, StaticPoseSimulatesWithoutError) {
  auto cfg = quick(10);
  cfg.simulate = true;
  const auto r = run_pipeline(hold_plan(3), cfg);
  EXPECT_EQ(r.motion.size(), 23u);
  EXPECT_EQ(r.torques.size(), r.motion.size());
  EXPECT_LT(r.phys.total, 0.01);
}

TEST(Pipeline, LongWalkMeetsMotionConstraint) {
  const auto s = plan_from_template("walk forward", default_templates(), 17);
  ASSERT_EQ(s.steps.size(), 35u);
  const auto refs = template_references("walk forward", default_templates(), 17);
  const auto r = run_pipeline(s, quick(30), default_skeleton(), &refs);
  EXPECT_EQ(r.motion.size(), 1055u);
  EXPECT_LE(r.cm.total, PipelineConfig{}.weights.eps_M);
  EXPECT_TRUE(r.cm.satisfied);
  for (const auto& b : r.ct) EXPECT_EQ(b.f_s, 0.0);
}

TEST(Pipeline, TransitionFailureIsTaggedUnlessSoft) {
  auto cfg = quick(3);
  cfg.weights.keyframe_dt = 1e-3;
  const auto s = plan_from_template("squat", default_templates(), 1);
  try {
    run_pipeline(s, cfg);
    FAIL() << "expected a transition failure";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "transition");
    EXPECT_EQ(e.step(), 0);
  }
  cfg.soft = true;
  const auto r = run_pipeline(s, cfg);
  EXPECT_FALSE(r.ct[0].satisfied);
  EXPECT_EQ(r.motion.size(), frame_count(3, 3));
}

TEST(Pipeline, ParseFailureIsTagged) {
  auto s = hold_plan(3);
  s.steps[1].keyframe_text = "The tail is straight.";
  try {
    run_pipeline(s, quick(2));
    FAIL() << "expected a parse failure";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "parse");
    EXPECT_EQ(e.step(), 1);
  }
}

TEST(Pipeline, ExternalPlanSelfReferenceHasNoSemanticPenalty) {
  auto cfg = quick(4);
  cfg.soft = true;
  const auto r = run_pipeline(load_external_plan(kPlanPath), cfg);
  ASSERT_EQ(r.ct.size(), 1u);
  EXPECT_EQ(r.ct[0].f_s, 0.0);
  EXPECT_EQ(r.motion.size(), 6u);
}

TEST(Pipeline, TemplateReferenceMismatchRaisesSemanticPenalty) {
  const auto s = plan_from_template("walk forward", default_templates(), 1);
  auto refs = template_references("squat", default_templates(), 1);
  auto cfg = quick(2);
  cfg.soft = true;
  const auto r = run_pipeline(s, cfg, default_skeleton(), &refs);
  EXPECT_GT(r.ct[0].f_s, 0.0);
  EXPECT_EQ(r.ct[0].f_s, f_s(PrimitiveBag::of(*s.steps[0].transition_ast), refs[0], cfg.weights));
}
