#pragma once

// Behavior planning and pipeline orchestration: template decomposition of a
// behavior summary, external plan ingestion, and the keyframe -> trajectory
// pipeline with sliding-window in-betweening.

#include "behaviorplan/constraints.hpp"
#include "behaviorplan/data/templates_json.hpp"
#include "behaviorplan/dynamics.hpp"
#include "behaviorplan/errors.hpp"
#include "behaviorplan/inbetween.hpp"
#include "behaviorplan/metrics.hpp"
#include "behaviorplan/parallel.hpp"
#include "behaviorplan/pose_solver.hpp"
#include "behaviorplan/posecode.hpp"
#include "behaviorplan/script_model.hpp"
#include "behaviorplan/skeleton.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace behaviorplan {

// ---------------------------------------------------------------------------
// Template library.

struct TemplateEntry {
  std::string name;
  std::vector<std::string> keywords;
  bool cyclic = false;
  std::size_t repetitions = 1;  // used when the caller asks for 0
  std::vector<Step> steps;      // texts plus parsed ASTs
  std::vector<VecX> references;  // g-bar per transition
};

/// Lowercase, non-alphanumerics folded to single spaces, trimmed.
inline std::string normalize_phrase(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      if (space && !out.empty()) out += ' ';
      out += static_cast<char>(std::tolower(u));
      space = false;
    } else {
      space = true;
    }
  }
  return out;
}

class TemplateLibrary {
 public:
  TemplateLibrary() = default;

  /// Expects {"templates": [{name, keywords, cyclic, repetitions, steps}]}
  /// with steps as [{keyframe, transition}].
  static TemplateLibrary from_json(const nlohmann::json& doc, const Grammar& g = default_grammar()) {
    TemplateLibrary lib;
    if (!doc.is_object() || !doc.contains("templates") || !doc["templates"].is_array())
      throw StructuralError("template library needs a 'templates' array");
    long idx = 0;
    for (const auto& e : doc["templates"]) {
      TemplateEntry t;
      try {
        t.name = e.at("name").get<std::string>();
        t.keywords = e.at("keywords").get<std::vector<std::string>>();
        t.cyclic = e.value("cyclic", false);
        t.repetitions = e.value("repetitions", std::size_t{1});
        for (const auto& s : e.at("steps"))
          t.steps.push_back({s.at("keyframe").get<std::string>(), s.at("transition").get<std::string>(), {}, {}});
      } catch (const nlohmann::json::exception& ex) {
        throw StructuralError("template " + std::to_string(idx) + ": " + ex.what(), idx);
      }
      lib.add(std::move(t), g);
      ++idx;
    }
    return lib;
  }

  static TemplateLibrary from_string(std::string_view text, const Grammar& g = default_grammar()) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed template library: ") + e.what(), json_error_offset(e.byte));
    }
    return from_json(doc, g);
  }

  /// Validates the entry, parses its texts and derives g-bar per transition.
  void add(TemplateEntry t, const Grammar& g = default_grammar()) {
    const long idx = static_cast<long>(entries_.size());
    if (t.name.empty()) throw StructuralError("template has no name", idx);
    if (t.keywords.empty()) throw StructuralError("template '" + t.name + "' has no keywords", idx);
    if (t.steps.size() < 2) throw StructuralError("template '" + t.name + "' needs at least two keyframes", idx);
    if (t.repetitions == 0) throw StructuralError("template '" + t.name + "' repetitions must be positive", idx);
    BehaviorScript probe{t.name, "", t.steps};
    check_behavior_script(probe);
    if (t.cyclic && t.steps.front().keyframe_text != t.steps.back().keyframe_text)
      throw StructuralError("cyclic template '" + t.name + "' must end on its first keyframe", idx);
    t.steps = with_asts(std::move(probe), g).steps;
    t.references.clear();
    for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) t.references.push_back(PrimitiveBag::of(*t.steps[i].transition_ast));
    for (auto& k : t.keywords) k = normalize_phrase(k);
    entries_.push_back(std::move(t));
  }

  const std::vector<TemplateEntry>& entries() const { return entries_; }

  std::vector<std::string> keywords() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.insert(out.end(), e.keywords.begin(), e.keywords.end());
    return out;
  }

  /// Entry whose longest keyword occurs as a whole-word phrase in the
  /// summary; ties go to the earlier entry. Null when nothing matches.
  const TemplateEntry* match(std::string_view summary) const {
    const std::string hay = " " + normalize_phrase(summary) + " ";
    const TemplateEntry* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& e : entries_)
      for (const auto& k : e.keywords)
        if (!k.empty() && k.size() > best_len && hay.find(" " + k + " ") != std::string::npos) {
          best = &e;
          best_len = k.size();
        }
    return best;
  }

 private:
  std::vector<TemplateEntry> entries_;
};

/// The shipped library.
inline const TemplateLibrary& default_templates() {
  static const TemplateLibrary lib = TemplateLibrary::from_string(data::kTemplatesJson);
  return lib;
}

namespace detail {

inline const TemplateEntry& require_match(std::string_view summary, const TemplateLibrary& lib) {
  if (const TemplateEntry* e = lib.match(summary)) return *e;
  std::string what = "no template matches '" + std::string(summary) + "'; available keywords:";
  for (const auto& k : lib.keywords()) what += " '" + k + "'";
  throw Error(what);
}

/// Step indices of the expansion: cyclic entries share the junction keyframe
/// between repetitions, so r repetitions of n keyframes give r n - (r - 1).
inline std::vector<std::size_t> expansion(const TemplateEntry& e, std::size_t repetitions) {
  const std::size_t r = repetitions == 0 ? e.repetitions : repetitions;
  const std::size_t n = e.steps.size();
  if (!e.cyclic && r > 1)
    throw Error("template '" + e.name + "' is not cyclic and cannot repeat " + std::to_string(r) + " times");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t i = 0; i + 1 < n; ++i) idx.push_back(i);
  idx.push_back(n - 1);
  return idx;
}

}  // namespace detail

/// Expands the matched entry and re-renders every text from its AST.
/// Repetitions 0 selects the entry's own default.
inline BehaviorScript plan_from_template(std::string_view summary, const TemplateLibrary& lib = default_templates(),
                                         std::size_t repetitions = 0, const Grammar& g = default_grammar()) {
  const TemplateEntry& e = detail::require_match(summary, lib);
  const auto idx = detail::expansion(e, repetitions);
  BehaviorScript s;
  s.summary = std::string(summary);
  s.description = "Template '" + e.name + "' with " + std::to_string(idx.size()) + " keyframes.";
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Step& src = e.steps[idx[k]];
    Step st;
    st.keyframe_ast = src.keyframe_ast;
    st.keyframe_text = g.render_pose_script(*src.keyframe_ast);
    if (k + 1 < idx.size()) {
      st.transition_ast = src.transition_ast;
      st.transition_text = g.render_motion_script(*src.transition_ast);
    }
    s.steps.push_back(std::move(st));
  }
  return s;
}

/// g-bar per transition of plan_from_template(summary, lib, repetitions).
inline std::vector<VecX> template_references(std::string_view summary, const TemplateLibrary& lib = default_templates(),
                                             std::size_t repetitions = 0) {
  const TemplateEntry& e = detail::require_match(summary, lib);
  const auto idx = detail::expansion(e, repetitions);
  std::vector<VecX> out;
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) out.push_back(e.references[idx[k]]);
  return out;
}

// ---------------------------------------------------------------------------
// External plans.

class PlanRejected : public Error {
 public:
  PlanRejected(const std::string& what, std::vector<Diagnostic> diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Parses and grammar-checks a plan document. Strict mode rejects any
/// diagnostic; lenient mode keeps the plan and leaves unparseable texts with
/// empty ASTs.
inline BehaviorScript load_external_plan_text(std::string_view document, bool lenient = false,
                                              const Grammar& g = default_grammar()) {
  BehaviorScript s = parse_behavior_script(document);
  check_behavior_script(s);
  auto diags = validate_behavior_script(s, g);
  if (!diags.empty() && !lenient) {
    std::string what = "plan has " + std::to_string(diags.size()) + " grammar diagnostic(s):";
    for (const auto& d : diags) what += "\n  " + d.render();
    throw PlanRejected(what, std::move(diags));
  }
  for (auto& st : s.steps) {
    try {
      st.keyframe_ast = g.parse_pose_script(st.keyframe_text);
    } catch (const GrammarError&) {
      st.keyframe_ast = PoseScriptAST{};
    }
    if (st.transition_text.empty()) continue;
    try {
      st.transition_ast = g.parse_motion_script(st.transition_text);
    } catch (const GrammarError&) {
      st.transition_ast = MotionScriptAST{};
    }
  }
  return s;
}

inline BehaviorScript load_external_plan(const std::string& path, bool lenient = false,
                                         const Grammar& g = default_grammar()) {
  return load_external_plan_text(read_text_file(path), lenient, g);
}

// ---------------------------------------------------------------------------
// Pipeline.

struct PipelineConfig {
  ConstraintWeights weights;
  std::size_t C = 30;                 // in-betweens per transition
  double dt = 1.0 / 30.0;             // output frame spacing, seconds
  std::size_t window_keyframes = 8;   // W
  std::size_t blend_frames = 10;
  bool simulate = false;
  std::uint64_t seed = 0;
  bool soft = false;        // keep going when a transition exceeds eps_T
  bool refine = true;
  std::size_t jobs = 0;     // 0 = hardware concurrency
  double sim_dt = 1.0 / 300.0;
  double perturbation = 0.0;  // radians of seeded keyframe-solver jitter; 0 = off

  void validate() const {
    weights.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw StructuralError("dt must be positive");
    if (!(sim_dt > 0.0) || !std::isfinite(sim_dt)) throw StructuralError("sim_dt must be positive");
    if (window_keyframes < 2) throw StructuralError("window_keyframes must be at least 2");
    if (blend_frames >= C + 1 && blend_frames > 0)
      throw StructuralError("blend_frames must be smaller than C + 1");
    if (perturbation < 0.0) throw StructuralError("perturbation must be non-negative");
  }

  nlohmann::json to_json() const {
    return {{"weights", weights.to_json()}, {"C", C}, {"dt", dt}, {"window_keyframes", window_keyframes},
            {"blend_frames", blend_frames}, {"simulate", simulate}, {"seed", seed}, {"soft", soft},
            {"refine", refine}, {"jobs", jobs}, {"sim_dt", sim_dt}, {"perturbation", perturbation}};
  }

  /// Overlays the keys present in `j` onto this config; unknown keys are
  /// rejected.
  void merge(const nlohmann::json& j) {
    if (!j.is_object()) throw StructuralError("pipeline config must be an object");
    try {
      for (const auto& [key, v] : j.items()) {
        if (key == "weights") weights = ConstraintWeights::from_json(v);
        else if (key == "C") C = v.get<std::size_t>();
        else if (key == "dt") dt = v.get<double>();
        else if (key == "window_keyframes") window_keyframes = v.get<std::size_t>();
        else if (key == "blend_frames") blend_frames = v.get<std::size_t>();
        else if (key == "simulate") simulate = v.get<bool>();
        else if (key == "seed") seed = v.get<std::uint64_t>();
        else if (key == "soft") soft = v.get<bool>();
        else if (key == "refine") refine = v.get<bool>();
        else if (key == "jobs") jobs = v.get<std::size_t>();
        else if (key == "sim_dt") sim_dt = v.get<double>();
        else if (key == "perturbation") perturbation = v.get<double>();
        else throw StructuralError("unknown pipeline config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw StructuralError(std::string("pipeline config: ") + e.what());
    }
  }

  static PipelineConfig from_json(const nlohmann::json& j) {
    PipelineConfig c;
    c.merge(j);
    c.validate();
    return c;
  }
};

/// A stage failure tagged with the stage name and the step it concerns
/// (-1 when it concerns the whole run).
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, long step, const std::string& what)
      : Error("stage '" + stage + "'" + (step >= 0 ? " step " + std::to_string(step) : std::string()) + ": " +
              what),
        stage_(std::move(stage)),
        step_(step) {}
  const std::string& stage() const { return stage_; }
  long step() const { return step_; }

 private:
  std::string stage_;
  long step_;
};

struct PipelineResult {
  std::vector<Configuration> keyframes;
  Trajectory kinematic;          // assembled and refined
  Trajectory motion;             // simulated when requested, else the kinematic result
  std::vector<VecX> torques;     // empty without simulation
  std::vector<CTBreakdown> ct;
  CMReport cm;
  PhysErrReport phys;
  std::vector<std::pair<std::string, double>> stage_seconds;

  nlohmann::json report() const {
    nlohmann::json cts = nlohmann::json::array();
    for (const auto& b : ct) cts.push_back(to_json(b));
    return {{"ct", cts}, {"cm", cm.to_json()}, {"phys_err", phys.to_json()}, {"frames", motion.size()}};
  }
};

namespace detail {

/// Keyframe pose after applying a transition's root displacement and turn.
inline Configuration advance_root(const Configuration& q, const MotionScriptAST* a) {
  Configuration out = q;
  if (!a) return out;
  out.root_position += script_displacement(*a, q.root_orientation);
  const double turn = script_turn(*a);
  if (turn != 0.0) out.root_orientation = log_so3(exp_so3(Vec3(0, turn, 0)) * exp_so3(q.root_orientation));
  return out;
}

inline Configuration crossfade(const Configuration& a, const Configuration& b, double alpha) {
  Configuration q = a;
  q.root_position = (1 - alpha) * a.root_position + alpha * b.root_position;
  q.root_orientation = (1 - alpha) * a.root_orientation + alpha * b.root_orientation;
  q.joint_rotations = (1 - alpha) * a.joint_rotations + alpha * b.joint_rotations;
  return q;
}

/// Gap ranges [first, last] per window. Windows overlap by one gap when
/// blending is on, and share only their junction keyframe otherwise.
inline std::vector<std::pair<std::size_t, std::size_t>> window_gaps(std::size_t gaps, std::size_t W, bool overlap) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (gaps == 0) return out;
  const std::size_t span = W - 1;
  const std::size_t stride = overlap ? span - 1 : span;
  for (std::size_t g = 0;; g += stride) {
    const std::size_t last = std::min(gaps - 1, g + span - 1);
    out.push_back({g, last});
    if (last == gaps - 1) break;
  }
  return out;
}

template <class Fn>
auto timed(std::vector<std::pair<std::string, double>>& log, const std::string& stage, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&] {
    log.push_back({stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
  };
  if constexpr (std::is_void_v<decltype(fn())>) {
    fn();
    finish();
  } else {
    auto r = fn();
    finish();
    return r;
  }
}

}  // namespace detail

/// Keyframes solved in order, each starting from its predecessor moved by the
/// transition's root path, then grounded.
inline std::vector<Configuration> solve_keyframes(const BehaviorScript& script, const Skeleton& skel,
                                                  const PipelineConfig& cfg, const Grammar& g = default_grammar()) {
  std::vector<Configuration> keys;
  Configuration init = grounded(skel, zero_configuration(skel));
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const Step& st = script.steps[i];
    const long step = static_cast<long>(i);
    if (i > 0) {
      const auto& prev = script.steps[i - 1].transition_ast;
      init = detail::advance_root(keys.back(), prev ? &*prev : nullptr);
    }
    SolveOptions opt;
    if (cfg.perturbation > 0.0) {
      opt.seed = cfg.seed + i;
      opt.perturbation = cfg.perturbation;
    }
    SolveResult r;
    try {
      const PoseScriptAST ast = st.keyframe_ast ? *st.keyframe_ast : g.parse_pose_script(st.keyframe_text);
      r = solve_pose_detailed(ast, skel, init, opt, g);
    } catch (const Error& e) {
      throw PipelineError("solve", step, e.what());
    }
    if (!r.converged && !cfg.soft)
      throw PipelineError("solve", step, "pose solver did not converge (residual " + std::to_string(r.report.total) + ")");
    keys.push_back(grounded(skel, r.q));
  }
  return keys;
}

/// Interleaves keyframes with in-betweens window by window. Each window is
/// refined on its own; overlapping windows are crossfaded across the shared
/// gap. Without blending, refinement is local to each gap, so the result does
/// not depend on the window size.
inline Trajectory assemble_windows(const std::vector<Configuration>& keys, const std::vector<const MotionScriptAST*>& motions,
                                   const Skeleton& skel, const PipelineConfig& cfg) {
  const std::size_t N = keys.size();
  const std::size_t C = cfg.C;
  Trajectory t;
  t.dt = cfg.dt;
  if (N == 1) {
    t.frames = keys;
    t.keyframe_indices = {0};
    return t;
  }
  const std::size_t gaps = N - 1;
  const bool overlap = cfg.blend_frames > 0 && cfg.window_keyframes >= 3 && C > 0;
  const auto windows = detail::window_gaps(gaps, cfg.window_keyframes, overlap);

  auto gap_frames = [&](std::size_t i) {
    Neighbours nb;
    if (i > 0) nb.prev = &keys[i - 1];
    if (i + 2 < N) nb.next = &keys[i + 2];
    return interpolate(keys[i], keys[i + 1], C, motions[i], &skel, nb);
  };
  auto refine_span = [&](std::size_t first, std::size_t last) {
    Trajectory w;
    w.dt = cfg.dt;
    for (std::size_t i = first; i <= last; ++i) {
      w.keyframe_indices.push_back(w.frames.size());
      w.frames.push_back(keys[i]);
      for (auto& f : gap_frames(i)) w.frames.push_back(std::move(f));
    }
    w.keyframe_indices.push_back(w.frames.size());
    w.frames.push_back(keys[last + 1]);
    return cfg.refine && C > 0 ? refine_trajectory(w, skel, cfg.weights) : w;
  };

  // Per window, the C in-betweens of each covered gap.
  std::vector<std::vector<std::vector<Configuration>>> out(windows.size());
  parallel_for(windows.size(), cfg.jobs, [&](std::size_t wi) {
    const auto [first, last] = windows[wi];
    auto& dst = out[wi];
    if (overlap) {
      const Trajectory w = refine_span(first, last);
      for (std::size_t i = first; i <= last; ++i) {
        const std::size_t base = (i - first) * (C + 1) + 1;
        dst.emplace_back(w.frames.begin() + static_cast<long>(base), w.frames.begin() + static_cast<long>(base + C));
      }
    } else {
      for (std::size_t i = first; i <= last; ++i) {
        const Trajectory w = refine_span(i, i);
        dst.emplace_back(w.frames.begin() + 1, w.frames.end() - 1);
      }
    }
  });

  std::vector<std::vector<Configuration>> mids(gaps);
  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    const auto [first, last] = windows[wi];
    for (std::size_t i = first; i <= last; ++i) {
      auto& frames = out[wi][i - first];
      if (mids[i].empty() || C == 0) {
        mids[i] = std::move(frames);
        continue;
      }
      // Shared gap: earlier window before the blend band, later window after.
      const std::size_t b = cfg.blend_frames;
      const std::size_t start = (C - b) / 2;
      for (std::size_t m = start; m < C; ++m) {
        if (m < start + b) {
          const double alpha = static_cast<double>(m - start + 1) / static_cast<double>(b + 1);
          mids[i][m] = detail::crossfade(mids[i][m], frames[m], alpha);
        } else {
          mids[i][m] = frames[m];
        }
      }
    }
  }

  t.frames.reserve(frame_count(N, C));
  for (std::size_t i = 0; i < N; ++i) {
    t.keyframe_indices.push_back(t.frames.size());
    t.frames.push_back(keys[i]);
    if (i < gaps)
      for (auto& f : mids[i]) t.frames.push_back(std::move(f));
  }
  ground_inbetweens(t, skel);
  t.validate();
  return t;
}

/// Keyframe solving, transition checks, windowed in-betweening, optional
/// tracking simulation and the closing physical reports. `references`
/// supplies g-bar per transition; without it each transition is its own
/// reference.
inline PipelineResult run_pipeline(const BehaviorScript& input, const PipelineConfig& cfg,
                                   const Skeleton& skel = default_skeleton(),
                                   const std::vector<VecX>* references = nullptr,
                                   const Grammar& g = default_grammar()) {
  cfg.validate();
  PipelineResult res;
  BehaviorScript script = input;
  try {
    check_behavior_script(script);
  } catch (const StructuralError& e) {
    throw PipelineError("plan", e.index(), e.what());
  }
  const std::size_t N = script.steps.size();
  if (references && references->size() != N - 1)
    throw PipelineError("plan", -1, "expected " + std::to_string(N - 1) + " reference features, got " +
                                        std::to_string(references->size()));
  for (std::size_t i = 0; i < N; ++i) {
    Step& st = script.steps[i];
    try {
      if (!st.keyframe_ast) st.keyframe_ast = g.parse_pose_script(st.keyframe_text);
      if (i + 1 < N && !st.transition_ast) st.transition_ast = g.parse_motion_script(st.transition_text);
    } catch (const Error& e) {
      throw PipelineError("parse", static_cast<long>(i), e.what());
    }
  }

  res.keyframes = detail::timed(res.stage_seconds, "solve", [&] { return solve_keyframes(script, skel, cfg, g); });

  detail::timed(res.stage_seconds, "transitions", [&] {
    for (std::size_t i = 0; i + 1 < N; ++i) {
      const MotionScriptAST& a = *script.steps[i].transition_ast;
      const BagOfPrimitivesProvider provider =
          references ? BagOfPrimitivesProvider((*references)[i]) : BagOfPrimitivesProvider();
      CTBreakdown b;
      try {
        b = eval_CT(res.keyframes[i], a, res.keyframes[i + 1], skel, provider, cfg.weights,
                    i > 0 ? &res.keyframes[i - 1] : nullptr);
      } catch (const Error& e) {
        throw PipelineError("transition", static_cast<long>(i), e.what());
      }
      if (!b.satisfied && !cfg.soft)
        throw PipelineError("transition", static_cast<long>(i),
                            "C_T = " + std::to_string(b.total) + " exceeds eps_T = " + std::to_string(cfg.weights.eps_T) +
                                " (f_r " + std::to_string(b.f_r) + ", f_b " + std::to_string(b.f_b) + ", f_s " +
                                std::to_string(b.f_s) + ")");
      res.ct.push_back(b);
    }
  });

  std::vector<const MotionScriptAST*> motions;
  for (std::size_t i = 0; i + 1 < N; ++i) motions.push_back(&*script.steps[i].transition_ast);
  detail::timed(res.stage_seconds, "inbetween", [&] {
    try {
      res.kinematic = assemble_windows(res.keyframes, motions, skel, cfg);
    } catch (const Error& e) {
      throw PipelineError("inbetween", -1, e.what());
    }
  });

  const SimParams sim;
  if (cfg.simulate) {
    detail::timed(res.stage_seconds, "simulate", [&] {
      try {
        TrackingResult tr = simulate_tracking(skel, res.kinematic, PDGains{}, cfg.sim_dt, sim);
        res.motion = std::move(tr.motion);
        res.torques = std::move(tr.torques);
      } catch (const Error& e) {
        throw PipelineError("simulate", -1, e.what());
      }
    });
  } else {
    res.motion = res.kinematic;
  }

  detail::timed(res.stage_seconds, "evaluate", [&] {
    res.cm = eval_CM(skel, res.motion, res.torques.empty() ? nullptr : &res.torques, cfg.weights, sim);
    res.phys = phys_err(skel, res.motion);
  });
  return res;
}

}  // namespace behaviorplan
