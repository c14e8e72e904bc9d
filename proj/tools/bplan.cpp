// bplan: command-line front end for behavior planning, in-betweening,
// simulation and evaluation.
//
// Exit codes: 0 success, 1 domain or I/O failure, 2 usage error.
// Every option may also come from the JSON file given by --config, using the
// option's long name with underscores as the key. A flag on the command line
// beats the file, which beats the built-in default.

#include "behaviorplan/dynamics.hpp"
#include "behaviorplan/inbetween.hpp"
#include "behaviorplan/metrics.hpp"
#include "behaviorplan/planner.hpp"
#include "behaviorplan/pose_solver.hpp"
#include "behaviorplan/script_model.hpp"
#include "behaviorplan/skeleton.hpp"
#include "run_support.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace bp = behaviorplan;
using nlohmann::json;

namespace {

constexpr const char* kVersion = BEHAVIORPLAN_VERSION;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::set<std::string> kPipelineKeys = {"weights", "C",    "dt",   "window_keyframes", "blend_frames",
                                             "simulate", "seed", "soft", "refine",           "jobs",
                                             "sim_dt",   "perturbation"};

json typed(const std::string& v) {
  json j = json::parse(v, nullptr, false);
  return j.is_discarded() || j.is_object() || j.is_array() ? json(v) : j;
}

/// Option values resolved as flag, then config file, then default.
class Settings {
 public:
  Settings(const CLI::App* app, json file) : app_(app), file_(std::move(file)) {}

  bool from_flag(const std::string& key) const {
    const CLI::Option* o = app_->get_option_no_throw("--" + key);
    return o && o->count() > 0;
  }

  bool has(const std::string& key) const { return from_flag(key) || file_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) const {
    if (from_flag(key)) return app_->get_option("--" + key)->as<T>();
    if (file_.contains(key)) {
      try {
        return file_[key].get<T>();
      } catch (const json::exception& e) {
        throw UsageError("config key '" + key + "': " + e.what());
      }
    }
    return fallback;
  }

  std::string path(const std::string& key) const { return get<std::string>(key, ""); }

  std::string require(const std::string& key) const {
    const std::string v = path(key);
    if (v.empty()) throw UsageError("--" + key + " is required");
    return v;
  }

  /// Pipeline fields only; the weights object merges file keys under flag keys.
  json pipeline_json() const {
    json j = json::object();
    for (const auto& key : kPipelineKeys) {
      if (key == "weights") continue;
      if (from_flag(key)) {
        const CLI::Option* o = app_->get_option("--" + key);
        if (key == "simulate" || key == "soft" || key == "refine") j[key] = o->as<bool>();
        else if (key == "dt" || key == "sim_dt" || key == "perturbation") j[key] = o->as<double>();
        else j[key] = o->as<std::uint64_t>();
      } else if (file_.contains(key)) {
        j[key] = file_[key];
      }
    }
    // An implicit blend width never exceeds the chosen in-between count.
    if (!j.contains("blend_frames") && j.contains("C")) {
      const auto c = j["C"].get<std::size_t>();
      j["blend_frames"] = std::min<std::size_t>(behaviorplan::PipelineConfig{}.blend_frames, c);
    }
    json w = file_.contains("weights") ? file_["weights"] : json::object();
    if (from_flag("weights")) {
      json flag;
      try {
        flag = json::parse(app_->get_option("--weights")->as<std::string>());
      } catch (const json::exception& e) {
        throw UsageError(std::string("--weights must be a JSON object: ") + e.what());
      }
      if (!flag.is_object()) throw UsageError("--weights must be a JSON object");
      for (const auto& [k, v] : flag.items()) w[k] = v;
    }
    if (!w.empty()) j["weights"] = w;
    return j;
  }

  /// Effective values of every option this command knows, for the manifest.
  json snapshot() const {
    json out = json::object();
    for (const CLI::Option* o : app_->get_options()) {
      const std::string name = o->get_single_name();
      if (name.empty() || name == "help" || name == "config") continue;
      if (from_flag(name)) {
        const auto r = o->results();
        json vals = json::array();
        for (const auto& v : r) vals.push_back(typed(v));
        out[name] = vals.size() == 1 ? vals.front() : vals;
      } else if (file_.contains(name)) {
        out[name] = file_[name];
      }
    }
    return out;
  }

 private:
  const CLI::App* app_;
  json file_;
};

json load_config(const std::string& path, bp::Error* = nullptr) {
  if (path.empty()) return json::object();
  const std::string text = bplan::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw bp::ParseError(std::string("malformed config: ") + e.what(), bp::json_error_offset(e.byte));
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  return j;
}

struct Context {
  const CLI::App* app;
  std::string config_path;
  std::unique_ptr<Settings> settings;
  bplan::RunManifest manifest;
  std::optional<bp::Skeleton> custom_skeleton;

  Context(const CLI::App* a, const std::string& cfg)
      : app(a), config_path(cfg), manifest(a->get_name(), kVersion) {}

  const Settings& s() const { return *settings; }

  std::string read_input(const std::string& path) {
    std::string bytes = bplan::read_file(path);
    manifest.add_input(path, bytes);
    return bytes;
  }

  /// --skeleton, then the config file, then BEHAVIORPLAN_SKELETON, then the
  /// embedded default.
  const bp::Skeleton& skeleton() {
    if (custom_skeleton) return *custom_skeleton;
    std::string path = s().path("skeleton");
    if (path.empty()) {
      if (const char* env = std::getenv("BEHAVIORPLAN_SKELETON")) path = env;
    }
    if (path.empty()) return bp::default_skeleton();
    const std::string bytes = read_input(path);
    json j;
    try {
      j = json::parse(bytes);
    } catch (const json::parse_error& e) {
      throw bp::ParseError(std::string("malformed skeleton: ") + e.what(), bp::json_error_offset(e.byte));
    }
    custom_skeleton = bp::Skeleton::from_json(j);
    return *custom_skeleton;
  }

  void write(const std::string& path, const std::string& bytes) {
    bplan::write_atomic(path, bytes);
    manifest.add_output(path);
  }

  /// Emits the manifest next to the first output, or at --manifest.
  void finish(const std::string& primary) {
    if (!manifest.wrote_files()) return;
    std::string path = s().path("manifest");
    if (path.empty()) path = primary + ".manifest.json";
    manifest.set_config(s().snapshot());
    bplan::write_atomic(path, manifest.to_json().dump(2) + "\n");
  }
};

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

bp::Trajectory read_motion_file(Context& ctx, const std::string& path) {
  std::istringstream in(ctx.read_input(path));
  return bp::read_motion(in);
}

std::string motion_text(const bp::Trajectory& t) { return bp::motion_to_string(t); }

std::string torque_text(const std::vector<bp::VecX>& torques, double dt) {
  std::ostringstream os;
  bp::write_torque_log(os, torques, dt);
  return os.str();
}

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_parse(Context& ctx) {
  const std::string path = ctx.s().require("plan");
  const std::string doc = ctx.read_input(path);
  const bool lenient = ctx.s().get<bool>("lenient", false);
  bp::BehaviorScript script = bp::parse_behavior_script(doc);
  const auto diags = bp::validate_behavior_script(script);
  for (const auto& d : diags) std::cerr << d.render() << "\n";
  script = bp::load_external_plan_text(doc, true);
  json steps = json::array();
  for (const auto& st : script.steps)
    steps.push_back({{"statements", st.keyframe_ast ? st.keyframe_ast->statements.size() : 0},
                     {"primitives", st.transition_ast ? st.transition_ast->primitive_count() : 0}});
  print({{"summary", script.summary},
         {"description", script.description},
         {"keyframes", script.keyframe_count()},
         {"transitions", script.transition_count()},
         {"diagnostics", diags.size()},
         {"steps", steps}});
  if (const std::string out = ctx.s().path("out"); !out.empty()) {
    ctx.write(out, bp::serialize_behavior_script(script));
    ctx.finish(out);
  }
  return diags.empty() || lenient ? 0 : 1;
}

const bp::TemplateLibrary& library(Context& ctx, std::unique_ptr<bp::TemplateLibrary>& holder) {
  const std::string path = ctx.s().path("templates");
  if (path.empty()) return bp::default_templates();
  holder = std::make_unique<bp::TemplateLibrary>(bp::TemplateLibrary::from_string(ctx.read_input(path)));
  return *holder;
}

int cmd_plan(Context& ctx) {
  const std::string summary = ctx.s().require("summary");
  std::unique_ptr<bp::TemplateLibrary> holder;
  const auto& lib = library(ctx, holder);
  const auto reps = ctx.s().get<std::size_t>("repetitions", 0);
  const auto script = bp::plan_from_template(summary, lib, reps);
  const std::string text = bp::serialize_behavior_script(script);
  const std::string out = ctx.s().path("out");
  if (out.empty()) {
    std::cout << text;
    return 0;
  }
  ctx.write(out, text);
  ctx.finish(out);
  return 0;
}

int cmd_solve_pose(Context& ctx) {
  const auto& skel = ctx.skeleton();
  std::string text = ctx.s().path("text");
  if (text.empty()) {
    const std::string path = ctx.s().path("ast");
    if (path.empty()) throw UsageError("one of --ast or --text is required");
    text = ctx.read_input(path);
    const auto j = json::parse(text, nullptr, false);
    if (j.is_object() && j.contains("keyframe") && j["keyframe"].is_string()) text = j["keyframe"].get<std::string>();
  }
  const bp::PoseScriptAST ast = bp::parse_pose_script(text);
  bp::Configuration init = bp::grounded(skel, bp::zero_configuration(skel));
  if (const std::string path = ctx.s().path("init"); !path.empty()) {
    const std::string bytes = ctx.read_input(path);
    json j;
    try {
      j = json::parse(bytes);
    } catch (const json::parse_error& e) {
      throw bp::ParseError(std::string("malformed pose: ") + e.what(), bp::json_error_offset(e.byte));
    }
    init = bp::configuration_from_json(skel, j.contains("pose") ? j["pose"] : j);
  }
  bp::SolveOptions opt;
  const double jitter = ctx.s().get<double>("perturbation", 0.0);
  if (jitter > 0.0) {
    opt.seed = ctx.s().get<std::uint64_t>("seed", 0);
    opt.perturbation = jitter;
  }
  bp::SolveResult r;
  {
    bplan::StageTimer t(ctx.manifest, "solve");
    r = bp::solve_pose_detailed(ast, skel, init, opt);
  }
  const json out{{"pose", bp::configuration_to_json(r.q)},
                 {"residual", bp::to_json(r.report)},
                 {"converged", r.converged},
                 {"sweeps", r.sweeps}};
  if (const std::string path = ctx.s().path("out"); !path.empty()) {
    ctx.write(path, out.dump(2) + "\n");
    ctx.finish(path);
  } else {
    print(out);
  }
  if (!r.converged) std::cerr << "pose solver did not converge (residual " << r.report.total << ")\n";
  return r.converged ? 0 : 1;
}

int cmd_generate(Context& ctx) {
  const auto& skel = ctx.skeleton();
  const std::string out = ctx.s().require("out");
  const std::string plan_path = ctx.s().path("plan");
  const std::string planner = ctx.s().get<std::string>("planner", plan_path.empty() ? "heuristic" : "file");

  bp::BehaviorScript script;
  std::vector<bp::VecX> refs;
  bool have_refs = false;
  {
    bplan::StageTimer t(ctx.manifest, "plan");
    if (planner == "file") {
      if (plan_path.empty()) throw UsageError("--planner file needs --plan");
      script = bp::load_external_plan_text(ctx.read_input(plan_path), ctx.s().get<bool>("lenient", false));
    } else if (planner == "heuristic") {
      const std::string summary = ctx.s().require("summary");
      std::unique_ptr<bp::TemplateLibrary> holder;
      const auto& lib = library(ctx, holder);
      const auto reps = ctx.s().get<std::size_t>("repetitions", 0);
      script = bp::plan_from_template(summary, lib, reps);
      refs = bp::template_references(summary, lib, reps);
      have_refs = true;
    } else {
      throw UsageError("--planner must be 'heuristic' or 'file'");
    }
  }

  const bp::PipelineConfig cfg = bp::PipelineConfig::from_json(ctx.s().pipeline_json());
  const bp::PipelineResult r = bp::run_pipeline(script, cfg, skel, have_refs ? &refs : nullptr);
  for (const auto& [stage, seconds] : r.stage_seconds) ctx.manifest.add_stage(stage, seconds);

  const std::string report = ctx.s().path("report").empty() ? out + ".report.json" : ctx.s().path("report");
  ctx.write(out, motion_text(r.motion));
  ctx.write(report, r.report().dump(2) + "\n");
  if (const std::string tq = ctx.s().path("torques"); !tq.empty()) {
    if (r.torques.empty()) throw UsageError("--torques needs --simulate");
    ctx.write(tq, torque_text(r.torques, r.motion.dt));
  }
  ctx.finish(out);
  print(r.report());
  return 0;
}

int cmd_simulate(Context& ctx) {
  const auto& skel = ctx.skeleton();
  const std::string out = ctx.s().require("out");
  const bp::Trajectory ref = read_motion_file(ctx, ctx.s().require("motion"));
  const double sim_dt = ctx.s().get<double>("sim_dt", 1.0 / 300.0);
  const bp::SimParams p;
  bp::TrackingResult tr;
  {
    bplan::StageTimer t(ctx.manifest, "simulate");
    tr = bp::simulate_tracking(skel, ref, bp::PDGains{}, sim_dt, p);
  }
  const auto w = bp::PipelineConfig::from_json(ctx.s().pipeline_json()).weights;
  json report;
  {
    bplan::StageTimer t(ctx.manifest, "evaluate");
    report = {{"cm", bp::eval_CM(skel, tr.motion, &tr.torques, w, p).to_json()},
              {"phys_err", bp::phys_err(skel, tr.motion).to_json()},
              {"frames", tr.motion.size()}};
  }
  ctx.write(out, motion_text(tr.motion));
  if (const std::string tq = ctx.s().path("torques"); !tq.empty()) ctx.write(tq, torque_text(tr.torques, tr.motion.dt));
  if (const std::string rp = ctx.s().path("report"); !rp.empty()) ctx.write(rp, report.dump(2) + "\n");
  ctx.finish(out);
  print(report);
  return 0;
}

int cmd_validate(Context& ctx) {
  const auto& skel = ctx.skeleton();
  const bp::Trajectory motion = read_motion_file(ctx, ctx.s().require("motion"));
  std::vector<bp::VecX> torques;
  if (const std::string tq = ctx.s().path("torques"); !tq.empty()) {
    std::istringstream in(ctx.read_input(tq));
    torques = bp::read_torque_log(in);
  }
  const auto w = bp::PipelineConfig::from_json(ctx.s().pipeline_json()).weights;
  const auto cm = bp::eval_CM(skel, motion, torques.empty() ? nullptr : &torques, w);
  const json report{{"cm", cm.to_json()}, {"phys_err", bp::phys_err(skel, motion).to_json()}, {"frames", motion.size()}};
  if (const std::string rp = ctx.s().path("report"); !rp.empty()) {
    ctx.write(rp, report.dump(2) + "\n");
    ctx.finish(rp);
  }
  print(report);
  if (!cm.satisfied) std::cerr << "C_M = " << cm.total << " exceeds eps_M = " << w.eps_M << "\n";
  return cm.satisfied ? 0 : 1;
}

std::vector<std::string> motion_files(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw bp::Error("'" + dir + "' is not a directory");
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw bp::Error("no .jsonl motions in '" + dir + "'");
  return out;
}

int cmd_metrics(Context& ctx) {
  const auto& skel = ctx.skeleton();
  const auto files = motion_files(ctx.s().require("motions"));
  std::vector<bp::Trajectory> motions;
  for (const auto& f : files) motions.push_back(read_motion_file(ctx, f));

  std::optional<std::vector<bp::MotionScriptAST>> texts;
  if (const std::string tp = ctx.s().path("texts"); !tp.empty()) {
    const json j = json::parse(ctx.read_input(tp));
    if (!j.is_object()) throw bp::StructuralError("texts file must map motion file names to transition texts");
    texts.emplace();
    for (const auto& f : files) {
      const std::string name = std::filesystem::path(f).filename().string();
      if (!j.contains(name)) throw bp::StructuralError("texts file has no entry for '" + name + "'");
      texts->push_back(bp::parse_motion_script(j[name].get<std::string>()));
    }
  }
  std::optional<std::vector<bp::Trajectory>> reference;
  if (const std::string rd = ctx.s().path("reference"); !rd.empty()) {
    reference.emplace();
    for (const auto& f : motion_files(rd)) reference->push_back(read_motion_file(ctx, f));
  }

  bp::MetricsOptions opt;
  opt.seed = ctx.s().get<std::uint64_t>("seed", opt.seed);
  opt.jobs = ctx.s().get<std::size_t>("jobs", opt.jobs);
  opt.r_precision_pool = ctx.s().get<std::size_t>("r_precision_pool", opt.r_precision_pool);
  opt.diversity_samples = ctx.s().get<std::size_t>("diversity_samples", opt.diversity_samples);
  opt.multimodality_subset = ctx.s().get<std::size_t>("multimodality_subset", opt.multimodality_subset);
  const std::string mode = ctx.s().get<std::string>("skate_mode", "excess");
  if (mode == "raw") opt.skate_mode = bp::SkateMode::raw;
  else if (mode != "excess") throw UsageError("--skate_mode must be 'excess' or 'raw'");

  json report;
  {
    bplan::StageTimer t(ctx.manifest, "metrics");
    report = bp::evaluate_batch(skel, motions, texts ? &*texts : nullptr, reference ? &*reference : nullptr, opt);
  }
  if (const std::string sp = ctx.s().path("scores"); !sp.empty()) {
    const json j = json::parse(ctx.read_input(sp));
    json rates = json::array();
    double sum = 0.0;
    for (const auto& e : j.is_array() ? j : json::array({j})) {
      const double sr = bp::success_rate(bp::SubjectiveScores::from_json(e));
      rates.push_back(sr);
      sum += sr;
    }
    report["success_rate"] = rates.empty() ? 0.0 : sum / static_cast<double>(rates.size());
    report["success_rates"] = rates;
  }
  const std::string out = ctx.s().require("report");
  ctx.write(out, report.dump(2) + "\n");
  ctx.finish(out);
  print(report);
  return 0;
}

int cmd_export(Context& ctx) {
  const auto& skel = ctx.skeleton();
  const bp::Trajectory t = read_motion_file(ctx, ctx.s().require("motion"));
  const std::string out = ctx.s().require("out");
  if (t.frames.front().size() != skel.size()) throw bp::DimensionError("motion joint count differs from the skeleton");
  std::ostringstream os;
  os.precision(9);
  os << "frame,t";
  for (const auto& j : skel.joints) os << ',' << j.name << "_x," << j.name << "_y," << j.name << "_z";
  os << '\n';
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto w = bp::forward_kinematics(skel, t.frames[k]);
    os << k << ',' << static_cast<double>(k) * t.dt;
    for (const auto& p : w.positions) os << ',' << p.x() << ',' << p.y() << ',' << p.z();
    os << '\n';
  }
  ctx.write(out, os.str());
  ctx.finish(out);
  return 0;
}

// ---------------------------------------------------------------------------
// Option declarations.

void add_common(CLI::App* c, std::string& config) {
  c->add_option("--config", config, "JSON file supplying defaults for any option");
  c->add_option("--skeleton", "Skeleton JSON (falls back to BEHAVIORPLAN_SKELETON)");
  c->add_option("--manifest", "Manifest path (default: <output>.manifest.json)");
}

void add_pipeline(CLI::App* c) {
  c->add_option("--weights", "Constraint weights as a JSON object");
  c->add_option("-C,--C", "In-between frames per transition");
  c->add_option("--dt", "Output frame spacing in seconds");
  c->add_option("--window_keyframes,--window-keyframes", "Keyframes per sliding window");
  c->add_option("--blend_frames,--blend-frames", "Crossfade frames between windows");
  c->add_flag("--simulate{true},--no-simulate{false}", "Track the result in simulation");
  c->add_flag("--soft{true},--no-soft{false}", "Continue past transition constraint failures");
  c->add_flag("--refine{true},--no-refine{false}", "Project in-betweens into joint limits");
  c->add_option("--seed", "Seed for every stochastic choice");
  c->add_option("--jobs", "Worker threads (0 = all cores)");
  c->add_option("--sim_dt,--sim-dt", "Simulation step in seconds");
  c->add_option("--perturbation", "Seeded keyframe solver jitter in radians");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavior planning, in-betweening, simulation and evaluation."};
  app.set_version_flag("--version", std::string("bplan ") + kVersion);
  app.require_subcommand(1);

  std::map<CLI::App*, std::string> configs;
  std::map<CLI::App*, int (*)(Context&)> handlers;
  auto sub = [&](const char* name, const char* help, int (*fn)(Context&)) {
    CLI::App* c = app.add_subcommand(name, help);
    add_common(c, configs[c]);
    handlers[c] = fn;
    return c;
  };

  auto* parse = sub("parse", "Validate a behavior script and summarize it", cmd_parse);
  parse->add_option("plan,--plan", "Behavior script JSON");
  parse->add_flag("--lenient{true}", "Exit 0 despite grammar diagnostics");
  parse->add_option("--out", "Write the normalized script here");

  auto* plan = sub("plan", "Expand a behavior summary with the template planner", cmd_plan);
  plan->add_option("--summary", "Behavior summary, e.g. 'walk forward'");
  plan->add_option("--repetitions", "Cycle repetitions (0 = template default)");
  plan->add_option("--templates", "Template library JSON");
  plan->add_option("--out", "Output behavior script (default: stdout)");

  auto* solve = sub("solve-pose", "Solve one PoseScript to a configuration", cmd_solve_pose);
  solve->add_option("--ast", "File holding the PoseScript text");
  solve->add_option("--text", "PoseScript text");
  solve->add_option("--init", "Initial pose JSON");
  solve->add_option("--out", "Output pose JSON (default: stdout)");
  solve->add_option("--seed", "Seed for the perturbation");
  solve->add_option("--perturbation", "Seeded initial jitter in radians");

  auto* gen = sub("generate", "Run the full pipeline and write a motion file", cmd_generate);
  gen->add_option("--planner", "'heuristic' (template) or 'file'");
  gen->add_option("--plan", "Behavior script JSON for --planner file");
  gen->add_option("--summary", "Behavior summary for --planner heuristic");
  gen->add_option("--repetitions", "Cycle repetitions (0 = template default)");
  gen->add_option("--templates", "Template library JSON");
  gen->add_flag("--lenient{true}", "Accept plans with grammar diagnostics");
  gen->add_option("--out", "Output motion JSON-lines");
  gen->add_option("--report", "Run report (default: <out>.report.json)");
  gen->add_option("--torques", "Torque log output (needs --simulate)");
  add_pipeline(gen);

  auto* sim = sub("simulate", "Track a motion file under rigid-body dynamics", cmd_simulate);
  sim->add_option("--motion", "Reference motion JSON-lines");
  sim->add_option("--out", "Simulated motion output");
  sim->add_option("--torques", "Torque log output");
  sim->add_option("--report", "Report output");
  sim->add_option("--sim_dt,--sim-dt", "Simulation step in seconds");
  sim->add_option("--weights", "Constraint weights as a JSON object");

  auto* val = sub("validate", "Evaluate the motion constraint and physical errors", cmd_validate);
  val->add_option("--motion", "Motion JSON-lines");
  val->add_option("--torques", "Torque log from a simulation");
  val->add_option("--report", "Report output");
  val->add_option("--weights", "Constraint weights as a JSON object");

  auto* met = sub("metrics", "Score a directory of motions", cmd_metrics);
  met->add_option("--motions", "Directory of .jsonl motions");
  met->add_option("--texts", "JSON object: motion file name -> transition text");
  met->add_option("--reference", "Directory of reference motions for FID");
  met->add_option("--scores", "Subjective scores JSON (object or array)");
  met->add_option("--report", "Report output");
  met->add_option("--skate_mode,--skate-mode", "'excess' (default) or 'raw'");
  met->add_option("--seed", "Sampling seed");
  met->add_option("--jobs", "Worker threads (0 = all cores)");
  met->add_option("--r_precision_pool,--r-precision-pool", "Candidates per R-Precision query");
  met->add_option("--diversity_samples,--diversity-samples", "Pairs for diversity");
  met->add_option("--multimodality_subset,--multimodality-subset", "Pairs per group for multimodality");

  auto* exp = sub("export", "Write joint positions of a motion as CSV", cmd_export);
  exp->add_option("--motion", "Motion JSON-lines");
  exp->add_option("--out", "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (auto& [c, fn] : handlers) {
    if (!c->parsed()) continue;
    try {
      Context ctx(c, configs[c]);
      ctx.settings = std::make_unique<Settings>(c, load_config(configs[c]));
      return fn(ctx);
    } catch (const UsageError& e) {
      std::cerr << "usage: " << e.what() << "\n";
      return 2;
    } catch (const CLI::Error& e) {
      std::cerr << "usage: " << e.what() << "\n";
      return 2;
    } catch (const bp::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const json::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::filesystem::filesystem_error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
