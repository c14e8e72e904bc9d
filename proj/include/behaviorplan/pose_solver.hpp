#pragma once

// Rule-based text-to-pose: find a configuration whose posecode residuals
// vanish, by projected coordinate descent inside the joint limits.

#include "behaviorplan/constraints.hpp"
#include "behaviorplan/posecode.hpp"
#include "behaviorplan/skeleton.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <vector>

namespace behaviorplan {

/// Required separation for relative-position codes, meters.
inline constexpr double kRelposMargin = 0.05;
/// Half-width of the vertical and horizontal pitch/roll cones.
inline constexpr double kPitchRollTolerance = 25.0 * kPi / 180.0;
/// Root displacement per scale level of a position code, meters.
inline constexpr double kPositionStep = 0.5;

struct PoseResidualReport {
  double total = 0.0;
  std::vector<std::pair<std::size_t, double>> per_statement;

  double max() const {
    double m = 0.0;
    for (const auto& [i, r] : per_statement) m = std::max(m, r);
    return m;
  }
};

inline nlohmann::json to_json(const PoseResidualReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& [i, v] : r.per_statement) per.push_back({{"statement", i}, {"residual", v}});
  return {{"total", r.total}, {"per_statement", per}};
}

/// Target bend in radians for an angle token on a hinge: the midpoint of the
/// token's bin intersected with the joint's range.
inline double angle_target(const Skeleton& skel, int joint, const std::string& token) {
  const auto bin = angle_bin(token);
  if (!bin) throw Error("unknown angle token '" + token + "'");
  const auto& lim = skel.joints[joint].limits.at(0);
  const double lo = std::max(deg2rad(bin->lo), lim.lo);
  const double hi = std::min(deg2rad(bin->hi), lim.hi);
  if (lo > hi) return deg2rad(0.5 * (bin->lo + bin->hi));
  return 0.5 * (lo + hi);
}

/// Target distance in shoulder widths for a distance token.
inline double distance_target(const std::string& token) {
  const auto bin = distance_bin(token);
  if (!bin) throw Error("unknown distance token '" + token + "'");
  return std::isfinite(bin->hi) ? 0.5 * (bin->lo + bin->hi) : kWideApartTarget;
}

/// Central half of a distance bin around its target, in shoulder widths.
/// Distances inside it carry no residual; the open-ended bin uses the width
/// of its neighbour.
inline std::pair<double, double> distance_core(const std::string& token) {
  const auto bin = distance_bin(token);
  if (!bin) throw Error("unknown distance token '" + token + "'");
  const double t = distance_target(token);
  const double width = std::isfinite(bin->hi) ? bin->hi - bin->lo : 1.0;
  return {t - 0.25 * width, t + 0.25 * width};
}

namespace detail {

inline double wrap_angle(double a) {
  return std::remainder(a, 2.0 * kPi);
}

/// World direction of the segment leaving `joint` toward its first child, or
/// arriving from its parent when it has no child.
inline Vec3 segment_direction(const Skeleton& skel, const WorldPose& w, int joint) {
  for (std::size_t c = 1; c < skel.size(); ++c)
    if (skel.joints[c].parent == joint) {
      const Vec3 d = w.positions[c] - w.positions[joint];
      if (d.norm() > 1e-9) return d.normalized();
    }
  const int p = skel.joints[joint].parent;
  if (p >= 0) {
    const Vec3 d = w.positions[joint] - w.positions[p];
    if (d.norm() > 1e-9) return d.normalized();
  }
  return Vec3::UnitY();
}

struct ResidualContext {
  const Skeleton& skel;
  const Grammar& grammar;
  Vec3 anchor;  // root position that position codes are measured from
};

inline double statement_residual(const ResidualContext& ctx, const PoseStatement& st,
                                 const Configuration& q, const WorldPose& w) {
  const Skeleton& skel = ctx.skel;
  const auto& code = st.predicate;
  const std::string& v = code.value;
  if (v == "x-ignored" || v == "y-ignored" || v == "z-ignored" || v == "pitch-roll-ignored" ||
      v == "ground-ignored")
    return 0.0;
  std::vector<int> ids;
  for (const auto& s : st.subject) ids.push_back(skel.index_of(s));
  const bool pair = is_pair_category(code.category);
  if (ids.size() != (pair ? 2u : 1u))
    throw Error("posecode '" + v + "' has the wrong number of subjects");
  const int a = ids[0];
  switch (code.category) {
    case Category::angle: {
      if (!skel.is_hinge(a)) throw Error("angle posecode on non-hinge joint '" + st.subject[0] + "'");
      const double e = dof_value(skel, q, a, 0) - angle_target(skel, a, v);
      return e * e;
    }
    case Category::distance: {
      const double d = (w.positions[a] - w.positions[ids[1]]).norm() / skel.shoulder_width;
      const auto [lo, hi] = distance_core(v);
      return sigma(hi, d) + sigma(d, lo);
    }
    case Category::relpos_x:
    case Category::relpos_y:
    case Category::relpos_z: {
      // Offsets are measured in the root's heading frame.
      const Mat3 rt = w.orientations[0].transpose();
      const Vec3 d = rt * (w.positions[a] - w.positions[ids[1]]);
      double along = 0.0;
      if (v == "at the left of") along = d.x();
      else if (v == "at the right of") along = -d.x();
      else if (v == "above") along = d.y();
      else if (v == "below") along = -d.y();
      else if (v == "in front of") along = d.z();
      else if (v == "behind") along = -d.z();
      return sigma(0.0, kRelposMargin - along);
    }
    case Category::pitch_roll: {
      const Vec3 dir = segment_direction(skel, w, a);
      const double elevation = std::asin(std::clamp(std::abs(dir.y()), 0.0, 1.0));
      if (v == "vertical") return sigma(kPitchRollTolerance, kPi / 2 - elevation);
      return sigma(kPitchRollTolerance, elevation);
    }
    case Category::ground_contact: {
      const double h = foot_height(skel, w, a) - lowest_height(skel, w);
      return sigma(0.5 * kContactTolerance, h);
    }
    case Category::orientation: {
      const auto sc = ctx.grammar.scale(v);
      if (!sc) throw Error("orientation token '" + v + "' has no scale");
      const Mat3& r = w.orientations[a];
      const Vec3 up = r * Vec3::UnitY();
      const Vec3 fwd = r * Vec3::UnitZ();
      double actual = 0.0, target = 0.0;
      if (sc->axis == 'x') {
        actual = std::atan2(up.z(), up.y());  // forward lean
        target = -sc->level * kPi / 2;
      } else if (sc->axis == 'y') {
        actual = std::atan2(up.x(), up.y());  // lean toward +X (left)
        target = -sc->level * kPi / 2;
      } else {
        actual = std::atan2(fwd.x(), fwd.z());  // counterclockwise seen from above
        target = sc->level * kPi;
      }
      const double e = wrap_angle(actual - target);
      return e * e;
    }
    case Category::position: {
      const auto sc = ctx.grammar.scale(v);
      if (!sc) throw Error("position token '" + v + "' has no scale");
      const Vec3 off = w.positions[a] - ctx.anchor;
      double e = 0.0;
      if (sc->axis == 'x') e = off.x() + sc->level * kPositionStep;  // left is +X
      else if (sc->axis == 'y') e = off.y() - sc->level * kPositionStep;
      else e = off.z() - sc->level * kPositionStep;
      return e * e;
    }
  }
  return 0.0;
}

inline PoseResidualReport residual_report(const ResidualContext& ctx, const PoseScriptAST& ast,
                                          const Configuration& q) {
  const WorldPose w = forward_kinematics(ctx.skel, q);
  PoseResidualReport r;
  for (std::size_t i = 0; i < ast.statements.size(); ++i) {
    const double v = statement_residual(ctx, ast.statements[i], q, w);
    r.per_statement.emplace_back(i, v);
    r.total += v;
  }
  return r;
}

}  // namespace detail

/// Per-statement posecode residuals. Position codes are measured from
/// `anchor` (the initial root position) when given, else from the origin.
inline PoseResidualReport pose_residual(const PoseScriptAST& ast, const Skeleton& skel,
                                        const Configuration& q,
                                        const std::optional<Vec3>& anchor = std::nullopt,
                                        const Grammar& grammar = default_grammar()) {
  check_dimensions(skel, q);
  const detail::ResidualContext ctx{skel, grammar, anchor.value_or(Vec3::Zero())};
  return detail::residual_report(ctx, ast, q);
}

struct SolveOptions {
  int max_sweeps = 2000;
  double tolerance = 1e-4;  // per-statement residual
  double lambda_reg = 1e-3;
  std::optional<std::uint64_t> seed;  // enables the init perturbation
  double perturbation = 0.1;          // radians, uniform
  bool record_log = false;
};

struct SolveResult {
  Configuration q;
  PoseResidualReport report;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> residual_log;  // total residual after each accepted step
};

class PoseSolveError : public Error {
 public:
  PoseSolveError(const std::string& what, SolveResult best)
      : Error(what), best_(std::move(best)) {}
  const SolveResult& best() const { return best_; }

 private:
  SolveResult best_;
};

/// Runs the solver and returns the best iterate whether or not it converged.
inline SolveResult solve_pose_detailed(const PoseScriptAST& ast, const Skeleton& skel,
                                       const Configuration& init, const SolveOptions& opt = {},
                                       const Grammar& grammar = default_grammar()) {
  check_dimensions(skel, init);
  const detail::ResidualContext ctx{skel, grammar, init.root_position};

  Configuration start = clamp_to_limits(skel, init);
  if (opt.seed) {
    std::mt19937_64 rng(*opt.seed);
    std::uniform_real_distribution<double> u(-opt.perturbation, opt.perturbation);
    for (std::size_t j = 1; j < skel.size(); ++j)
      for (int k = 0; k < skel.joints[j].dofs; ++k) {
        const int jj = static_cast<int>(j);
        set_dof_value(skel, start, jj, k, dof_value(skel, start, jj, k) + u(rng));
      }
    start = clamp_to_limits(skel, start);
  }

  SolveResult res;
  res.q = start;
  res.report = detail::residual_report(ctx, ast, start);
  auto converged = [&](const PoseResidualReport& r) {
    for (const auto& [i, v] : r.per_statement)
      if (!(v < opt.tolerance)) return false;
    return true;
  };
  if (opt.record_log) res.residual_log.push_back(res.report.total);
  if (converged(res.report)) {
    res.converged = true;
    return res;
  }

  // Coordinates that can influence the residual: the root plus every
  // ancestor of a subject joint (all joints for ground contact).
  std::set<int> joints;
  for (const auto& st : ast.statements) {
    if (st.predicate.category == Category::ground_contact) {
      for (std::size_t j = 1; j < skel.size(); ++j) joints.insert(static_cast<int>(j));
      continue;
    }
    for (const auto& s : st.subject)
      for (int j = skel.index_of(s); j > 0; j = skel.joints[j].parent) joints.insert(j);
  }
  struct Coord {
    int index;
    double lo;
    double hi;
  };
  std::vector<Coord> coords;
  const double inf = std::numeric_limits<double>::infinity();
  if (!skel.fixed_root)
    for (int i = 0; i < 6; ++i) coords.push_back({i, -inf, inf});
  for (int j : joints)
    for (int k = 0; k < skel.joints[j].dofs; ++k)
      coords.push_back({skel.dof_offset(j) + k, skel.joints[j].limits[k].lo, skel.joints[j].limits[k].hi});

  const VecX anchor = to_generalized(skel, start);
  VecX x = anchor;
  double lambda = opt.lambda_reg;
  auto evaluate = [&](const VecX& v, PoseResidualReport* rep) {
    const PoseResidualReport r = detail::residual_report(ctx, ast, from_generalized(skel, v, &start));
    if (rep) *rep = r;
    return r.total + lambda * (v - anchor).squaredNorm();
  };

  PoseResidualReport cur_rep;
  double cur = evaluate(x, &cur_rep);
  const double h = 1e-4;
  int sweep = 0;
  for (; sweep < opt.max_sweeps; ++sweep) {
    const double sweep_start = cur;
    for (const Coord& c : coords) {
      VecX xp = x, xm = x;
      xp[c.index] += h;
      xm[c.index] -= h;
      const double fp = evaluate(xp, nullptr);
      const double fm = evaluate(xm, nullptr);
      const double g = (fp - fm) / (2 * h);
      if (std::abs(g) < 1e-12) continue;
      const double curv = (fp - 2 * cur + fm) / (h * h);
      double step = curv > 1e-9 ? -g / curv : (g > 0 ? -0.1 : 0.1);
      for (int attempt = 0; attempt < 6; ++attempt, step *= 0.5) {
        VecX xn = x;
        xn[c.index] = std::clamp(x[c.index] + step, c.lo, c.hi);
        if (xn[c.index] == x[c.index]) break;
        PoseResidualReport rep;
        const double fn = evaluate(xn, &rep);
        if (fn < cur && rep.total <= cur_rep.total) {
          x = xn;
          cur = fn;
          cur_rep = rep;
          if (opt.record_log) res.residual_log.push_back(rep.total);
          break;
        }
      }
    }
    if (converged(cur_rep)) {
      ++sweep;
      break;
    }
    if (sweep_start - cur < 1e-15) {
      // Stalled: the regularizer may be outweighing a residual above the
      // tolerance, so relax it before giving up.
      if (lambda == 0.0) {
        ++sweep;
        break;
      }
      lambda = lambda > 1e-8 ? lambda * 0.1 : 0.0;
      cur = evaluate(x, &cur_rep);
    }
  }
  res.q = from_generalized(skel, x, &start);
  res.report = cur_rep;
  res.sweeps = sweep;
  res.converged = converged(cur_rep);
  return res;
}

/// Throws PoseSolveError, carrying the best iterate, when some statement's
/// residual stays at or above the tolerance.
inline Configuration solve_pose(const PoseScriptAST& ast, const Skeleton& skel,
                                const Configuration& init, const SolveOptions& opt = {},
                                const Grammar& grammar = default_grammar()) {
  SolveResult r = solve_pose_detailed(ast, skel, init, opt, grammar);
  if (!r.converged) {
    std::string what = "pose solver did not converge; residuals:";
    for (const auto& [i, v] : r.report.per_statement) what += " [" + std::to_string(i) + "]=" + std::to_string(v);
    throw PoseSolveError(what, std::move(r));
  }
  return r.q;
}

}  // namespace behaviorplan
