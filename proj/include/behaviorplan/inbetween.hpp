#pragma once

// Keyframe in-betweening: cubic Hermite joint curves, motion-script driven
// root paths and pacing, and limit-projecting refinement.

#include "behaviorplan/constraints.hpp"
#include "behaviorplan/errors.hpp"
#include "behaviorplan/posecode.hpp"
#include "behaviorplan/skeleton.hpp"

#include <json.hpp>

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace behaviorplan {

struct Trajectory {
  std::vector<Configuration> frames;
  double dt = 1.0 / 30.0;
  std::vector<std::size_t> keyframe_indices;

  std::size_t size() const { return frames.size(); }
  bool operator==(const Trajectory&) const = default;

  void validate() const {
    if (frames.empty()) throw StructuralError("trajectory has no frames");
    if (!(dt > 0.0)) throw StructuralError("trajectory dt must be positive");
    for (const auto& f : frames)
      if (f.size() != frames.front().size()) throw DimensionError("trajectory frames differ in joint count");
    if (keyframe_indices.empty() || keyframe_indices.front() != 0 ||
        keyframe_indices.back() != frames.size() - 1)
      throw StructuralError("keyframe indices must start at 0 and end at the last frame");
    for (std::size_t i = 1; i < keyframe_indices.size(); ++i)
      if (keyframe_indices[i] <= keyframe_indices[i - 1])
        throw StructuralError("keyframe indices must be strictly increasing", static_cast<long>(i));
  }
};

inline std::size_t frame_count(std::size_t n_keyframes, std::size_t c) {
  return n_keyframes == 0 ? 0 : n_keyframes + c * (n_keyframes - 1);
}

// ---------------------------------------------------------------------------
// Token maps.

/// Ease exponent applied to the in-between parameter: u -> u^e.
inline double speed_exponent(Speed s) {
  switch (s) {
    case Speed::very_fast: return 0.5;
    case Speed::fast: return 0.75;
    case Speed::average_pace: return 1.0;
    case Speed::slow: return 1.5;
    case Speed::unspecified: return 1.0;
  }
  return 1.0;
}

/// Root displacement of one move primitive, meters.
inline double move_distance(Magnitude m) {
  switch (m) {
    case Magnitude::greatly: return 1.0;
    case Magnitude::way_over: return 0.75;
    case Magnitude::slightly: return 0.25;
    case Magnitude::unspecified: return 0.5;
  }
  return 0.5;
}

/// Heading change of one turn primitive, radians.
inline double turn_angle(Magnitude m) {
  switch (m) {
    case Magnitude::greatly: return kPi;
    case Magnitude::way_over: return 0.75 * kPi;
    case Magnitude::slightly: return 0.25 * kPi;
    case Magnitude::unspecified: return 0.5 * kPi;
  }
  return 0.5 * kPi;
}

/// Horizontal unit vectors of a root orientation: facing direction and the
/// character's left.
inline std::pair<Vec3, Vec3> heading_axes(const Vec3& root_orientation) {
  Vec3 fwd = exp_so3(root_orientation) * Vec3::UnitZ();
  fwd.y() = 0.0;
  if (fwd.norm() < 1e-9) fwd = Vec3::UnitZ();
  fwd.normalize();
  const Vec3 left = Vec3::UnitY().cross(fwd);
  return {fwd, left};
}

inline bool moves_root(const MotionPrimitive& p) {
  return p.subject.size() == 1 && p.subject.front() == kRootSubject;
}

/// World displacement of a root move primitive given the heading at its start.
inline Vec3 move_vector(const MotionPrimitive& p, const Vec3& root_orientation) {
  if (p.kind != MotionKind::move_direction || !p.direction || !moves_root(p)) return Vec3::Zero();
  const auto [fwd, left] = heading_axes(root_orientation);
  const double d = move_distance(p.magnitude);
  switch (*p.direction) {
    case Direction::forward: return d * fwd;
    case Direction::backward: return -d * fwd;
    case Direction::left: return d * left;
    case Direction::right: return -d * left;
    default: return Vec3::Zero();
  }
}

/// Signed heading change of a root turn primitive (counterclockwise positive).
inline double turn_vector(const MotionPrimitive& p) {
  if (p.kind != MotionKind::turn || !p.direction || !moves_root(p)) return 0.0;
  const double a = turn_angle(p.magnitude);
  return *p.direction == Direction::counterclockwise ? a : -a;
}

/// Total root displacement a transition script asks for.
inline Vec3 script_displacement(const MotionScriptAST& a, const Vec3& root_orientation) {
  Vec3 d = Vec3::Zero();
  for (const auto& phase : a.phases)
    for (const auto& p : phase) d += move_vector(p, root_orientation);
  return d;
}

/// Total heading change a transition script asks for.
inline double script_turn(const MotionScriptAST& a) {
  double t = 0.0;
  for (const auto& phase : a.phases)
    for (const auto& p : phase) t += turn_vector(p);
  return t;
}

// ---------------------------------------------------------------------------
// Hermite curves.

inline double hermite(double p0, double p1, double m0, double m1, double u) {
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * p1 +
         (u3 - u2) * m1;
}

/// Catmull-Rom tangent at a keyframe (unit parameter spacing), clamped so the
/// segment cannot overshoot: zero at local extrema and at most three times
/// the smaller adjacent difference.
inline double clamped_tangent(double prev, double cur, double next) {
  const double dl = cur - prev, dr = next - cur;
  if (dl * dr <= 0.0) return 0.0;
  double m = 0.5 * (next - prev);
  const double cap = 3.0 * std::min(std::abs(dl), std::abs(dr));
  if (std::abs(m) > cap) m = m > 0 ? cap : -cap;
  return m;
}

/// Optional neighbours supplying tangents; without them the tangent is zero.
struct Neighbours {
  const Configuration* prev = nullptr;  // keyframe before x_i
  const Configuration* next = nullptr;  // keyframe after x_next
};

namespace detail {

/// Per-joint activity window inside [0, 1] from the phases that mention the
/// joint; joints that no primitive names move over the whole gap.
inline std::vector<std::pair<double, double>> joint_windows(std::size_t joints,
                                                            const Skeleton* skel,
                                                            const MotionScriptAST* motion) {
  std::vector<std::pair<double, double>> w(joints, {0.0, 1.0});
  if (!motion || motion->phases.empty() || !skel) return w;
  const double n = static_cast<double>(motion->phases.size());
  std::vector<std::pair<double, double>> seen(joints, {2.0, -1.0});
  for (std::size_t p = 0; p < motion->phases.size(); ++p)
    for (const auto& prim : motion->phases[p]) {
      if (prim.kind != MotionKind::posecode_change) continue;
      for (const auto& s : prim.subject) {
        const int j = skel->find(s);
        if (j <= 0) continue;
        seen[j].first = std::min(seen[j].first, p / n);
        seen[j].second = std::max(seen[j].second, (p + 1) / n);
      }
    }
  for (std::size_t j = 0; j < joints; ++j)
    if (seen[j].first <= seen[j].second) w[j] = seen[j];
  return w;
}

/// Ease exponent of a phase: the fastest speed token among its primitives.
inline double phase_exponent(const std::vector<MotionPrimitive>& phase) {
  double e = 1.0;
  bool any = false;
  for (const auto& p : phase)
    if (p.speed != Speed::unspecified) {
      e = any ? std::min(e, speed_exponent(p.speed)) : speed_exponent(p.speed);
      any = true;
    }
  return e;
}

/// Gap-level ease exponent: the fastest speed named anywhere in the script.
inline double gap_exponent(const MotionScriptAST* motion) {
  if (!motion) return 1.0;
  double e = 1.0;
  bool any = false;
  for (const auto& phase : motion->phases)
    for (const auto& p : phase)
      if (p.speed != Speed::unspecified) {
        e = any ? std::min(e, speed_exponent(p.speed)) : speed_exponent(p.speed);
        any = true;
      }
  return e;
}

inline double window_param(double lambda, std::pair<double, double> w, double exponent) {
  const double width = w.second - w.first;
  double u = width > 0 ? (lambda - w.first) / width : (lambda >= w.second ? 1.0 : 0.0);
  u = std::clamp(u, 0.0, 1.0);
  return std::pow(u, exponent);
}

/// Cumulative phase displacement/turn at gap parameter lambda.
inline std::pair<Vec3, double> phase_progress(const MotionScriptAST& motion, const Vec3& root_orientation,
                                              double lambda) {
  Vec3 d = Vec3::Zero();
  double turn = 0.0;
  const double n = static_cast<double>(motion.phases.size());
  for (std::size_t p = 0; p < motion.phases.size(); ++p) {
    const double a = p / n, b = (p + 1) / n;
    const double u = window_param(lambda, {a, b}, phase_exponent(motion.phases[p]));
    for (const auto& prim : motion.phases[p]) {
      d += u * move_vector(prim, root_orientation);
      turn += u * turn_vector(prim);
    }
  }
  return {d, turn};
}

}  // namespace detail

/// C in-between frames at lambda = k / (C + 1), endpoints excluded. Joint
/// rotation vectors follow clamped-tangent Hermite curves (slerp when a joint
/// turns by more than pi); the root follows the script's phased moves.
inline std::vector<Configuration> interpolate(const Configuration& x_i, const Configuration& x_next,
                                              std::size_t C, const MotionScriptAST* motion = nullptr,
                                              const Skeleton* skel = nullptr, Neighbours nb = {}) {
  if (x_i.size() != x_next.size()) throw DimensionError("keyframes differ in joint count");
  if (nb.prev && nb.prev->size() != x_i.size()) throw DimensionError("previous keyframe joint count");
  if (nb.next && nb.next->size() != x_i.size()) throw DimensionError("next keyframe joint count");
  std::vector<Configuration> out;
  if (C == 0) return out;
  if (x_i == x_next && (!motion || motion->primitive_count() == 0)) return std::vector<Configuration>(C, x_i);

  const std::size_t J = x_i.size();
  const auto windows = detail::joint_windows(J, skel, motion);
  const double ease = detail::gap_exponent(motion);

  // Tangents per joint component at both ends.
  Eigen::Matrix<double, Eigen::Dynamic, 3> m0 = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(J, 3);
  Eigen::Matrix<double, Eigen::Dynamic, 3> m1 = m0;
  for (std::size_t j = 1; j < J; ++j)
    for (int k = 0; k < 3; ++k) {
      if (nb.prev) m0(j, k) = clamped_tangent((*nb.prev).joint_rotations(j, k), x_i.joint_rotations(j, k),
                                              x_next.joint_rotations(j, k));
      if (nb.next) m1(j, k) = clamped_tangent(x_i.joint_rotations(j, k), x_next.joint_rotations(j, k),
                                              (*nb.next).joint_rotations(j, k));
    }

  const bool scripted = motion && !motion->phases.empty();
  const Vec3 total_d = scripted ? script_displacement(*motion, x_i.root_orientation) : Vec3::Zero();
  const double total_turn = scripted ? script_turn(*motion) : 0.0;

  // Root tangents, used when the script does not move the root.
  const bool root_scripted = scripted && !(total_d.isZero() && total_turn == 0.0);
  Vec3 root_m0 = Vec3::Zero(), root_m1 = Vec3::Zero(), rot_m0 = Vec3::Zero(), rot_m1 = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    if (nb.prev) {
      root_m0[k] = clamped_tangent(nb.prev->root_position[k], x_i.root_position[k], x_next.root_position[k]);
      rot_m0[k] = clamped_tangent(nb.prev->root_orientation[k], x_i.root_orientation[k], x_next.root_orientation[k]);
    }
    if (nb.next) {
      root_m1[k] = clamped_tangent(x_i.root_position[k], x_next.root_position[k], nb.next->root_position[k]);
      rot_m1[k] = clamped_tangent(x_i.root_orientation[k], x_next.root_orientation[k], nb.next->root_orientation[k]);
    }
  }
  const bool rot_hermite = !root_scripted && (x_next.root_orientation - x_i.root_orientation).norm() <= kPi;

  out.reserve(C);
  for (std::size_t c = 1; c <= C; ++c) {
    const double lambda = static_cast<double>(c) / static_cast<double>(C + 1);
    Configuration q(J);
    for (std::size_t j = 1; j < J; ++j) {
      const Vec3 a = x_i.rotation(static_cast<int>(j));
      const Vec3 b = x_next.rotation(static_cast<int>(j));
      const double width = windows[j].second - windows[j].first;
      const bool named = !(windows[j].first == 0.0 && windows[j].second == 1.0);
      const double u = detail::window_param(lambda, windows[j], named ? 1.0 : ease);
      if ((b - a).norm() > kPi) {
        const double s = hermite(0.0, 1.0, 0.0, 0.0, u);
        q.set_rotation(static_cast<int>(j), slerp_rotvec(a, b, s));
        continue;
      }
      for (int k = 0; k < 3; ++k)
        q.joint_rotations(j, k) = hermite(a[k], b[k], m0(j, k) * width, m1(j, k) * width, u);
    }

    const double s = std::pow(lambda, ease);
    Vec3 turn_offset = Vec3::Zero();
    if (!root_scripted) {
      for (int k = 0; k < 3; ++k)
        q.root_position[k] = hermite(x_i.root_position[k], x_next.root_position[k], root_m0[k], root_m1[k], s);
    } else {
      q.root_position = (1 - s) * x_i.root_position + s * x_next.root_position;
      const auto [d, t] = detail::phase_progress(*motion, x_i.root_orientation, lambda);
      q.root_position += d - s * total_d;
      turn_offset = Vec3(0, t - s * total_turn, 0);
    }
    Vec3 base = x_i.root_orientation;
    if (rot_hermite) {
      for (int k = 0; k < 3; ++k)
        base[k] = hermite(x_i.root_orientation[k], x_next.root_orientation[k], rot_m0[k], rot_m1[k], s);
    } else if (x_i.root_orientation != x_next.root_orientation) {
      base = slerp_rotvec(x_i.root_orientation, x_next.root_orientation, s);
    }
    q.root_orientation = turn_offset.isZero() ? base : log_so3(exp_so3(turn_offset) * exp_so3(base));
    out.push_back(std::move(q));
  }
  return out;
}

/// Interleaves keyframes with C in-betweens per gap: N + C (N - 1) frames.
inline Trajectory assemble(const std::vector<Configuration>& keyframes,
                           const std::vector<MotionScriptAST>& motions, std::size_t C, double dt,
                           const Skeleton* skel = nullptr) {
  if (keyframes.size() < 2) throw StructuralError("assemble needs at least two keyframes");
  if (motions.size() != keyframes.size() - 1 && !motions.empty())
    throw StructuralError("expected " + std::to_string(keyframes.size() - 1) + " motions, got " +
                          std::to_string(motions.size()));
  Trajectory t;
  t.dt = dt;
  t.frames.reserve(frame_count(keyframes.size(), C));
  for (std::size_t i = 0; i + 1 < keyframes.size(); ++i) {
    t.keyframe_indices.push_back(t.frames.size());
    t.frames.push_back(keyframes[i]);
    Neighbours nb;
    if (i > 0) nb.prev = &keyframes[i - 1];
    if (i + 2 < keyframes.size()) nb.next = &keyframes[i + 2];
    auto mid = interpolate(keyframes[i], keyframes[i + 1], C, motions.empty() ? nullptr : &motions[i], skel, nb);
    for (auto& f : mid) t.frames.push_back(std::move(f));
  }
  t.keyframe_indices.push_back(t.frames.size());
  t.frames.push_back(keyframes.back());
  t.validate();
  return t;
}

/// Shifts every non-keyframe frame vertically so its lowest link sample
/// touches the ground.
inline void ground_inbetweens(Trajectory& t, const Skeleton& skel) {
  std::size_t next_key = 0;
  for (std::size_t k = 0; k < t.frames.size(); ++k) {
    if (next_key < t.keyframe_indices.size() && t.keyframe_indices[next_key] == k) {
      ++next_key;
      continue;
    }
    t.frames[k] = grounded(skel, t.frames[k]);
  }
}

// ---------------------------------------------------------------------------
// Refinement.

struct RefineOptions {
  int iterations = 500;
  double step = 1e-2;
  double gradient_tolerance = 1e-6;
  double smoothness = 1.0;  // weight on second differences of the correction
};

struct RefineReport {
  double g_j_before = 0.0;
  double g_j_after = 0.0;
  int iterations = 0;
};

/// Summed joint-limit penalty over all frames, weighted by w3.
inline double trajectory_g_j(const Trajectory& t, const Skeleton& skel, const ConstraintWeights& w) {
  double s = 0.0;
  for (const auto& f : t.frames) s += f_r(skel, f);
  return w.w3 * s;
}

/// Projected gradient descent on w3 g_j plus the second-difference energy of
/// the correction away from the input. Keyframes never move; each iterate is
/// clamped into the joint limits.
inline Trajectory refine_trajectory(const Trajectory& input, const Skeleton& skel, const ConstraintWeights& w,
                                    const RefineOptions& opt = {}, RefineReport* report = nullptr) {
  input.validate();
  for (const auto& f : input.frames) check_dimensions(skel, f);
  const std::size_t K = input.frames.size();
  const int D = skel.joint_dof_count();
  const int R = skel.root_dof_count();

  std::vector<char> fixed(K, 0);
  for (std::size_t k : input.keyframe_indices) fixed[k] = 1;

  MatX x0(D, K);
  VecX lo(D), hi(D);
  for (std::size_t k = 0; k < K; ++k) x0.col(k) = to_generalized(skel, input.frames[k]).tail(D);
  for (std::size_t j = 1, n = 0; j < skel.size(); ++j)
    for (int c = 0; c < skel.joints[j].dofs; ++c, ++n) {
      lo[n] = skel.joints[j].limits[c].lo;
      hi[n] = skel.joints[j].limits[c].hi;
    }

  MatX x = x0;
  RefineReport rep;
  rep.g_j_before = trajectory_g_j(input, skel, w);
  int it = 0;
  for (; it < opt.iterations; ++it) {
    MatX grad = MatX::Zero(D, K);
    for (std::size_t k = 0; k < K; ++k) {
      if (fixed[k]) continue;
      for (int n = 0; n < D; ++n)
        grad(n, k) = w.w3 * (sigma_dv(hi[n], x(n, k)) - sigma_dv(x(n, k), lo[n]));
    }
    if (opt.smoothness > 0.0 && K >= 3) {
      const MatX e = x - x0;
      for (std::size_t k = 1; k + 1 < K; ++k) {
        const VecX d2 = e.col(k + 1) - 2.0 * e.col(k) + e.col(k - 1);
        grad.col(k - 1) += 2.0 * opt.smoothness * d2;
        grad.col(k) -= 4.0 * opt.smoothness * d2;
        grad.col(k + 1) += 2.0 * opt.smoothness * d2;
      }
      for (std::size_t k = 0; k < K; ++k)
        if (fixed[k]) grad.col(k).setZero();
    }
    MatX nx = x - opt.step * grad;
    for (std::size_t k = 0; k < K; ++k) {
      if (fixed[k]) continue;
      nx.col(k) = nx.col(k).cwiseMax(lo).cwiseMin(hi);
    }
    const double moved = (nx - x).norm() / opt.step;
    if (moved < opt.gradient_tolerance) break;
    x = nx;
  }

  Trajectory out = input;
  for (std::size_t k = 0; k < K; ++k) {
    if (fixed[k]) continue;
    VecX g = to_generalized(skel, input.frames[k]);
    g.tail(D) = x.col(k);
    out.frames[k] = from_generalized(skel, g, &input.frames[k]);
    if (R == 0) {
      out.frames[k].root_position = input.frames[k].root_position;
      out.frames[k].root_orientation = input.frames[k].root_orientation;
    }
  }
  rep.iterations = it;
  rep.g_j_after = trajectory_g_j(out, skel, w);
  if (report) *report = rep;
  return out;
}

// ---------------------------------------------------------------------------
// JSON-lines motion files.

inline void write_motion(std::ostream& os, const Trajectory& t) {
  t.validate();
  const std::size_t J = t.frames.front().size();
  nlohmann::json header{{"dt", t.dt}, {"J", J}, {"keyframes", t.keyframe_indices}};
  os << header.dump() << '\n';
  for (std::size_t k = 0; k < t.frames.size(); ++k) {
    const auto& f = t.frames[k];
    nlohmann::json joints = nlohmann::json::array();
    for (std::size_t j = 0; j < J; ++j)
      joints.push_back({f.joint_rotations(j, 0), f.joint_rotations(j, 1), f.joint_rotations(j, 2)});
    nlohmann::json line{
        {"t", static_cast<double>(k) * t.dt},
        {"root_pos", {f.root_position.x(), f.root_position.y(), f.root_position.z()}},
        {"root_rot", {f.root_orientation.x(), f.root_orientation.y(), f.root_orientation.z()}},
        {"joints", joints}};
    os << line.dump() << '\n';
  }
}

inline std::string motion_to_string(const Trajectory& t) {
  std::ostringstream os;
  write_motion(os, t);
  return os.str();
}

inline Trajectory read_motion(std::istream& is) {
  Trajectory t;
  std::string line;
  std::size_t offset = 0;
  std::size_t J = 0;
  bool have_header = false;
  auto vec3 = [](const nlohmann::json& a) {
    if (!a.is_array() || a.size() != 3) throw StructuralError("expected a 3-vector");
    return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  };
  while (std::getline(is, line)) {
    const std::size_t start = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed motion line: ") + e.what(), start + json_error_offset(e.byte));
    }
    try {
      if (!have_header) {
        t.dt = j.at("dt").get<double>();
        J = j.at("J").get<std::size_t>();
        t.keyframe_indices = j.at("keyframes").get<std::vector<std::size_t>>();
        have_header = true;
        continue;
      }
      Configuration q(J);
      q.root_position = vec3(j.at("root_pos"));
      q.root_orientation = vec3(j.at("root_rot"));
      const auto& joints = j.at("joints");
      if (joints.size() != J) throw DimensionError("motion frame joint count differs from header");
      for (std::size_t n = 0; n < J; ++n) q.set_rotation(static_cast<int>(n), vec3(joints[n]));
      t.frames.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      throw StructuralError(std::string("motion file: ") + e.what());
    }
  }
  if (!have_header) throw StructuralError("motion file has no header");
  t.validate();
  return t;
}

}  // namespace behaviorplan
