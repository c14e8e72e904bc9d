#pragma once

// Reduced SMPL-topology kinematic tree. Up axis is +Y, the ground is y = 0,
// the character faces +Z and its left is +X. Joint rotations are axis-angle
// rotation vectors; hinge joints (one DOF) store theta * axis.

#include "behaviorplan/data/skeleton_json.hpp"
#include "behaviorplan/errors.hpp"
#include "behaviorplan/math.hpp"
#include "behaviorplan/posecode.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace behaviorplan {

/// Ground-contact tolerance in meters, shared with the Phys-Err metrics.
inline constexpr double kContactTolerance = 0.005;

struct DofLimit {
  double lo = 0.0;
  double hi = 0.0;
};

struct JointDef {
  std::string name;
  int parent = -1;
  Vec3 offset = Vec3::Zero();  // in the parent frame, meters
  int dofs = 3;                // 0 (root or welded), 1 (hinge) or 3 (ball)
  Vec3 axis = Vec3::UnitX();   // hinge axis, unit length
  std::vector<DofLimit> limits;
  double max_velocity = 1.0;      // rad/s
  double max_acceleration = 1.0;  // rad/s^2
  double torque_limit = 0.0;      // N*m
};

/// Capsule between joints a and b, rigidly attached to the body of joint a.
/// a == b gives a sphere centered on the joint.
struct LinkDef {
  int a = 0;
  int b = 0;
  double radius = 0.0;
  double mass = 0.0;
  bool point_mass = false;  // mass concentrated at b (test rigs)
};

struct Skeleton {
  std::vector<JointDef> joints;
  std::vector<LinkDef> links;
  std::vector<int> feet;
  std::vector<std::array<int, 2>> distance_pairs;
  double shoulder_width = 0.4;
  bool fixed_root = false;

  std::size_t size() const { return joints.size(); }

  int find(const std::string& name) const {
    for (std::size_t j = 0; j < joints.size(); ++j)
      if (joints[j].name == name) return static_cast<int>(j);
    return -1;
  }
  int index_of(const std::string& name) const {
    const int j = find(name);
    if (j < 0) throw Error("unknown joint '" + name + "'");
    return j;
  }
  bool is_hinge(int j) const { return joints[j].dofs == 1; }

  /// Joint DOFs excluding the root.
  int joint_dof_count() const {
    int n = 0;
    for (std::size_t j = 1; j < joints.size(); ++j) n += joints[j].dofs;
    return n;
  }
  int root_dof_count() const { return fixed_root ? 0 : 6; }
  /// Generalized coordinate count: root pose plus joint DOFs.
  int dof_count() const { return root_dof_count() + joint_dof_count(); }
  /// First generalized coordinate of joint j (j >= 1).
  int dof_offset(int j) const {
    int n = root_dof_count();
    for (int k = 1; k < j; ++k) n += joints[k].dofs;
    return n;
  }
  double total_mass() const {
    double m = 0.0;
    for (const auto& l : links) m += l.mass;
    return m;
  }
  bool is_foot_link(const LinkDef& l) const {
    for (int f : feet)
      if (l.a == f || l.b == f) return true;
    return false;
  }

  void validate() const;
  static Skeleton from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Root transform plus one rotation vector per joint. Row 0 of
/// joint_rotations belongs to the root and is ignored; the root uses
/// root_orientation.
struct Configuration {
  Vec3 root_position = Vec3::Zero();
  Vec3 root_orientation = Vec3::Zero();
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> joint_rotations;

  Configuration() = default;
  explicit Configuration(std::size_t joints) {
    joint_rotations.setZero(static_cast<Eigen::Index>(joints), 3);
  }
  std::size_t size() const { return static_cast<std::size_t>(joint_rotations.rows()); }
  Vec3 rotation(int j) const { return joint_rotations.row(j).transpose(); }
  void set_rotation(int j, const Vec3& r) { joint_rotations.row(j) = r.transpose(); }
  bool operator==(const Configuration& o) const {
    return root_position == o.root_position && root_orientation == o.root_orientation &&
           joint_rotations == o.joint_rotations;
  }
  bool all_finite() const {
    return root_position.allFinite() && root_orientation.allFinite() &&
           joint_rotations.allFinite();
  }
};

struct WorldPose {
  std::vector<Vec3> positions;
  std::vector<Mat3> orientations;
};

// ---------------------------------------------------------------------------

inline void Skeleton::validate() const {
  if (joints.empty()) throw StructuralError("skeleton has no joints");
  if (joints[0].parent != -1) throw StructuralError("joint 0 must be the root", 0);
  for (std::size_t j = 1; j < joints.size(); ++j) {
    const auto& d = joints[j];
    if (d.parent < 0 || d.parent >= static_cast<int>(j))
      throw StructuralError("joint '" + d.name + "' must follow its parent", static_cast<long>(j));
    if (d.dofs != 0 && d.dofs != 1 && d.dofs != 3)
      throw StructuralError("joint '" + d.name + "' must have 0, 1 or 3 DOFs", static_cast<long>(j));
    if (static_cast<int>(d.limits.size()) != d.dofs)
      throw StructuralError("joint '" + d.name + "' needs one limit pair per DOF",
                            static_cast<long>(j));
    for (const auto& l : d.limits)
      if (!(l.lo < l.hi))
        throw StructuralError("joint '" + d.name + "' has an empty limit range", static_cast<long>(j));
    if (!(d.max_velocity > 0.0) || !(d.max_acceleration > 0.0))
      throw StructuralError("joint '" + d.name + "' needs positive rate limits", static_cast<long>(j));
    if (d.dofs == 1 && std::abs(d.axis.norm() - 1.0) > 1e-9)
      throw StructuralError("hinge '" + d.name + "' axis must be unit length", static_cast<long>(j));
  }
  for (std::size_t k = 0; k < links.size(); ++k) {
    const auto& l = links[k];
    const int n = static_cast<int>(joints.size());
    if (l.a < 0 || l.a >= n || l.b < 0 || l.b >= n)
      throw StructuralError("link references an unknown joint", static_cast<long>(k));
    if (l.b != l.a && joints[l.b].parent != l.a)
      throw StructuralError("link must join a joint to its child", static_cast<long>(k));
    if (!(l.mass > 0.0)) throw StructuralError("link mass must be positive", static_cast<long>(k));
    if (l.radius < 0.0) throw StructuralError("link radius must be non-negative", static_cast<long>(k));
  }
  if (!(shoulder_width > 0.0)) throw StructuralError("shoulder_width must be positive");
}

inline Skeleton Skeleton::from_json(const nlohmann::json& doc) {
  Skeleton s;
  try {
    s.fixed_root = doc.value("fixed_root", false);
    s.shoulder_width = doc.value("shoulder_width", 0.4);
    auto vec3 = [](const nlohmann::json& a) {
      return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
    };
    for (const auto& jj : doc.at("joints")) {
      JointDef d;
      d.name = jj.at("name").get<std::string>();
      if (!jj.at("parent").is_null()) d.parent = s.index_of(jj.at("parent").get<std::string>());
      d.offset = vec3(jj.at("offset"));
      d.dofs = jj.value("dofs", 3);
      if (jj.contains("axis")) d.axis = vec3(jj.at("axis")).normalized();
      for (const auto& l : jj.value("limits", nlohmann::json::array()))
        d.limits.push_back({l.at(0).get<double>(), l.at(1).get<double>()});
      d.max_velocity = jj.value("max_velocity", 12.0);
      d.max_acceleration = jj.value("max_acceleration", 150.0);
      d.torque_limit = jj.value("torque_limit", 100.0);
      s.joints.push_back(std::move(d));
    }
    for (const auto& ll : doc.at("links")) {
      LinkDef l;
      l.a = s.index_of(ll.at("a").get<std::string>());
      l.b = s.index_of(ll.at("b").get<std::string>());
      l.radius = ll.value("radius", 0.0);
      l.mass = ll.at("mass").get<double>();
      l.point_mass = ll.value("point_mass", false);
      s.links.push_back(l);
    }
    for (const auto& f : doc.value("feet", nlohmann::json::array()))
      s.feet.push_back(s.index_of(f.get<std::string>()));
    for (const auto& p : doc.value("distance_pairs", nlohmann::json::array()))
      s.distance_pairs.push_back({s.index_of(p.at(0).get<std::string>()),
                                  s.index_of(p.at(1).get<std::string>())});
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("skeleton: ") + e.what());
  }
  s.validate();
  return s;
}

inline nlohmann::json Skeleton::to_json() const {
  nlohmann::json doc;
  doc["fixed_root"] = fixed_root;
  doc["shoulder_width"] = shoulder_width;
  for (int f : feet) doc["feet"].push_back(joints[f].name);
  doc["distance_pairs"] = nlohmann::json::array();
  for (const auto& p : distance_pairs)
    doc["distance_pairs"].push_back({joints[p[0]].name, joints[p[1]].name});
  for (const auto& d : joints) {
    nlohmann::json jj;
    jj["name"] = d.name;
    jj["parent"] = d.parent < 0 ? nlohmann::json(nullptr) : nlohmann::json(joints[d.parent].name);
    jj["offset"] = {d.offset.x(), d.offset.y(), d.offset.z()};
    jj["dofs"] = d.dofs;
    if (d.dofs == 1) jj["axis"] = {d.axis.x(), d.axis.y(), d.axis.z()};
    jj["limits"] = nlohmann::json::array();
    for (const auto& l : d.limits) jj["limits"].push_back({l.lo, l.hi});
    jj["max_velocity"] = d.max_velocity;
    jj["max_acceleration"] = d.max_acceleration;
    jj["torque_limit"] = d.torque_limit;
    doc["joints"].push_back(jj);
  }
  for (const auto& l : links) {
    nlohmann::json ll{{"a", joints[l.a].name}, {"b", joints[l.b].name},
                      {"radius", l.radius}, {"mass", l.mass}};
    if (l.point_mass) ll["point_mass"] = true;
    doc["links"].push_back(ll);
  }
  return doc;
}

inline const Skeleton& default_skeleton() {
  static const Skeleton s = Skeleton::from_json(nlohmann::json::parse(data::kSkeletonJson));
  return s;
}

inline Configuration zero_configuration(const Skeleton& skel) {
  return Configuration(skel.size());
}

// ---------------------------------------------------------------------------
// Per-DOF access. Hinge DOF value is the rotation vector projected on the axis.

inline double dof_value(const Skeleton& skel, const Configuration& q, int j, int k) {
  const auto& d = skel.joints[j];
  if (d.dofs == 1) return q.rotation(j).dot(d.axis);
  return q.joint_rotations(j, k);
}

inline void set_dof_value(const Skeleton& skel, Configuration& q, int j, int k, double v) {
  const auto& d = skel.joints[j];
  if (d.dofs == 1) q.set_rotation(j, v * d.axis);
  else q.joint_rotations(j, k) = v;
}

inline void check_dimensions(const Skeleton& skel, const Configuration& q) {
  if (q.size() != skel.size())
    throw DimensionError("configuration has " + std::to_string(q.size()) +
                         " joints, skeleton has " + std::to_string(skel.size()));
}

/// Clamps every DOF into its limits and drops off-axis hinge components.
inline Configuration clamp_to_limits(const Skeleton& skel, Configuration q) {
  for (std::size_t j = 1; j < skel.size(); ++j) {
    const auto& d = skel.joints[j];
    for (int k = 0; k < d.dofs; ++k) {
      const double v = dof_value(skel, q, static_cast<int>(j), k);
      set_dof_value(skel, q, static_cast<int>(j), k, std::clamp(v, d.limits[k].lo, d.limits[k].hi));
    }
  }
  return q;
}

/// Generalized coordinates: [root position, root rotation vector] (unless the
/// root is fixed) followed by every joint's DOFs.
inline VecX to_generalized(const Skeleton& skel, const Configuration& q) {
  check_dimensions(skel, q);
  VecX g(skel.dof_count());
  int n = 0;
  if (!skel.fixed_root) {
    g.segment<3>(0) = q.root_position;
    g.segment<3>(3) = q.root_orientation;
    n = 6;
  }
  for (std::size_t j = 1; j < skel.size(); ++j)
    for (int k = 0; k < skel.joints[j].dofs; ++k) g[n++] = dof_value(skel, q, static_cast<int>(j), k);
  return g;
}

/// Inverse of to_generalized. With a fixed root, `root_from` supplies the
/// root transform.
inline Configuration from_generalized(const Skeleton& skel, const VecX& g,
                                      const Configuration* root_from = nullptr) {
  if (g.size() != skel.dof_count()) throw DimensionError("generalized vector size mismatch");
  Configuration q(skel.size());
  int n = 0;
  if (!skel.fixed_root) {
    q.root_position = g.segment<3>(0);
    q.root_orientation = g.segment<3>(3);
    n = 6;
  } else if (root_from) {
    q.root_position = root_from->root_position;
    q.root_orientation = root_from->root_orientation;
  }
  for (std::size_t j = 1; j < skel.size(); ++j)
    for (int k = 0; k < skel.joints[j].dofs; ++k) set_dof_value(skel, q, static_cast<int>(j), k, g[n++]);
  return q;
}

// ---------------------------------------------------------------------------

inline WorldPose forward_kinematics(const Skeleton& skel, const Configuration& q) {
  check_dimensions(skel, q);
  WorldPose w;
  w.positions.resize(skel.size());
  w.orientations.resize(skel.size());
  w.positions[0] = q.root_position;
  w.orientations[0] = exp_so3(q.root_orientation);
  for (std::size_t j = 1; j < skel.size(); ++j) {
    const auto& d = skel.joints[j];
    const Mat3& rp = w.orientations[d.parent];
    w.positions[j] = w.positions[d.parent] + rp * d.offset;
    w.orientations[j] = rp * exp_so3(q.rotation(static_cast<int>(j)));
  }
  return w;
}

/// The eight surface samples of a link: each endpoint offset by +/- radius
/// along two directions orthogonal to the capsule axis. The first direction is
/// the component of world down orthogonal to the axis when it exists.
inline std::array<Vec3, 8> link_samples(const LinkDef& l, const WorldPose& w) {
  const Vec3 pa = w.positions[l.a];
  const Vec3 pb = w.positions[l.b];
  Vec3 axis = pb - pa;
  Vec3 u, v;
  if (axis.norm() < 1e-9) {
    u = Vec3::UnitY();
    v = Vec3::UnitX();
  } else {
    axis.normalize();
    u = Vec3::UnitY() - Vec3::UnitY().dot(axis) * axis;
    if (u.norm() < 1e-6) {
      u = Vec3::UnitX() - Vec3::UnitX().dot(axis) * axis;
    }
    u.normalize();
    v = axis.cross(u);
  }
  const double r = l.radius;
  return {pa + r * u, pa - r * u, pa + r * v, pa - r * v,
          pb + r * u, pb - r * u, pb + r * v, pb - r * v};
}

/// Lowest sample height over all links (or only foot links).
inline double lowest_height(const Skeleton& skel, const WorldPose& w, bool feet_only = false) {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& l : skel.links) {
    if (feet_only && !skel.is_foot_link(l)) continue;
    for (const Vec3& p : link_samples(l, w)) h = std::min(h, p.y());
  }
  return h;
}

/// Shifts the root vertically so the lowest link sample touches y = 0.
inline Configuration grounded(const Skeleton& skel, Configuration q) {
  const double h = lowest_height(skel, forward_kinematics(skel, q));
  q.root_position.y() -= h;
  return q;
}

// ---------------------------------------------------------------------------
// Posecode bins.

struct Bin {
  const char* token;
  double lo;
  double hi;
};

/// Angle posecode bins in degrees of bend; they partition [0, 180].
inline constexpr std::array<Bin, 6> kAngleBins = {{
    {"straight", 0.0, 25.0},
    {"slightly bent", 25.0, 65.0},
    {"partially bent", 65.0, 85.0},
    {"bent at a right angle", 85.0, 95.0},
    {"almost completely bent", 95.0, 135.0},
    {"completely bent", 135.0, 180.0},
}};

/// Distance posecode bins in shoulder-width units.
inline constexpr std::array<Bin, 4> kDistanceBins = {{
    {"close", 0.0, 0.5},
    {"shoulder width apart", 0.5, 1.5},
    {"spread", 1.5, 2.5},
    {"wide apart", 2.5, std::numeric_limits<double>::infinity()},
}};

/// Target used by the solver for the open-ended "wide apart" bin.
inline constexpr double kWideApartTarget = 3.0;

inline std::optional<Bin> angle_bin(const std::string& token) {
  for (const auto& b : kAngleBins)
    if (token == b.token) return b;
  return std::nullopt;
}
inline std::optional<Bin> distance_bin(const std::string& token) {
  for (const auto& b : kDistanceBins)
    if (token == b.token) return b;
  return std::nullopt;
}

inline const char* classify_angle(double degrees) {
  for (std::size_t i = 0; i + 1 < kAngleBins.size(); ++i)
    if (degrees < kAngleBins[i].hi) return kAngleBins[i].token;
  return kAngleBins.back().token;
}
inline const char* classify_distance(double shoulder_units) {
  for (std::size_t i = 0; i + 1 < kDistanceBins.size(); ++i)
    if (shoulder_units < kDistanceBins[i].hi) return kDistanceBins[i].token;
  return kDistanceBins.back().token;
}

/// Bend angle of a hinge joint in degrees, folded into [0, 180].
inline double bend_degrees(const Skeleton& skel, const Configuration& q, int j) {
  double deg = std::abs(rad2deg(dof_value(skel, q, j, 0)));
  deg = std::fmod(deg, 360.0);
  return deg > 180.0 ? 360.0 - deg : deg;
}

inline double foot_height(const Skeleton& skel, const WorldPose& w, int foot) {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& l : skel.links)
    if (l.a == foot || l.b == foot)
      for (const Vec3& p : link_samples(l, w)) h = std::min(h, p.y());
  if (!std::isfinite(h)) h = w.positions[foot].y();
  return h;
}

/// Maps a configuration back to posecodes: angle codes for every hinge,
/// distance codes for the configured joint pairs, and ground contact for feet
/// within the contact tolerance.
inline PoseScriptAST classify_posecodes(const Skeleton& skel, const Configuration& q) {
  const WorldPose w = forward_kinematics(skel, q);
  PoseScriptAST ast;
  for (std::size_t j = 1; j < skel.size(); ++j)
    if (skel.is_hinge(static_cast<int>(j)))
      ast.statements.push_back({{skel.joints[j].name},
                                {Category::angle, classify_angle(bend_degrees(skel, q, static_cast<int>(j)))}});
  for (const auto& p : skel.distance_pairs) {
    const double d = (w.positions[p[0]] - w.positions[p[1]]).norm() / skel.shoulder_width;
    ast.statements.push_back({{skel.joints[p[0]].name, skel.joints[p[1]].name},
                              {Category::distance, classify_distance(d)}});
  }
  for (int f : skel.feet)
    if (foot_height(skel, w, f) <= kContactTolerance)
      ast.statements.push_back({{skel.joints[f].name}, {Category::ground_contact, "on the ground"}});
  return ast;
}

/// True when every statement of `wanted` appears in `have`.
inline bool contains_all(const PoseScriptAST& have, const PoseScriptAST& wanted) {
  for (const auto& s : wanted.statements)
    if (std::find(have.statements.begin(), have.statements.end(), s) == have.statements.end())
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// Pose files: {"root_pos": [x,y,z], "root_rot": [x,y,z], "joints": [[x,y,z], ...]}.

inline nlohmann::json configuration_to_json(const Configuration& q) {
  nlohmann::json joints = nlohmann::json::array();
  for (std::size_t j = 0; j < q.size(); ++j)
    joints.push_back({q.joint_rotations(j, 0), q.joint_rotations(j, 1), q.joint_rotations(j, 2)});
  return {{"root_pos", {q.root_position.x(), q.root_position.y(), q.root_position.z()}},
          {"root_rot", {q.root_orientation.x(), q.root_orientation.y(), q.root_orientation.z()}},
          {"joints", joints}};
}

inline Configuration configuration_from_json(const Skeleton& skel, const nlohmann::json& j) {
  auto vec3 = [](const nlohmann::json& a, const char* what) {
    if (!a.is_array() || a.size() != 3) throw StructuralError(std::string(what) + " must be a 3-vector");
    return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  };
  try {
    Configuration q(skel.size());
    q.root_position = vec3(j.at("root_pos"), "root_pos");
    q.root_orientation = vec3(j.at("root_rot"), "root_rot");
    const auto& joints = j.at("joints");
    if (!joints.is_array() || joints.size() != skel.size())
      throw DimensionError("pose has " + std::to_string(joints.size()) + " joints, skeleton has " +
                           std::to_string(skel.size()));
    for (std::size_t n = 0; n < skel.size(); ++n) q.set_rotation(static_cast<int>(n), vec3(joints[n], "joint rotation"));
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("pose: ") + e.what());
  }
}

}  // namespace behaviorplan
