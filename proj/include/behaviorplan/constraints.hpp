#pragma once

// High-level transition penalty C_T: joint-range, biomechanical-rate and
// semantic terms between consecutive keyframes.

#include "behaviorplan/errors.hpp"
#include "behaviorplan/posecode.hpp"
#include "behaviorplan/skeleton.hpp"

#include <json.hpp>

#include <cmath>
#include <memory>
#include <optional>

namespace behaviorplan {

struct ConstraintWeights {
  double w1 = 1.0;   // joint feasibility f_j
  double w2 = 1.0;   // semantic f_s
  double w_a = 1.0;  // range term inside f_j
  double w_b = 1.0;  // rate term inside f_j
  double w3 = 1.0;   // low-level joint limits g_j
  double w4 = 1.0;   // collision g_c
  double w5 = 1.0;   // torque limits g_d
  double kappa = 5.0;
  double eps_s = 0.25;
  double kappa_c = 50.0;
  double d_min = 0.02;  // meters
  double eps_T = 1e-3;
  double eps_M = 1e-2;
  double keyframe_dt = 1.0;  // seconds

  void validate() const {
    for (double v : {w1, w2, w_a, w_b, w3, w4, w5, kappa, eps_s, kappa_c, d_min, eps_T, eps_M, keyframe_dt})
      if (!(v > 0.0) || !std::isfinite(v)) throw StructuralError("constraint weights must be positive");
  }

  nlohmann::json to_json() const {
    return {{"w1", w1},       {"w2", w2},       {"w_a", w_a},         {"w_b", w_b},
            {"w3", w3},       {"w4", w4},       {"w5", w5},           {"kappa", kappa},
            {"eps_s", eps_s}, {"kappa_c", kappa_c}, {"d_min", d_min}, {"eps_T", eps_T},
            {"eps_M", eps_M}, {"keyframe_dt", keyframe_dt}};
  }

  /// Missing keys keep their defaults; unknown keys are rejected.
  static ConstraintWeights from_json(const nlohmann::json& j) {
    ConstraintWeights w;
    if (!j.is_object()) throw StructuralError("constraints must be an object");
    for (const auto& [key, value] : j.items()) {
      if (!value.is_number()) throw StructuralError("constraint '" + key + "' must be a number");
      const double v = value.get<double>();
      if (key == "w1") w.w1 = v;
      else if (key == "w2") w.w2 = v;
      else if (key == "w_a") w.w_a = v;
      else if (key == "w_b") w.w_b = v;
      else if (key == "w3") w.w3 = v;
      else if (key == "w4") w.w4 = v;
      else if (key == "w5") w.w5 = v;
      else if (key == "kappa") w.kappa = v;
      else if (key == "eps_s") w.eps_s = v;
      else if (key == "kappa_c") w.kappa_c = v;
      else if (key == "d_min") w.d_min = v;
      else if (key == "eps_T") w.eps_T = v;
      else if (key == "eps_M") w.eps_M = v;
      else if (key == "keyframe_dt") w.keyframe_dt = v;
      else throw StructuralError("unknown constraint key '" + key + "'");
    }
    w.validate();
    return w;
  }
};

/// One-sided squared hinge: zero while v <= c.
inline double sigma(double c, double v) {
  const double e = v - c;
  return e > 0.0 ? e * e : 0.0;
}

/// d sigma / d v.
inline double sigma_dv(double c, double v) {
  const double e = v - c;
  return e > 0.0 ? 2.0 * e : 0.0;
}

/// Joint-range penalty summed over every non-root DOF.
inline double f_r(const Skeleton& skel, const Configuration& x) {
  check_dimensions(skel, x);
  double s = 0.0;
  for (std::size_t j = 1; j < skel.size(); ++j) {
    const auto& d = skel.joints[j];
    for (int k = 0; k < d.dofs; ++k) {
      const double v = dof_value(skel, x, static_cast<int>(j), k);
      s += sigma(d.limits[k].hi, v) + sigma(v, d.limits[k].lo);
    }
  }
  return s;
}

/// Gradient of f_r with respect to the joint DOFs, in to_generalized order
/// with the root block omitted.
inline VecX f_r_gradient(const Skeleton& skel, const Configuration& x) {
  VecX g = VecX::Zero(skel.joint_dof_count());
  int n = 0;
  for (std::size_t j = 1; j < skel.size(); ++j) {
    const auto& d = skel.joints[j];
    for (int k = 0; k < d.dofs; ++k, ++n) {
      const double v = dof_value(skel, x, static_cast<int>(j), k);
      g[n] = sigma_dv(d.limits[k].hi, v) - sigma_dv(v, d.limits[k].lo);
    }
  }
  return g;
}

/// Rate penalty over non-root joints. Velocity is the per-joint rotation-vector
/// difference over keyframe_dt; the acceleration term is present only when the
/// previous keyframe is supplied.
inline double f_b(const Skeleton& skel, const Configuration& x_i, const Configuration& x_next,
                  const ConstraintWeights& w, const Configuration* x_prev = nullptr) {
  check_dimensions(skel, x_i);
  check_dimensions(skel, x_next);
  if (x_prev) check_dimensions(skel, *x_prev);
  const double dt = w.keyframe_dt;
  double s = 0.0;
  for (std::size_t j = 1; j < skel.size(); ++j) {
    const int jj = static_cast<int>(j);
    const Vec3 v = (x_next.rotation(jj) - x_i.rotation(jj)) / dt;
    s += sigma(skel.joints[j].max_velocity, v.norm());
    if (x_prev) {
      const Vec3 v0 = (x_i.rotation(jj) - x_prev->rotation(jj)) / dt;
      s += sigma(skel.joints[j].max_acceleration, ((v - v0) / dt).norm());
    }
  }
  return s;
}

/// Gradient of the two-keyframe f_b with respect to x_next's rotation
/// vectors, one row per joint (row 0 zero).
inline Eigen::Matrix<double, Eigen::Dynamic, 3> f_b_gradient(const Skeleton& skel,
                                                              const Configuration& x_i,
                                                              const Configuration& x_next,
                                                              const ConstraintWeights& w) {
  Eigen::Matrix<double, Eigen::Dynamic, 3> g =
      Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(static_cast<Eigen::Index>(skel.size()), 3);
  const double dt = w.keyframe_dt;
  for (std::size_t j = 1; j < skel.size(); ++j) {
    const int jj = static_cast<int>(j);
    const Vec3 v = (x_next.rotation(jj) - x_i.rotation(jj)) / dt;
    const double n = v.norm();
    if (n < 1e-15) continue;
    g.row(jj) = (sigma_dv(skel.joints[j].max_velocity, n) * v / (n * dt)).transpose();
  }
  return g;
}

// ---------------------------------------------------------------------------
// Semantic features.

/// Maps a transition script to a fixed-size feature vector g(a) and supplies
/// the expected feature g-bar for the same transition.
class SemanticFeatureProvider {
 public:
  virtual ~SemanticFeatureProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual VecX features(const MotionScriptAST& a) const = 0;
  virtual VecX reference(const MotionScriptAST& a) const = 0;
};

/// Bag-of-primitives layout: kinds, directions, target categories, speeds,
/// magnitudes. Each primitive adds 1/count to its slots.
struct PrimitiveBag {
  static constexpr std::size_t kKinds = 3;
  static constexpr std::size_t kDirections = 6;
  static constexpr std::size_t kTargets = 9;
  static constexpr std::size_t kSpeeds = 5;
  static constexpr std::size_t kMagnitudes = 4;
  static constexpr std::size_t kDim = kKinds + kDirections + kTargets + kSpeeds + kMagnitudes;

  static constexpr std::size_t direction_slot(Direction d) { return kKinds + static_cast<std::size_t>(d); }
  static constexpr std::size_t target_slot(Category c) {
    return kKinds + kDirections + static_cast<std::size_t>(c);
  }
  static constexpr std::size_t speed_slot(Speed s) {
    return kKinds + kDirections + kTargets + static_cast<std::size_t>(s);
  }
  static constexpr std::size_t magnitude_slot(Magnitude m) {
    return kKinds + kDirections + kTargets + kSpeeds + static_cast<std::size_t>(m);
  }

  static VecX of(const MotionScriptAST& a) {
    VecX g = VecX::Zero(kDim);
    const std::size_t n = a.primitive_count();
    if (n == 0) return g;
    const double unit = 1.0 / static_cast<double>(n);
    for (const auto& phase : a.phases)
      for (const auto& p : phase) {
        g[static_cast<std::size_t>(p.kind)] += unit;
        if (p.direction) g[direction_slot(*p.direction)] += unit;
        if (p.target) g[target_slot(p.target->category)] += unit;
        g[speed_slot(p.speed)] += unit;
        g[magnitude_slot(p.magnitude)] += unit;
      }
    return g;
  }
};

/// Default provider: g-bar is the bag of the planner's template transition
/// when one is known, otherwise the script's own bag (zero semantic penalty).
class BagOfPrimitivesProvider : public SemanticFeatureProvider {
 public:
  BagOfPrimitivesProvider() = default;
  explicit BagOfPrimitivesProvider(const MotionScriptAST& expected)
      : expected_(PrimitiveBag::of(expected)) {}
  explicit BagOfPrimitivesProvider(VecX expected) : expected_(std::move(expected)) {}

  std::size_t dim() const override { return PrimitiveBag::kDim; }
  VecX features(const MotionScriptAST& a) const override { return PrimitiveBag::of(a); }
  VecX reference(const MotionScriptAST& a) const override {
    return expected_ ? *expected_ : PrimitiveBag::of(a);
  }

 private:
  std::optional<VecX> expected_;
};

/// ||d||^2 / (1 + exp(-kappa (||d|| - eps_s))) for d = g - g-bar.
inline double f_s_of_distance(double d, const ConstraintWeights& w) {
  return d * d / (1.0 + std::exp(-w.kappa * (d - w.eps_s)));
}

inline double f_s(const VecX& g, const VecX& gbar, const ConstraintWeights& w) {
  if (g.size() != gbar.size())
    throw DimensionError("semantic feature sizes differ: " + std::to_string(g.size()) + " vs " +
                         std::to_string(gbar.size()));
  return f_s_of_distance((g - gbar).norm(), w);
}

inline double f_s(const MotionScriptAST& a, const SemanticFeatureProvider& provider,
                  const ConstraintWeights& w) {
  return f_s(provider.features(a), provider.reference(a), w);
}

struct CTBreakdown {
  double f_r = 0.0;  // summed over both keyframes
  double f_b = 0.0;
  double f_s = 0.0;
  double f_j = 0.0;  // w_a f_r + w_b f_b
  double total = 0.0;
  bool satisfied = true;  // total <= eps_T
};

/// C_T = w1 (w_a f_r + w_b f_b) + w2 f_s. f_r covers both endpoint keyframes.
inline CTBreakdown eval_CT(const Configuration& x_i, const MotionScriptAST& a_i,
                           const Configuration& x_next, const Skeleton& skel,
                           const SemanticFeatureProvider& provider, const ConstraintWeights& w,
                           const Configuration* x_prev = nullptr) {
  CTBreakdown b;
  b.f_r = f_r(skel, x_i) + f_r(skel, x_next);
  b.f_b = f_b(skel, x_i, x_next, w, x_prev);
  b.f_s = f_s(a_i, provider, w);
  b.f_j = w.w_a * b.f_r + w.w_b * b.f_b;
  b.total = w.w1 * b.f_j + w.w2 * b.f_s;
  b.satisfied = b.total <= w.eps_T;
  return b;
}

inline nlohmann::json to_json(const CTBreakdown& b) {
  return {{"f_r", b.f_r}, {"f_b", b.f_b}, {"f_s", b.f_s},
          {"f_j", b.f_j}, {"total", b.total}, {"satisfied", b.satisfied}};
}

}  // namespace behaviorplan
