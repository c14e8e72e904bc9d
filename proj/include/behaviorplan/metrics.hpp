#pragma once

// Evaluation metrics: physical plausibility (penetration, floating, foot
// skating), feature-space retrieval and distribution metrics, and the
// subjective success rate.

#include "behaviorplan/constraints.hpp"
#include "behaviorplan/errors.hpp"
#include "behaviorplan/inbetween.hpp"
#include "behaviorplan/math.hpp"
#include "behaviorplan/parallel.hpp"
#include "behaviorplan/skeleton.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace behaviorplan {

// ---------------------------------------------------------------------------
// Physical plausibility

enum class SkateMode { excess, raw };

struct PhysErrReport {
  double penetrate = 0.0;
  double floating = 0.0;
  double skate = 0.0;
  double total = 0.0;
  std::size_t contact_frames = 0;

  nlohmann::json to_json() const {
    return {{"penetrate", penetrate}, {"float", floating}, {"skate", skate}, {"total", total},
            {"contact_frames", contact_frames}};
  }
};

/// Per-frame means: penetration over all frames, floating over frames without
/// foot contact, skating over consecutive frame pairs where a foot stays in
/// contact.
inline PhysErrReport phys_err(const Skeleton& skel, const Trajectory& traj, double tol = kContactTolerance,
                              SkateMode mode = SkateMode::excess) {
  traj.validate();
  PhysErrReport r;
  const std::size_t N = traj.size();
  std::vector<WorldPose> poses;
  poses.reserve(N);
  std::vector<std::vector<char>> touching(N, std::vector<char>(skel.feet.size(), 0));
  double pen = 0.0, flo = 0.0;
  std::size_t flo_n = 0;
  for (std::size_t k = 0; k < N; ++k) {
    check_dimensions(skel, traj.frames[k]);
    poses.push_back(forward_kinematics(skel, traj.frames[k]));
    const double h = lowest_height(skel, poses.back());
    pen += std::max(0.0, -h - tol);
    bool contact = false;
    for (std::size_t f = 0; f < skel.feet.size(); ++f) {
      touching[k][f] = foot_height(skel, poses.back(), skel.feet[f]) <= tol;
      contact = contact || touching[k][f];
    }
    if (contact) {
      ++r.contact_frames;
    } else {
      flo += std::max(0.0, h - tol);
      ++flo_n;
    }
  }
  double sk = 0.0;
  std::size_t sk_n = 0;
  for (std::size_t k = 0; k + 1 < N; ++k) {
    double worst = -1.0;
    for (std::size_t f = 0; f < skel.feet.size(); ++f) {
      if (!touching[k][f] || !touching[k + 1][f]) continue;
      Vec3 d = poses[k + 1].positions[skel.feet[f]] - poses[k].positions[skel.feet[f]];
      d.y() = 0.0;
      const double slide = mode == SkateMode::raw ? d.norm() : std::max(0.0, d.norm() - tol);
      worst = std::max(worst, slide);
    }
    if (worst >= 0.0) {
      sk += worst;
      ++sk_n;
    }
  }
  r.penetrate = pen / static_cast<double>(N);
  r.floating = flo_n ? flo / static_cast<double>(flo_n) : 0.0;
  r.skate = sk_n ? sk / static_cast<double>(sk_n) : 0.0;
  r.total = r.penetrate + r.floating + r.skate;
  return r;
}

// ---------------------------------------------------------------------------
// Feature providers

class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual VecX features(const Trajectory& t) const = 0;
};

/// Mean and standard deviation of every joint's rotation-vector rate (root
/// orientation included) plus a normalized histogram of horizontal root speed.
class KinematicDescriptor : public FeatureProvider {
 public:
  static constexpr std::size_t kSpeedBins = 12;
  static constexpr double kSpeedBinWidth = 0.25;  // m/s, last bin open

  explicit KinematicDescriptor(std::size_t joints) : joints_(joints) {}

  std::size_t dim() const override { return 6 * joints_ + kSpeedBins; }

  VecX features(const Trajectory& t) const override {
    t.validate();
    if (t.frames.front().size() != joints_) throw DimensionError("trajectory joint count differs from the descriptor");
    VecX out = VecX::Zero(static_cast<Eigen::Index>(dim()));
    const std::size_t N = t.size();
    if (N < 2) return out;
    const std::size_t C = 3 * joints_;
    VecX sum = VecX::Zero(C), sq = VecX::Zero(C);
    for (std::size_t k = 0; k + 1 < N; ++k) {
      const auto& a = t.frames[k];
      const auto& b = t.frames[k + 1];
      VecX rate(C);
      rate.segment<3>(0) = (b.root_orientation - a.root_orientation) / t.dt;
      for (std::size_t j = 1; j < joints_; ++j)
        rate.segment<3>(3 * j) = (b.rotation(static_cast<int>(j)) - a.rotation(static_cast<int>(j))) / t.dt;
      sum += rate;
      sq += rate.cwiseAbs2();
      Vec3 dv = (b.root_position - a.root_position) / t.dt;
      dv.y() = 0.0;
      const auto bin = std::min<std::size_t>(kSpeedBins - 1, static_cast<std::size_t>(dv.norm() / kSpeedBinWidth));
      out[static_cast<Eigen::Index>(2 * C + bin)] += 1.0;
    }
    const double n = static_cast<double>(N - 1);
    const VecX mean = sum / n;
    out.segment(0, C) = mean;
    out.segment(C, C) = (sq / n - mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
    out.segment(2 * C, kSpeedBins) /= n;
    return out;
  }

 private:
  std::size_t joints_;
};

/// Recognizes motion primitives from a trajectory and returns their bag in
/// the same space as the text features, so motions and scripts compare
/// directly.
class PrimitiveRecognizer : public FeatureProvider {
 public:
  static constexpr double kMinMove = 0.1;   // meters
  static constexpr double kMinTurn = 0.2;   // radians
  static constexpr double kMinBend = 10.0;  // degrees

  explicit PrimitiveRecognizer(const Skeleton& skel) : skel_(&skel) {}

  std::size_t dim() const override { return PrimitiveBag::kDim; }

  MotionScriptAST recognize(const Trajectory& t) const {
    t.validate();
    const Configuration& a = t.frames.front();
    const Configuration& b = t.frames.back();
    std::vector<MotionPrimitive> found;

    const auto [fwd, left] = heading_axes(a.root_orientation);
    Vec3 d = b.root_position - a.root_position;
    d.y() = 0.0;
    if (d.norm() >= kMinMove) {
      MotionPrimitive p;
      p.subject = {"root"};
      p.kind = MotionKind::move_direction;
      const double f = d.dot(fwd), l = d.dot(left);
      if (std::abs(f) >= std::abs(l)) p.direction = f > 0 ? Direction::forward : Direction::backward;
      else p.direction = l > 0 ? Direction::left : Direction::right;
      p.magnitude = nearest_magnitude(d.norm(), move_distance);
      p.speed = pacing(t, [&](const Configuration& c) { return (c.root_position - a.root_position).dot(d) / d.squaredNorm(); });
      found.push_back(p);
    }
    const double yaw = heading(b) - heading(a);
    const double turn = std::remainder(yaw, 2.0 * kPi);
    if (std::abs(turn) >= kMinTurn) {
      MotionPrimitive p;
      p.subject = {"root"};
      p.kind = MotionKind::turn;
      p.direction = turn > 0 ? Direction::counterclockwise : Direction::clockwise;
      p.magnitude = nearest_magnitude(std::abs(turn), turn_angle);
      p.speed = pacing(t, [&](const Configuration& c) { return std::remainder(heading(c) - heading(a), 2.0 * kPi) / turn; });
      found.push_back(p);
    }
    for (std::size_t j = 1; j < skel_->size(); ++j) {
      if (!skel_->is_hinge(static_cast<int>(j))) continue;
      const double da = bend_degrees(*skel_, a, static_cast<int>(j));
      const double db = bend_degrees(*skel_, b, static_cast<int>(j));
      if (std::abs(db - da) < kMinBend || std::string(classify_angle(da)) == classify_angle(db)) continue;
      MotionPrimitive p;
      p.subject = {skel_->joints[j].name};
      p.kind = MotionKind::posecode_change;
      p.target = PoseCode{Category::angle, classify_angle(db)};
      found.push_back(p);
    }
    MotionScriptAST out;
    if (!found.empty()) out.phases.push_back(found);
    return out;
  }

  VecX features(const Trajectory& t) const override { return PrimitiveBag::of(recognize(t)); }

 private:
  static double heading(const Configuration& c) {
    const auto [fwd, left] = heading_axes(c.root_orientation);
    (void)left;
    return std::atan2(fwd.x(), fwd.z());
  }

  template <class Fn>
  static Magnitude nearest_magnitude(double value, Fn&& scale) {
    Magnitude best = Magnitude::unspecified;
    for (Magnitude m : {Magnitude::unspecified, Magnitude::greatly, Magnitude::way_over, Magnitude::slightly})
      if (std::abs(scale(m) - value) < std::abs(scale(best) - value)) best = m;
    return best;
  }

  /// Ease exponent e from the progress s at mid-time: s = 0.5^e.
  template <class Fn>
  static Speed pacing(const Trajectory& t, Fn&& progress) {
    if (t.size() < 3) return Speed::unspecified;
    const double s = std::clamp(progress(t.frames[(t.size() - 1) / 2]), 1e-6, 1.0 - 1e-6);
    const double mid = static_cast<double>((t.size() - 1) / 2) / static_cast<double>(t.size() - 1);
    const double e = std::log(s) / std::log(mid);
    Speed best = Speed::unspecified;
    for (Speed sp : {Speed::unspecified, Speed::very_fast, Speed::fast, Speed::slow})
      if (std::abs(speed_exponent(sp) - e) < std::abs(speed_exponent(best) - e)) best = sp;
    return best;
  }

  const Skeleton* skel_;
};

inline VecX text_features(const MotionScriptAST& a) { return PrimitiveBag::of(a); }

// ---------------------------------------------------------------------------
// Feature-space metrics

/// Mean cosine distance over aligned pairs.
inline double mm_dist(const std::vector<VecX>& motion, const std::vector<VecX>& text) {
  if (motion.size() != text.size()) throw DimensionError("motion and text feature lists differ in length");
  if (motion.empty()) throw Error("mm_dist needs at least one pair");
  double s = 0.0;
  for (std::size_t i = 0; i < motion.size(); ++i) {
    if (motion[i].size() != text[i].size()) throw DimensionError("feature dimensions differ");
    const double na = motion[i].norm(), nb = text[i].norm();
    if (na == 0.0 || nb == 0.0) throw Error("zero-norm feature vector at index " + std::to_string(i));
    s += 1.0 - motion[i].dot(text[i]) / (na * nb);
  }
  return s / static_cast<double>(motion.size());
}

namespace detail {

inline std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> u(0, i - 1);
    std::swap(idx[i - 1], idx[u(rng)]);
  }
  return idx;
}

}  // namespace detail

/// Mean Euclidean distance over `samples` disjoint seeded pairs.
inline double diversity(const std::vector<VecX>& feats, std::size_t samples, std::uint64_t seed) {
  if (feats.size() < 2) throw Error("diversity needs at least two features");
  if (samples == 0 || 2 * samples > feats.size())
    throw Error("diversity: " + std::to_string(samples) + " disjoint pairs need " + std::to_string(2 * samples) +
                " features, have " + std::to_string(feats.size()));
  const auto idx = detail::shuffled(feats.size(), seed);
  double s = 0.0;
  for (std::size_t i = 0; i < samples; ++i) s += (feats[idx[2 * i]] - feats[idx[2 * i + 1]]).norm();
  return s / static_cast<double>(samples);
}

/// Per group, two disjoint seeded subsets of size m paired in order; mean over
/// groups of the mean paired distance. Every group uses the same seed, so
/// equal groups contribute equal terms.
inline double multimodality(const std::map<std::string, std::vector<VecX>>& grouped, std::size_t m,
                            std::uint64_t seed) {
  if (grouped.empty()) throw Error("multimodality needs at least one group");
  if (m == 0) throw Error("multimodality subset size must be positive");
  double total = 0.0;
  for (const auto& [id, feats] : grouped) {
    if (feats.size() < 2 * m)
      throw Error("multimodality group '" + id + "' has " + std::to_string(feats.size()) + " members, needs " +
                  std::to_string(2 * m));
    const auto idx = detail::shuffled(feats.size(), seed);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += (feats[idx[i]] - feats[idx[m + i]]).norm();
    total += s / static_cast<double>(m);
  }
  return total / static_cast<double>(grouped.size());
}

/// Fraction of queries whose true match ranks in the top k of a pool made of
/// the match and pool_size - 1 seeded distractors.
inline double r_precision(const std::vector<VecX>& query, const std::vector<VecX>& gt, std::size_t k,
                          std::size_t pool_size = 32, std::uint64_t seed = 0) {
  if (query.size() != gt.size()) throw DimensionError("query and ground-truth lists differ in length");
  if (query.empty()) throw Error("r_precision needs at least one query");
  if (pool_size == 0 || pool_size > gt.size())
    throw Error("pool size " + std::to_string(pool_size) + " exceeds corpus size " + std::to_string(gt.size()));
  if (k == 0) throw Error("k must be positive");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < query.size(); ++i) {
    auto idx = detail::shuffled(gt.size(), seed + i);
    idx.erase(std::remove(idx.begin(), idx.end(), i), idx.end());
    const double truth = (query[i] - gt[i]).norm();
    std::size_t ahead = 0;
    for (std::size_t n = 0; n + 1 < pool_size; ++n)
      if ((query[i] - gt[idx[n]]).norm() < truth) ++ahead;
    if (ahead < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(query.size());
}

namespace detail {

inline std::pair<VecX, MatX> mean_and_covariance(const std::vector<VecX>& x) {
  if (x.size() < 2) throw Error("fid needs at least two samples per set");
  const Eigen::Index d = x.front().size();
  VecX mu = VecX::Zero(d);
  for (const auto& v : x) {
    if (v.size() != d) throw DimensionError("feature dimensions differ");
    if (!v.allFinite()) throw Error("non-finite feature");
    mu += v;
  }
  mu /= static_cast<double>(x.size());
  MatX cov = MatX::Zero(d, d);
  for (const auto& v : x) cov += (v - mu) * (v - mu).transpose();
  cov /= static_cast<double>(x.size() - 1);
  return {mu, cov};
}

inline MatX sym_sqrt(const MatX& m) {
  const Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (m + m.transpose()));
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

inline constexpr double kFidEpsilon = 1e-6;

/// Frechet distance between Gaussian fits of two feature sets.
inline double fid(const std::vector<VecX>& a, const std::vector<VecX>& b) {
  auto [ma, ca] = detail::mean_and_covariance(a);
  auto [mb, cb] = detail::mean_and_covariance(b);
  if (ma.size() != mb.size()) throw DimensionError("feature dimensions differ");
  ca.diagonal().array() += kFidEpsilon;
  cb.diagonal().array() += kFidEpsilon;
  const MatX ra = detail::sym_sqrt(ca);
  const double cross = detail::sym_sqrt(ra * cb * ra).trace();
  double v = (ma - mb).squaredNorm() + ca.trace() + cb.trace() - 2.0 * cross;
  if (v < 0.0) {
    if (v < -1e-8) throw Error("fid is negative beyond rounding");
    v = 0.0;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Subjective success rate

struct SubjectiveScores {
  int F = 1, CO = 1, R = 1, S = 1, AC = 1, SC = 1, D = 1, A = 1;
  double C = 0.0;  // completion fraction

  void validate() const {
    for (int v : {F, CO, R, S, AC, SC, D, A})
      if (v < 1 || v > 5) throw Error("subjective score " + std::to_string(v) + " is outside 1..5");
    if (!(C >= 0.0 && C <= 1.0)) throw Error("completion must lie in [0, 1]");
  }

  double quality() const { return (F + CO + R + S + AC + SC + D + A) / 40.0; }

  static SubjectiveScores from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw StructuralError("scores must be a JSON object");
    SubjectiveScores s;
    for (auto [key, field] : {std::pair{"F", &s.F}, {"CO", &s.CO}, {"R", &s.R}, {"S", &s.S}, {"AC", &s.AC},
                              {"SC", &s.SC}, {"D", &s.D}, {"A", &s.A}}) {
      if (!j.contains(key) || !j[key].is_number_integer()) throw StructuralError(std::string("scores need integer '") + key + "'");
      *field = j[key].get<int>();
    }
    if (!j.contains("C") || !j["C"].is_number()) throw StructuralError("scores need numeric 'C'");
    s.C = j["C"].get<double>();
    s.validate();
    return s;
  }
};

inline double success_rate(const SubjectiveScores& s, double w1 = 0.5, double w2 = 0.5) {
  s.validate();
  return w1 * s.C + w2 * s.quality();
}

// ---------------------------------------------------------------------------
// Batch report

struct MetricsOptions {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::size_t r_precision_pool = 32;
  std::size_t diversity_samples = 300;
  std::size_t multimodality_subset = 10;
  SkateMode skate_mode = SkateMode::excess;
};

/// All metrics computable from the inputs: phys_err always; MM Dist and
/// R-Precision with texts; Diversity with two or more motions; MultiModality
/// with repeated texts; FID with a reference set.
inline nlohmann::json evaluate_batch(const Skeleton& skel, const std::vector<Trajectory>& motions,
                                     const std::vector<MotionScriptAST>* texts, const std::vector<Trajectory>* reference,
                                     const MetricsOptions& opt = {}) {
  if (motions.empty()) throw Error("no motions to evaluate");
  if (texts && texts->size() != motions.size()) throw DimensionError("text count differs from motion count");
  std::vector<PhysErrReport> pe(motions.size());
  std::vector<VecX> kin(motions.size()), rec(motions.size());
  const KinematicDescriptor desc(skel.size());
  const PrimitiveRecognizer recog(skel);
  parallel_for(motions.size(), opt.jobs, [&](std::size_t i) {
    pe[i] = phys_err(skel, motions[i], kContactTolerance, opt.skate_mode);
    kin[i] = desc.features(motions[i]);
    rec[i] = recog.features(motions[i]);
  });
  PhysErrReport mean;
  for (const auto& r : pe) {
    mean.penetrate += r.penetrate;
    mean.floating += r.floating;
    mean.skate += r.skate;
    mean.contact_frames += r.contact_frames;
  }
  const double n = static_cast<double>(motions.size());
  mean.penetrate /= n;
  mean.floating /= n;
  mean.skate /= n;
  mean.total = mean.penetrate + mean.floating + mean.skate;

  nlohmann::json out;
  out["count"] = motions.size();
  out["phys_err"] = mean.to_json();
  if (motions.size() >= 2)
    out["diversity"] = diversity(kin, std::min(opt.diversity_samples, motions.size() / 2), opt.seed);
  if (texts) {
    std::vector<VecX> tf;
    for (const auto& t : *texts) tf.push_back(text_features(t));
    std::vector<VecX> mf = rec, tt = tf;
    // Empty bags have no direction; give both sides a shared "still" axis.
    for (auto* v : {&mf, &tt})
      for (auto& x : *v) {
        x.conservativeResize(x.size() + 1);
        x[x.size() - 1] = x.head(x.size() - 1).squaredNorm() == 0.0 ? 1.0 : 0.0;
      }
    out["mm_dist"] = mm_dist(mf, tt);
    const std::size_t pool = std::min(opt.r_precision_pool, motions.size());
    for (std::size_t k : {1, 2, 3}) out["r_precision_top" + std::to_string(k)] = r_precision(mf, tt, k, pool, opt.seed);
    std::map<std::string, std::vector<VecX>> groups;
    for (std::size_t i = 0; i < motions.size(); ++i) groups[render_motion_script((*texts)[i])].push_back(kin[i]);
    std::size_t smallest = motions.size();
    for (const auto& [k, g] : groups) smallest = std::min(smallest, g.size());
    const std::size_t m = std::min(opt.multimodality_subset, smallest / 2);
    if (m > 0) out["multimodality"] = multimodality(groups, m, opt.seed);
  }
  if (reference && !reference->empty()) {
    std::vector<VecX> rf(reference->size());
    parallel_for(reference->size(), opt.jobs, [&](std::size_t i) { rf[i] = desc.features((*reference)[i]); });
    out["fid"] = fid(kin, rf);
  }
  return out;
}

}  // namespace behaviorplan
