#pragma once

// Stage composition: N (norm-window matching) → O (consensus pruning) →
// R (quaternion refinement on the consensus set), with wall-clock timing.

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arcs/consensus.hpp"
#include "arcs/geometry.hpp"
#include "arcs/matching.hpp"
#include "arcs/refine.hpp"

namespace arcs {

struct Thresholds {
  double c = 0.0;
  double cbar = 0.0;

  static Thresholds from_sigma(double sigma) {
    return {kResidualSigmaFactor * sigma, kAxisSigmaFactor * sigma};
  }
};

struct StageSelection {
  bool n = false;
  bool o = false;
  bool r = false;
};

struct PipelineOptions {
  Thresholds thresholds;
  int s = kDefaultPhiSamples;
  RefineConfig refine;
  StageSelection stages{false, true, true};
};

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct PipelineResult {
  RotationMatrix rotation = RotationMatrix::Identity();
  /// Candidate correspondences from stage N (empty if N did not run).
  CorrespondenceSet candidates;
  /// Indices into the pair list (or into `candidates` after stage N).
  std::vector<std::size_t> consensus;
  std::optional<AxisAngle> axis_angle;
  std::optional<RefineResult> refinement;
  /// Rotation right after stage O, when it ran.
  std::optional<RotationMatrix> pruned_rotation;
  std::vector<StageTiming> timings;

  UnitQuaternion quaternion() const { return rotation_to_quat(rotation); }

  double total_ms() const {
    double t = 0.0;
    for (const auto& s : timings) t += s.ms;
    return t;
  }
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}

  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Runs O and/or R on measurement pairs. R alone starts from the identity
/// and uses every pair; after O it starts from the pruned rotation and only
/// uses the consensus set.
inline PipelineResult run_pairs(std::span<const PointPair> pairs, const PipelineOptions& opt) {
  if (!opt.stages.o && !opt.stages.r) throw std::invalid_argument("run_pairs: select stage o and/or r");
  if (pairs.empty()) throw DegenerateConfiguration("run_pairs: no measurement pairs");
  PipelineResult res;

  if (opt.stages.o) {
    detail::Stopwatch sw;
    auto pruned = prune(pairs, opt.thresholds.c, opt.thresholds.cbar, opt.s);
    res.timings.push_back({"o", sw.ms()});
    res.rotation = pruned.rotation;
    res.pruned_rotation = pruned.rotation;
    res.axis_angle = pruned.axis_angle;
    res.consensus = std::move(pruned.consensus);
  } else {
    res.consensus.resize(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) res.consensus[i] = i;
  }

  if (opt.stages.r) {
    detail::Stopwatch sw;
    std::vector<QuadForm> ds;
    ds.reserve(res.consensus.size());
    for (const std::size_t i : res.consensus) ds.push_back(build_D(pairs[i].y, pairs[i].x));
    auto refined = refine(ds, rotation_to_quat(res.rotation), opt.refine);
    res.rotation = quat_to_rotation(refined.w);
    res.refinement = std::move(refined);
    res.timings.push_back({"r", sw.ms()});
  }
  return res;
}

inline PipelineResult run_pairs(const PairList& pairs, const PipelineOptions& opt) {
  return run_pairs(std::span<const PointPair>(pairs), opt);
}

/// Stage N on the clouds, then O/R on the candidate pairs.
inline PipelineResult run_clouds(const PointCloud& q, const PointCloud& p, const PipelineOptions& opt) {
  detail::Stopwatch sw;
  auto candidates = arcs_n_match(q, p, opt.thresholds.c);
  const auto pairs = pairs_from_correspondences(q, p, candidates);
  const double n_ms = sw.ms();
  if (pairs.empty()) throw DegenerateConfiguration("run_clouds: no candidate correspondences");
  auto res = run_pairs(pairs, opt);
  res.timings.insert(res.timings.begin(), {"n", n_ms});
  res.candidates = std::move(candidates);
  return res;
}

/// Noiseless solver with the same result shape.
inline PipelineResult run_noiseless(const PointCloud& q, const PointCloud& p, double c = kNoiselessNormTolerance) {
  detail::Stopwatch sw;
  auto sol = arcs_solve(q, p, c);
  PipelineResult res;
  res.rotation = sol.rotation;
  res.consensus.resize(sol.matches.size());
  for (std::size_t i = 0; i < sol.matches.size(); ++i) res.consensus[i] = i;
  res.candidates = std::move(sol.matches);
  res.timings.push_back({"arcs", sw.ms()});
  return res;
}

}  // namespace arcs
