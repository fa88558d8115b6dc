#pragma once

// Seeded benchmark runner. A config is a list of cases (instance family and
// parameters) run for a number of trials; every trial reports one record per
// requested stage. Trial t of every case uses seed derive_seed(seed, t), so
// cases that share instance parameters (e.g. an s sweep) see identical data.
//
// Stage names:
//   arcs  noiseless norm matching + Kabsch          (clouds)
//   n     windowed norm matching only               (clouds; no rotation)
//   no    n, then consensus pruning                 (clouds)
//   nor   n, pruning, refinement                    (clouds)
//   o     consensus pruning                         (pairs)
//   or    pruning, then refinement                  (pairs)
//   r     refinement from the identity, all pairs   (pairs)

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arcs/consensus.hpp"
#include "arcs/io.hpp"
#include "arcs/parallel.hpp"
#include "arcs/pipeline.hpp"
#include "arcs/random.hpp"
#include "arcs/refine.hpp"
#include "arcs/synthetic.hpp"

namespace arcs {

enum class Family { Clouds, Pairs };

/// Fixes parts of the ground-truth rotation; unset parts are drawn per trial
/// (axis uniform on S², angle uniform in [0, 2π]).
struct RotationConstraint {
  std::optional<double> omega;
  std::optional<double> theta;
  std::optional<double> phi;

  bool any() const { return omega || theta || phi; }
};

struct CaseConfig {
  std::string label;
  Family family = Family::Pairs;
  std::size_t m = 0;  // clouds
  std::size_t n = 0;  // clouds
  std::size_t l = 0;  // pairs
  std::size_t k = 0;
  double sigma = 0.01;
  bool norm_constrained = true;  // pairs
  int s = kDefaultPhiSamples;
  RotationConstraint rotation;
  std::vector<std::string> stages;
};

struct ExperimentConfig {
  std::string name = "custom";
  std::vector<CaseConfig> cases;
  int trials = 1;
  std::uint64_t seed = 0;
  RefineConfig refine;
  double success_threshold_deg = 10.0;
};

struct TrialRecord {
  std::string case_label;
  int trial = 0;
  std::string stage;
  /// NaN when the stage produces no rotation.
  double error_deg = std::numeric_limits<double>::quiet_NaN();
  double runtime_ms = 0.0;
  std::size_t consensus_size = 0;
  double inlier_purity = 0.0;
  std::uint64_t seed = 0;
  /// Set when the stage hit degenerate geometry; the trial counts as a failure.
  bool degenerate = false;
};

struct StageSummary {
  std::string case_label;
  std::string stage;
  int trials = 0;
  double mean_error_deg = std::numeric_limits<double>::quiet_NaN();
  double std_error_deg = std::numeric_limits<double>::quiet_NaN();
  double median_error_deg = std::numeric_limits<double>::quiet_NaN();
  double success_rate = std::numeric_limits<double>::quiet_NaN();
  double mean_runtime_ms = 0.0;
  double mean_consensus_size = 0.0;
  double mean_inlier_purity = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialRecord> records;
  std::vector<StageSummary> summaries;

  const StageSummary& summary(const std::string& case_label, const std::string& stage) const {
    for (const auto& s : summaries) {
      if (s.case_label == case_label && s.stage == stage) return s;
    }
    throw std::out_of_range("no summary for case '" + case_label + "' stage '" + stage + "'");
  }
};

namespace detail {

inline const std::set<std::string>& cloud_stages() {
  static const std::set<std::string> s{"arcs", "n", "no", "nor"};
  return s;
}

inline const std::set<std::string>& pair_stages() {
  static const std::set<std::string> s{"o", "or", "r"};
  return s;
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (cfg.cases.empty()) throw std::invalid_argument("experiment: no cases");
  cfg.refine.validate();
  std::set<std::string> labels;
  for (const auto& c : cfg.cases) {
    if (!labels.insert(c.label).second) throw std::invalid_argument("experiment: duplicate case label '" + c.label + "'");
    if (c.stages.empty()) throw std::invalid_argument("experiment: case '" + c.label + "' has no stages");
    const auto& allowed = c.family == Family::Clouds ? cloud_stages() : pair_stages();
    for (const auto& st : c.stages) {
      if (!allowed.count(st)) throw std::invalid_argument("experiment: stage '" + st + "' does not apply to case '" + c.label + "'");
    }
    if (c.s < 1) throw std::invalid_argument("experiment: s must be >= 1");
    if (!(c.sigma >= 0.0)) throw std::invalid_argument("experiment: sigma must be >= 0");
    const bool noisy_stage = std::any_of(c.stages.begin(), c.stages.end(), [](const std::string& s) { return s != "arcs" && s != "r"; });
    if (noisy_stage && !(c.sigma > 0.0)) throw std::invalid_argument("experiment: noisy stages need sigma > 0");
  }
}

inline bool wants(const CaseConfig& c, const char* stage) {
  return std::find(c.stages.begin(), c.stages.end(), stage) != c.stages.end();
}

inline std::optional<RotationMatrix> draw_rotation(const RotationConstraint& fixed, std::uint64_t seed) {
  if (!fixed.any()) return std::nullopt;
  Rng rng(derive_seed(seed, 0x726f74ULL));
  Point3 axis = random_unit3(rng);
  if (fixed.theta || fixed.phi) {
    // Fill the unspecified spherical angle uniformly over its range.
    const double theta = fixed.theta ? *fixed.theta : std::acos(std::clamp(1.0 - 2.0 * rng.uniform(), -1.0, 1.0));
    const double phi = fixed.phi ? *fixed.phi : rng.uniform(0.0, 2.0 * std::numbers::pi);
    axis = AxisAngle::axis_from_angles(theta, phi);
  }
  const double omega = fixed.omega ? *fixed.omega : rng.uniform(0.0, 2.0 * std::numbers::pi);
  return rodrigues(axis, omega);
}

inline TrialRecord make_record(const CaseConfig& c, int trial, std::uint64_t seed, const char* stage) {
  TrialRecord r;
  r.case_label = c.label;
  r.trial = trial;
  r.stage = stage;
  r.seed = seed;
  return r;
}

inline PipelineOptions options_for(const CaseConfig& c, const ExperimentConfig& cfg) {
  PipelineOptions o;
  o.thresholds = Thresholds::from_sigma(c.sigma);
  o.s = c.s;
  o.refine = cfg.refine;
  return o;
}

inline std::vector<TrialRecord> run_cloud_trial(const CaseConfig& c, const ExperimentConfig& cfg, int trial,
                                                std::uint64_t seed) {
  std::vector<TrialRecord> out;
  const auto inst = gen_srcs(c.m, c.n, c.k, c.sigma, seed, draw_rotation(c.rotation, seed));

  if (wants(c, "arcs")) {
    auto rec = make_record(c, trial, seed, "arcs");
    Stopwatch sw;
    try {
      const auto sol = arcs_solve(inst.q, inst.p);
      rec.runtime_ms = sw.ms();
      rec.error_deg = rotation_error_deg(sol.rotation, inst.r_true);
      rec.consensus_size = sol.matches.size();
      std::vector<std::size_t> all(sol.matches.size());
      for (std::size_t t = 0; t < all.size(); ++t) all[t] = t;
      rec.inlier_purity = inlier_purity(all, planted_flags(sol.matches, inst.truth));
    } catch (const DegenerateConfiguration&) {
      rec.runtime_ms = sw.ms();
      rec.degenerate = true;
    }
    out.push_back(rec);
  }

  if (!(wants(c, "n") || wants(c, "no") || wants(c, "nor"))) return out;
  const auto opt = options_for(c, cfg);
  Stopwatch sw;
  const auto cand = arcs_n_match(inst.q, inst.p, opt.thresholds.c);
  const auto pairs = pairs_from_correspondences(inst.q, inst.p, cand);
  const double n_ms = sw.ms();
  const auto flags = planted_flags(cand, inst.truth);

  if (wants(c, "n")) {
    auto rec = make_record(c, trial, seed, "n");
    rec.runtime_ms = n_ms;
    rec.consensus_size = cand.size();
    rec.inlier_purity = cand.empty() ? 0.0
                                     : static_cast<double>(std::count(flags.begin(), flags.end(), true)) /
                                           static_cast<double>(cand.size());
    out.push_back(rec);
  }
  if (!(wants(c, "no") || wants(c, "nor"))) return out;

  auto rec_o = make_record(c, trial, seed, "no");
  auto rec_r = make_record(c, trial, seed, "nor");
  if (pairs.empty()) {
    rec_o.degenerate = rec_r.degenerate = true;
    rec_o.runtime_ms = rec_r.runtime_ms = n_ms;
  } else {
    PipelineOptions po = opt;
    po.stages = {false, true, wants(c, "nor")};
    const auto res = run_pairs(pairs, po);
    const double o_ms = res.timings[0].ms;
    rec_o.runtime_ms = n_ms + o_ms;
    rec_o.error_deg = rotation_error_deg(*res.pruned_rotation, inst.r_true);
    rec_o.consensus_size = res.consensus.size();
    rec_o.inlier_purity = inlier_purity(res.consensus, flags);
    rec_r.runtime_ms = n_ms + res.total_ms();
    rec_r.error_deg = rotation_error_deg(res.rotation, inst.r_true);
    rec_r.consensus_size = rec_o.consensus_size;
    rec_r.inlier_purity = rec_o.inlier_purity;
  }
  if (wants(c, "no")) out.push_back(rec_o);
  if (wants(c, "nor")) out.push_back(rec_r);
  return out;
}

inline std::vector<TrialRecord> run_pair_trial(const CaseConfig& c, const ExperimentConfig& cfg, int trial,
                                               std::uint64_t seed) {
  std::vector<TrialRecord> out;
  const auto inst = gen_rrs(c.l, c.k, c.sigma, seed, c.norm_constrained, draw_rotation(c.rotation, seed));
  const auto flags = index_flags(inst.pairs.size(), inst.inliers);
  const auto opt = options_for(c, cfg);

  if (wants(c, "o") || wants(c, "or")) {
    PipelineOptions po = opt;
    po.stages = {false, true, wants(c, "or")};
    const auto res = run_pairs(inst.pairs, po);
    if (wants(c, "o")) {
      auto rec = make_record(c, trial, seed, "o");
      rec.runtime_ms = res.timings[0].ms;
      rec.error_deg = rotation_error_deg(*res.pruned_rotation, inst.r_true);
      rec.consensus_size = res.consensus.size();
      rec.inlier_purity = inlier_purity(res.consensus, flags);
      out.push_back(rec);
    }
    if (wants(c, "or")) {
      auto rec = make_record(c, trial, seed, "or");
      rec.runtime_ms = res.total_ms();
      rec.error_deg = rotation_error_deg(res.rotation, inst.r_true);
      rec.consensus_size = res.consensus.size();
      rec.inlier_purity = inlier_purity(res.consensus, flags);
      out.push_back(rec);
    }
  }
  if (wants(c, "r")) {
    PipelineOptions po = opt;
    po.stages = {false, false, true};
    const auto res = run_pairs(inst.pairs, po);
    auto rec = make_record(c, trial, seed, "r");
    rec.runtime_ms = res.total_ms();
    rec.error_deg = rotation_error_deg(res.rotation, inst.r_true);
    rec.consensus_size = inst.pairs.size();
    rec.inlier_purity = static_cast<double>(inst.inliers.size()) / static_cast<double>(inst.pairs.size());
    out.push_back(rec);
  }
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

inline std::vector<StageSummary> summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
  std::vector<StageSummary> out;
  for (const auto& c : cfg.cases) {
    for (const auto& st : c.stages) {
      StageSummary s;
      s.case_label = c.label;
      s.stage = st;
      std::vector<double> errors;
      std::vector<double> rt;
      std::vector<double> cs;
      std::vector<double> pu;
      bool has_rotation = false;
      for (const auto& r : records) {
        if (r.case_label != c.label || r.stage != st) continue;
        ++s.trials;
        rt.push_back(r.runtime_ms);
        cs.push_back(static_cast<double>(r.consensus_size));
        pu.push_back(r.inlier_purity);
        if (r.degenerate) {
          errors.push_back(180.0);
          has_rotation = true;
        } else if (!std::isnan(r.error_deg)) {
          errors.push_back(r.error_deg);
          has_rotation = true;
        }
      }
      s.mean_runtime_ms = mean_of(rt);
      s.mean_consensus_size = mean_of(cs);
      s.mean_inlier_purity = mean_of(pu);
      if (has_rotation) {
        s.mean_error_deg = mean_of(errors);
        double var = 0.0;
        for (const double e : errors) var += (e - s.mean_error_deg) * (e - s.mean_error_deg);
        s.std_error_deg = errors.size() > 1 ? std::sqrt(var / static_cast<double>(errors.size() - 1)) : 0.0;
        std::vector<double> sorted = errors;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t h = sorted.size() / 2;
        s.median_error_deg = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
        s.success_rate = success_rate(errors, cfg.success_threshold_deg);
      }
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  detail::validate(cfg);
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t jobs = cfg.cases.size() * trials;
  std::vector<std::vector<TrialRecord>> slots(jobs);
  parallel_for(jobs, [&](unsigned, std::size_t job) {
    const auto& c = cfg.cases[job / trials];
    const int t = static_cast<int>(job % trials);
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(t));
    slots[job] = c.family == Family::Clouds ? detail::run_cloud_trial(c, cfg, t, seed)
                                             : detail::run_pair_trial(c, cfg, t, seed);
  });
  ExperimentReport rep;
  rep.config = cfg;
  for (auto& s : slots) {
    for (auto& r : s) rep.records.push_back(std::move(r));
  }
  rep.summaries = detail::summarize(cfg, rep.records);
  return rep;
}

// ---------------------------------------------------------------- presets

struct PresetInfo {
  std::string name;
  std::string description;
};

inline const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> catalog{
      {"table2", "noiseless matching + Kabsch, k=2, m in {1e4,1e5} (full: +1e6), n=0.8m"},
      {"table3", "windowed matching size l, m=1000/n=800/k=200 (full: +5000, +10000), sigma=0.01"},
      {"table4", "consensus purity after matching + pruning, same sizes as table3"},
      {"table5_scaled", "pruning / pruning+refinement on norm-constrained pairs, l in {1e5,1e6} (full: up to 1e7)"},
      {"fig1_s_sweep", "pruning / pruning+refinement error versus s in {10,...,180}"},
      {"fig2_pipeline", "full pipeline on clouds, m=1e4, n=8000, k in {1000,2000} (full: 1000..5000)"},
      {"fig4_phase", "refinement alone vs pruning+refinement over l and inlier ratio"},
      {"fig5_sensitivity", "pruning+refinement error versus the true rotation angle and axis angles"},
      {"fig6_noise", "windowed matching size l versus sigma, m=1000, n=800, k=200"},
  };
  return catalog;
}

inline ExperimentConfig make_preset(const std::string& name, bool full = false) {
  ExperimentConfig cfg;
  cfg.name = name;
  auto clouds = [](std::string label, std::size_t m, std::size_t n, std::size_t k, double sigma,
                   std::vector<std::string> stages) {
    CaseConfig c;
    c.label = std::move(label);
    c.family = Family::Clouds;
    c.m = m;
    c.n = n;
    c.k = k;
    c.sigma = sigma;
    c.stages = std::move(stages);
    return c;
  };
  auto pairs = [](std::string label, std::size_t l, std::size_t k, double sigma, std::vector<std::string> stages) {
    CaseConfig c;
    c.label = std::move(label);
    c.family = Family::Pairs;
    c.l = l;
    c.k = k;
    c.sigma = sigma;
    c.stages = std::move(stages);
    return c;
  };
  const auto num = [](double v) { return format_double(v); };

  if (name == "table2") {
    std::vector<std::size_t> ms{10000, 100000};
    if (full) ms.push_back(1000000);
    for (const auto m : ms) cfg.cases.push_back(clouds("m=" + std::to_string(m), m, m * 8 / 10, 2, 0.0, {"arcs"}));
    cfg.trials = full ? 100 : 20;
  } else if (name == "table3" || name == "table4") {
    std::vector<std::size_t> ms{1000};
    if (full) ms.insert(ms.end(), {5000, 10000});
    const std::vector<std::string> st = name == "table3" ? std::vector<std::string>{"n"} : std::vector<std::string>{"n", "no"};
    for (const auto m : ms) cfg.cases.push_back(clouds("m=" + std::to_string(m), m, m * 8 / 10, m / 5, 0.01, st));
    cfg.trials = name == "table3" ? (full ? 1 : 10) : 20;
  } else if (name == "table5_scaled") {
    std::vector<std::pair<std::size_t, std::size_t>> lk{{100000, 1000}, {1000000, 1000}};
    if (full) lk.insert(lk.end(), {{5000000, 3000}, {10000000, 3000}, {10000000, 1000}});
    for (const auto& [l, k] : lk) {
      cfg.cases.push_back(pairs("l=" + std::to_string(l) + ",k=" + std::to_string(k), l, k, 0.01, {"o", "or"}));
    }
    cfg.trials = 20;
  } else if (name == "fig1_s_sweep") {
    for (int s = 10; s <= 180; s += 10) {
      auto c = pairs("s=" + std::to_string(s), 1000, 100, 0.01, {"o", "or"});
      c.s = s;
      cfg.cases.push_back(c);
    }
    cfg.trials = full ? 500 : 50;
  } else if (name == "fig2_pipeline") {
    std::vector<std::size_t> ks{1000, 2000};
    if (full) ks.insert(ks.end(), {3000, 4000, 5000});
    for (const auto k : ks) cfg.cases.push_back(clouds("k=" + std::to_string(k), 10000, 8000, k, 0.01, {"no", "nor"}));
    cfg.trials = full ? 20 : 3;
  } else if (name == "fig4_phase") {
    std::vector<std::size_t> ls{10000, 50000, 90000};
    std::vector<int> pct{1, 5, 9};
    if (full) {
      ls.clear();
      pct.clear();
      for (int t = 1; t <= 9; ++t) {
        ls.push_back(static_cast<std::size_t>(t) * 10000);
        pct.push_back(t);
      }
    }
    for (const auto l : ls) {
      for (const int p : pct) {
        const std::size_t k = l * static_cast<std::size_t>(p) / 100;
        cfg.cases.push_back(pairs("l=" + std::to_string(l) + ",ratio=" + std::to_string(p) + "%", l, k, 0.01, {"r", "or"}));
      }
    }
    cfg.trials = full ? 50 : 5;
  } else if (name == "fig5_sensitivity") {
    const std::size_t l = full ? 100000 : 10000;
    const std::size_t k = l / 100;
    constexpr double pi = std::numbers::pi;
    const int steps = full ? 8 : 4;
    for (int j = 0; j <= steps; ++j) {
      const double omega = 2.0 * pi * j / steps;
      auto c = pairs("omega=" + num(omega), l, k, 0.01, {"o", "or"});
      c.rotation.omega = omega;
      cfg.cases.push_back(c);
    }
    for (int j = 0; j <= steps; ++j) {
      const double theta = pi * j / steps;
      auto c = pairs("theta=" + num(theta), l, k, 0.01, {"o", "or"});
      c.rotation = {pi / 2, theta, pi / 4};
      cfg.cases.push_back(c);
    }
    for (int j = 0; j <= steps; ++j) {
      const double phi = pi * j / steps;
      auto c = pairs("phi=" + num(phi), l, k, 0.01, {"o", "or"});
      c.rotation = {pi / 2, pi / 4, phi};
      cfg.cases.push_back(c);
    }
    cfg.trials = full ? 100 : 5;
  } else if (name == "fig6_noise") {
    for (int j = 1; j <= 10; ++j) {
      const double sigma = 0.01 * j;
      cfg.cases.push_back(clouds("sigma=" + num(sigma), 1000, 800, 200, sigma, {"n"}));
    }
    cfg.trials = full ? 100 : 10;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return cfg;
}

// ---------------------------------------------------------------- output

namespace detail {

inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (const char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : cfg.cases) {
    nlohmann::json j{{"label", c.label},
                     {"family", c.family == Family::Clouds ? "clouds" : "pairs"},
                     {"k", c.k},
                     {"sigma", c.sigma},
                     {"s", c.s},
                     {"stages", c.stages}};
    if (c.family == Family::Clouds) {
      j["m"] = c.m;
      j["n"] = c.n;
    } else {
      j["l"] = c.l;
      j["norm_constrained"] = c.norm_constrained;
    }
    if (c.rotation.omega) j["omega"] = *c.rotation.omega;
    if (c.rotation.theta) j["theta"] = *c.rotation.theta;
    if (c.rotation.phi) j["phi"] = *c.rotation.phi;
    cases.push_back(j);
  }
  return {{"name", cfg.name},
          {"trials", cfg.trials},
          {"seed", cfg.seed},
          {"success_threshold_deg", cfg.success_threshold_deg},
          {"refine",
           {{"gamma0", cfg.refine.gamma0},
            {"beta", cfg.refine.beta},
            {"max_iterations", cfg.refine.max_iterations},
            {"tol", cfg.refine.tol}}},
          {"thresholds", {{"c_per_sigma", kResidualSigmaFactor}, {"cbar_per_sigma", kAxisSigmaFactor}}},
          {"cases", cases}};
}

inline nlohmann::json to_json(const ExperimentReport& rep) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : rep.records) {
    records.push_back({{"case", r.case_label},
                       {"trial", r.trial},
                       {"stage", r.stage},
                       {"seed", r.seed},
                       {"error_deg", detail::number_or_null(r.error_deg)},
                       {"runtime_ms", r.runtime_ms},
                       {"consensus_size", r.consensus_size},
                       {"inlier_purity", r.inlier_purity},
                       {"degenerate", r.degenerate}});
  }
  nlohmann::json aggregates = nlohmann::json::array();
  for (const auto& s : rep.summaries) {
    aggregates.push_back({{"case", s.case_label},
                          {"stage", s.stage},
                          {"trials", s.trials},
                          {"mean_error_deg", detail::number_or_null(s.mean_error_deg)},
                          {"std_error_deg", detail::number_or_null(s.std_error_deg)},
                          {"median_error_deg", detail::number_or_null(s.median_error_deg)},
                          {"success_rate", detail::number_or_null(s.success_rate)},
                          {"mean_runtime_ms", s.mean_runtime_ms},
                          {"mean_consensus_size", s.mean_consensus_size},
                          {"mean_inlier_purity", s.mean_inlier_purity}});
  }
  return {{"config", to_json(rep.config)}, {"rng", kRngAlgorithm}, {"records", records}, {"aggregates", aggregates}};
}

inline void write_trials_csv(const std::string& path, const ExperimentReport& rep) {
  auto out = detail::open_out(path);
  out << "case,trial,stage,error_deg,runtime_ms,consensus_size,inlier_purity\n";
  for (const auto& r : rep.records) {
    out << detail::csv_field(r.case_label) << ',' << r.trial << ',' << r.stage << ','
        << detail::csv_number(r.degenerate ? 180.0 : r.error_deg) << ',' << format_double(r.runtime_ms) << ','
        << r.consensus_size << ',' << format_double(r.inlier_purity) << '\n';
  }
  detail::finish(out, path);
}

inline void write_summary_csv(const std::string& path, const ExperimentReport& rep) {
  auto out = detail::open_out(path);
  out << "case,stage,trials,mean_error_deg,std_error_deg,median_error_deg,success_rate,mean_runtime_ms,"
         "mean_consensus_size,mean_inlier_purity\n";
  for (const auto& s : rep.summaries) {
    out << detail::csv_field(s.case_label) << ',' << s.stage << ',' << s.trials << ','
        << detail::csv_number(s.mean_error_deg) << ',' << detail::csv_number(s.std_error_deg) << ','
        << detail::csv_number(s.median_error_deg) << ',' << detail::csv_number(s.success_rate) << ','
        << format_double(s.mean_runtime_ms) << ',' << format_double(s.mean_consensus_size) << ','
        << format_double(s.mean_inlier_purity) << '\n';
  }
  detail::finish(out, path);
}

}  // namespace arcs
