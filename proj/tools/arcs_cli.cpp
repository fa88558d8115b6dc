// arcs: command-line front end.
//
//   arcs gen srcs --m 1000 --n 800 --k 200 --sigma 0.01 --seed 7 --out dir
//   arcs gen rrs  --l 1000 --k 100 --sigma 0.01 --norm-constrained --out dir
//   arcs match    --q Q.csv --p P.csv [--sigma s | --c c | --noiseless] --out matches.csv
//   arcs prune    --pairs pairs.csv --sigma 0.01 [--s 90] [--out result.json]
//   arcs refine   --pairs pairs.csv [--w0 1,0,0,0] [--out result.json]
//   arcs pipeline (--q Q.csv --p P.csv | --pairs pairs.csv) --stage n,o,r --sigma 0.01
//   arcs bench    --preset table4 --trials 20 --seed 1 --out-dir reports
//
// Exit codes: 0 ok, 2 degenerate geometry, 64 usage error, 74 I/O or parse error.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "arcs/experiment.hpp"
#include "arcs/io.hpp"
#include "arcs/pipeline.hpp"
#include "arcs/synthetic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDegenerate = 2;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 74;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ThresholdArgs {
  std::optional<double> sigma;
  std::optional<double> c;
  std::optional<double> cbar;

  void add(CLI::App* cmd) {
    cmd->add_option("--sigma", sigma, "noise level; sets c = 5.54 sigma and cbar = 4.9 sigma")->check(CLI::PositiveNumber);
    cmd->add_option("--c", c, "residual / norm threshold (overrides sigma)")->check(CLI::PositiveNumber);
    cmd->add_option("--cbar", cbar, "axis threshold (overrides sigma)")->check(CLI::PositiveNumber);
  }

  double residual() const {
    if (c) return *c;
    if (sigma) return arcs::kResidualSigmaFactor * *sigma;
    throw UsageError("need --sigma or --c");
  }

  double axis() const {
    if (cbar) return *cbar;
    if (sigma) return arcs::kAxisSigmaFactor * *sigma;
    throw UsageError("need --sigma or --cbar");
  }
};

struct RefineArgs {
  arcs::RefineConfig cfg;

  void add(CLI::App* cmd) {
    cmd->add_option("--gamma0", cfg.gamma0, "initial step size")->capture_default_str();
    cmd->add_option("--beta", cfg.beta, "step decay in (0,1)")->capture_default_str();
    cmd->add_option("--iters", cfg.max_iterations, "maximum iterations")->capture_default_str();
    cmd->add_option("--tol", cfg.tol, "stop when step * |grad| < tol")->capture_default_str();
  }
};

void emit(const nlohmann::json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    arcs::write_json(out, j);
  }
}

nlohmann::json quaternion_json(const arcs::UnitQuaternion& w) {
  return {w[0], w[1], w[2], w[3]};
}

nlohmann::json result_json(const arcs::PipelineResult& r, const std::optional<arcs::Truth>& truth) {
  nlohmann::json j{{"rotation", arcs::rotation_to_json(r.rotation)},
                   {"quaternion", quaternion_json(r.quaternion())},
                   {"consensus", r.consensus},
                   {"consensus_size", r.consensus.size()}};
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& t : r.timings) timings[t.stage] = t.ms;
  j["timings_ms"] = timings;
  if (!r.candidates.empty()) j["candidate_count"] = r.candidates.size();
  if (r.axis_angle) j["axis_angle"] = {{"theta", r.axis_angle->theta}, {"phi", r.axis_angle->phi}, {"omega", r.axis_angle->omega}};
  if (r.refinement) {
    j["refine"] = {{"iterations", r.refinement->iterations()}, {"converged", r.refinement->converged}};
    if (!r.refinement->history.empty()) j["refine"]["final_h"] = r.refinement->history.back().h;
  }
  if (truth) {
    j["error_deg"] = arcs::rotation_error_deg(r.rotation, truth->r);
    if (r.pruned_rotation) j["pruned_error_deg"] = arcs::rotation_error_deg(*r.pruned_rotation, truth->r);
  }
  return j;
}

arcs::UnitQuaternion parse_quaternion(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError("--w0: '" + tok + "' is not a number");
    }
  }
  if (v.size() != 4) throw UsageError("--w0 needs 4 comma-separated numbers");
  try {
    return arcs::UnitQuaternion::normalized(arcs::Vector4(v[0], v[1], v[2], v[3]));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--w0: ") + e.what());
  }
}

arcs::StageSelection parse_stages(const std::string& s, bool& noiseless) {
  arcs::StageSelection sel;
  noiseless = false;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "arcs") {
      noiseless = true;
    } else if (tok == "n") {
      sel.n = true;
    } else if (tok == "o") {
      sel.o = true;
    } else if (tok == "r") {
      sel.r = true;
    } else {
      throw UsageError("unknown stage '" + tok + "' (expected arcs or a list of n,o,r)");
    }
  }
  if (noiseless && (sel.n || sel.o || sel.r)) throw UsageError("stage arcs cannot be combined with n,o,r");
  if (!noiseless && !sel.o && !sel.r) throw UsageError("select at least one of o,r (n alone is the match command)");
  return sel;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw arcs::IoError("cannot create directory '" + dir + "': " + ec.message());
}

std::string join(const std::string& dir, const char* name) { return (std::filesystem::path(dir) / name).string(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotation and correspondence search between 3D point sets"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: ARCS_THREADS or all cores)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic instance with ground truth");
  gen->require_subcommand(1);
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  double sigma = 0.0;
  std::size_t gm = 0, gn = 0, gk = 0, gl = 0;
  bool norm_constrained = false;
  auto* gen_srcs = gen->add_subcommand("srcs", "two clouds Q (m points) and P (n points) with k planted pairs");
  gen_srcs->add_option("--m", gm, "size of Q")->required();
  gen_srcs->add_option("--n", gn, "size of P")->required();
  gen_srcs->add_option("--k", gk, "planted inlier pairs")->required();
  auto* gen_rrs = gen->add_subcommand("rrs", "l measurement pairs, k of them inliers");
  gen_rrs->add_option("--l", gl, "number of pairs")->required();
  gen_rrs->add_option("--k", gk, "number of inliers")->required();
  gen_rrs->add_flag("--norm-constrained", norm_constrained, "outliers satisfy | |y| - |x| | <= 5.54 sigma");
  for (auto* c : {gen_srcs, gen_rrs}) {
    c->add_option("--sigma", sigma, "noise level")->capture_default_str()->check(CLI::NonNegativeNumber);
    c->add_option("--seed", seed, "random seed")->capture_default_str();
    c->add_option("--out", out_dir, "output directory")->capture_default_str();
  }

  // match
  auto* match = app.add_subcommand("match", "norm-based correspondences between two clouds");
  std::string q_path, p_path, pairs_path, out_path, pairs_out;
  bool noiseless = false;
  ThresholdArgs mth;
  match->add_option("--q", q_path, "cloud Q (CSV or ASCII PLY)")->required();
  match->add_option("--p", p_path, "cloud P (CSV or ASCII PLY)")->required();
  match->add_flag("--noiseless", noiseless, "one-to-one greedy matching at tolerance 1e-14");
  match->add_option("--sigma", mth.sigma, "noise level; c = 5.54 sigma")->check(CLI::PositiveNumber);
  match->add_option("--c", mth.c, "norm threshold")->check(CLI::NonNegativeNumber);
  match->add_option("--out", out_path, "correspondence CSV (i,j); stdout if omitted");
  match->add_option("--pairs-out", pairs_out, "also write the matched pairs as y1,y2,y3,x1,x2,x3");
  match->add_option("--seed", seed, "echoed in the output")->capture_default_str();

  // prune
  auto* prune_cmd = app.add_subcommand("prune", "consensus pruning on measurement pairs");
  ThresholdArgs pth;
  int s = arcs::kDefaultPhiSamples;
  std::string truth_path;
  prune_cmd->add_option("--pairs", pairs_path, "pairs CSV")->required();
  pth.add(prune_cmd);
  prune_cmd->add_option("--s", s, "number of axis longitude samples")->capture_default_str()->check(CLI::PositiveNumber);
  prune_cmd->add_option("--truth", truth_path, "ground-truth JSON; adds error_deg");
  prune_cmd->add_option("--out", out_path, "result JSON; stdout if omitted");
  prune_cmd->add_option("--seed", seed, "echoed in the output")->capture_default_str();

  // refine
  auto* refine_cmd = app.add_subcommand("refine", "subgradient refinement on unit quaternions");
  RefineArgs rargs;
  std::string w0_text = "1,0,0,0";
  refine_cmd->add_option("--pairs", pairs_path, "pairs CSV")->required();
  refine_cmd->add_option("--w0", w0_text, "initial quaternion w1,w2,w3,w4 (scalar first)")->capture_default_str();
  rargs.add(refine_cmd);
  refine_cmd->add_option("--truth", truth_path, "ground-truth JSON; adds error_deg");
  refine_cmd->add_option("--out", out_path, "result JSON; stdout if omitted");
  refine_cmd->add_option("--seed", seed, "echoed in the output")->capture_default_str();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run selected stages end to end");
  ThresholdArgs plth;
  RefineArgs pargs;
  std::string stage_text = "n,o,r";
  pipe->add_option("--q", q_path, "cloud Q");
  pipe->add_option("--p", p_path, "cloud P");
  pipe->add_option("--pairs", pairs_path, "pairs CSV (skips stage n)");
  pipe->add_option("--stage", stage_text, "arcs, or a comma list of n,o,r")->capture_default_str();
  plth.add(pipe);
  pipe->add_option("--s", s, "number of axis longitude samples")->capture_default_str()->check(CLI::PositiveNumber);
  pargs.add(pipe);
  pipe->add_option("--truth", truth_path, "ground-truth JSON; adds error_deg");
  pipe->add_option("--out", out_path, "result JSON; stdout if omitted");
  pipe->add_option("--seed", seed, "echoed in the output")->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "run a benchmark preset");
  std::string preset;
  std::optional<int> trials;
  bool full = false;
  bool list = false;
  std::string bench_dir = ".";
  bench->add_option("--preset", preset, "preset name (see --list)");
  bench->add_option("--trials", trials, "override the preset trial count")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "master seed")->capture_default_str();
  bench->add_flag("--full", full, "full-scale cases instead of desk-scale");
  bench->add_flag("--list", list, "print the preset catalog");
  bench->add_option("--out-dir", bench_dir, "directory for <preset>.json, <preset>.csv, <preset>_summary.csv")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (threads > 0) arcs::set_max_threads(threads);

    if (gen_srcs->parsed()) {
      const auto inst = arcs::gen_srcs(gm, gn, gk, sigma, seed);
      ensure_dir(out_dir);
      arcs::write_cloud_csv(join(out_dir, "Q.csv"), inst.q.points());
      arcs::write_cloud_csv(join(out_dir, "P.csv"), inst.p.points());
      arcs::Truth t{inst.r_true, nlohmann::json::array(), sigma, seed};
      for (const auto& c : inst.truth) t.inliers.push_back({c.i, c.j});
      arcs::write_truth(join(out_dir, "truth.json"), t);
    } else if (gen_rrs->parsed()) {
      const auto inst = arcs::gen_rrs(gl, gk, sigma, seed, norm_constrained);
      ensure_dir(out_dir);
      arcs::write_pairs_csv(join(out_dir, "pairs.csv"), inst.pairs);
      arcs::write_truth(join(out_dir, "truth.json"), {inst.r_true, inst.inliers, sigma, seed});
    } else if (match->parsed()) {
      const auto q = arcs::load_cloud(q_path);
      const auto p = arcs::load_cloud(p_path);
      arcs::CorrespondenceSet m;
      if (noiseless) {
        m = arcs::arcs_match(q, p, mth.c ? *mth.c : arcs::kNoiselessNormTolerance);
      } else {
        m = arcs::arcs_n_match(q, p, mth.residual());
      }
      std::ostringstream csv;
      csv << "i,j\n";
      for (const auto& c : m) csv << c.i << ',' << c.j << '\n';
      if (out_path.empty() || out_path == "-") {
        std::cout << csv.str();
      } else {
        auto f = arcs::detail::open_out(out_path);
        f << csv.str();
        arcs::detail::finish(f, out_path);
      }
      if (!pairs_out.empty()) arcs::write_pairs_csv(pairs_out, arcs::pairs_from_correspondences(q, p, m));
      std::cerr << "matched " << m.size() << " pairs (seed " << seed << ")\n";
    } else if (prune_cmd->parsed()) {
      const auto pairs = arcs::load_pairs(pairs_path);
      if (pairs.empty()) throw arcs::DegenerateConfiguration("no measurement pairs in '" + pairs_path + "'");
      arcs::PipelineOptions opt;
      opt.thresholds = {pth.residual(), pth.axis()};
      opt.s = s;
      opt.stages = {false, true, false};
      std::optional<arcs::Truth> truth;
      if (!truth_path.empty()) truth = arcs::load_truth(truth_path);
      auto j = result_json(arcs::run_pairs(pairs, opt), truth);
      j["seed"] = seed;
      j["thresholds"] = {{"c", opt.thresholds.c}, {"cbar", opt.thresholds.cbar}};
      j["s"] = s;
      emit(j, out_path);
    } else if (refine_cmd->parsed()) {
      const auto pairs = arcs::load_pairs(pairs_path);
      if (pairs.empty()) throw arcs::DegenerateConfiguration("no measurement pairs in '" + pairs_path + "'");
      const auto w0 = parse_quaternion(w0_text);
      const auto ds = arcs::build_Ds(pairs);
      arcs::detail::Stopwatch sw;
      const auto res = arcs::refine(ds, w0, rargs.cfg);
      arcs::PipelineResult pr;
      pr.rotation = arcs::quat_to_rotation(res.w);
      pr.consensus.resize(pairs.size());
      for (std::size_t i = 0; i < pairs.size(); ++i) pr.consensus[i] = i;
      pr.refinement = res;
      pr.timings.push_back({"r", sw.ms()});
      std::optional<arcs::Truth> truth;
      if (!truth_path.empty()) truth = arcs::load_truth(truth_path);
      auto j = result_json(pr, truth);
      j["seed"] = seed;
      emit(j, out_path);
    } else if (pipe->parsed()) {
      bool noiseless_stage = false;
      auto sel = parse_stages(stage_text, noiseless_stage);
      const bool clouds = !q_path.empty() || !p_path.empty();
      if (clouds && (q_path.empty() || p_path.empty())) throw UsageError("--q and --p go together");
      if (clouds == !pairs_path.empty()) throw UsageError("give either --q/--p or --pairs");
      if (!clouds && (sel.n || noiseless_stage)) throw UsageError("stages arcs and n need --q/--p");
      if (clouds && !noiseless_stage && !sel.n) throw UsageError("clouds need stage n (or arcs) first");
      std::optional<arcs::Truth> truth;
      if (!truth_path.empty()) truth = arcs::load_truth(truth_path);

      arcs::PipelineResult res;
      nlohmann::json thr = nlohmann::json::object();
      if (noiseless_stage) {
        const double c = plth.c ? *plth.c : arcs::kNoiselessNormTolerance;
        res = arcs::run_noiseless(arcs::load_cloud(q_path), arcs::load_cloud(p_path), c);
        thr["c"] = c;
      } else {
        arcs::PipelineOptions opt;
        opt.thresholds.c = plth.residual();
        if (sel.o) opt.thresholds.cbar = plth.axis();
        opt.s = s;
        opt.refine = pargs.cfg;
        opt.stages = sel;
        thr["c"] = opt.thresholds.c;
        if (sel.o) thr["cbar"] = opt.thresholds.cbar;
        res = clouds ? arcs::run_clouds(arcs::load_cloud(q_path), arcs::load_cloud(p_path), opt)
                     : arcs::run_pairs(arcs::load_pairs(pairs_path), opt);
      }
      auto j = result_json(res, truth);
      if (!res.candidates.empty()) {
        nlohmann::json used = nlohmann::json::array();
        for (const std::size_t t : res.consensus) used.push_back({res.candidates[t].i, res.candidates[t].j});
        j["correspondences"] = used;
      }
      j["stage"] = stage_text;
      j["seed"] = seed;
      j["thresholds"] = thr;
      j["s"] = s;
      emit(j, out_path);
    } else if (bench->parsed()) {
      if (list) {
        for (const auto& p : arcs::preset_catalog()) std::cout << p.name << "\t" << p.description << '\n';
        return kExitOk;
      }
      if (preset.empty()) throw UsageError("bench needs --preset or --list");
      arcs::ExperimentConfig cfg;
      try {
        cfg = arcs::make_preset(preset, full);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      if (trials) cfg.trials = *trials;
      cfg.seed = seed;
      const auto rep = arcs::run_experiment(cfg);
      ensure_dir(bench_dir);
      arcs::write_json(join(bench_dir, (preset + ".json").c_str()), arcs::to_json(rep));
      arcs::write_trials_csv(join(bench_dir, (preset + ".csv").c_str()), rep);
      arcs::write_summary_csv(join(bench_dir, (preset + "_summary.csv").c_str()), rep);
      for (const auto& sm : rep.summaries) {
        std::cout << sm.case_label << "  " << sm.stage << "  mean_error_deg=" << arcs::detail::csv_number(sm.mean_error_deg)
                  << "  success=" << arcs::detail::csv_number(sm.success_rate) << "  purity=" << sm.mean_inlier_purity
                  << "  size=" << sm.mean_consensus_size << "  ms=" << sm.mean_runtime_ms << '\n';
      }
    }
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const arcs::DegenerateConfiguration& e) {
    std::cerr << "degenerate: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const arcs::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitIo;
  } catch (const arcs::UnsupportedFormat& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kExitIo;
  } catch (const arcs::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
}
