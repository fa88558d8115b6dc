// Generate two clouds with 200 planted correspondences, then recover the
// rotation with matching, pruning and refinement.

#include <iostream>

#include "arcs/arcs.hpp"

int main() {
  const double sigma = 0.01;
  const auto inst = arcs::gen_srcs(1000, 800, 200, sigma, 42);

  arcs::PipelineOptions opt;
  opt.thresholds = arcs::Thresholds::from_sigma(sigma);
  opt.stages = {true, true, true};
  const auto res = arcs::run_clouds(inst.q, inst.p, opt);

  std::cout << "candidates " << res.candidates.size() << ", consensus " << res.consensus.size() << '\n';
  std::cout << "error after pruning    " << arcs::rotation_error_deg(*res.pruned_rotation, inst.r_true) << " deg\n";
  std::cout << "error after refinement " << arcs::rotation_error_deg(res.rotation, inst.r_true) << " deg\n";
  for (const auto& t : res.timings) std::cout << t.stage << ": " << t.ms << " ms\n";
}
