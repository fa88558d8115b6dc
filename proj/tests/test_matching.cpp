#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "arcs/matching.hpp"
#include "arcs/random.hpp"
#include "arcs/synthetic.hpp"

using namespace arcs;

namespace {

PointCloud random_cloud(Rng& rng, std::size_t n) {
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = gaussian_point(rng);
  return PointCloud(std::move(pts));
}

CorrespondenceSet brute_force_band(const PointCloud& q, const PointCloud& p, double c) {
  CorrespondenceSet out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (std::abs(q.norms()[i] - p.norms()[j]) <= c) out.push_back({i, j});
    }
  }
  return out;
}

}  // namespace

TEST(NormBandMatch, EqualsBruteForce) {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const auto q = random_cloud(rng, 1 + rng.index(120));
    const auto p = random_cloud(rng, 1 + rng.index(120));
    const double c = rng.uniform(1e-4, 0.2);
    EXPECT_EQ(arcs_n_match(q, p, c), brute_force_band(q, p, c)) << "trial " << t;
  }
}

TEST(NormBandMatch, DuplicateNormsAllPaired) {
  const PointCloud q({Point3(1, 0, 0), Point3(0, 1, 0)});
  const PointCloud p({Point3(0, 0, 1), Point3(0, -1, 0), Point3(3, 0, 0)});
  EXPECT_EQ(arcs_n_match(q, p, 0.1), (CorrespondenceSet{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
}

TEST(NormBandMatch, EmptyAndInvalid) {
  Rng rng(12);
  EXPECT_TRUE(arcs_n_match(PointCloud(), random_cloud(rng, 5), 0.1).empty());
  EXPECT_THROW(arcs_n_match(random_cloud(rng, 3), random_cloud(rng, 3), 0.0), std::invalid_argument);
}

TEST(NormBandMatch, KeepsPlantedPairs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = gen_srcs(500, 400, 100, 0.01, seed);
    const auto cand = arcs_n_match(inst.q, inst.p, kMatchSigmaFactor * 0.01);
    for (const auto& c : inst.truth) EXPECT_TRUE(std::binary_search(cand.begin(), cand.end(), c));
  }
}

TEST(GreedyMatch, IsPartialMatchingWithinBand) {
  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    const auto q = random_cloud(rng, 1 + rng.index(80));
    const auto p = random_cloud(rng, 1 + rng.index(80));
    const double c = rng.uniform(0.0, 0.1);
    const auto m = arcs_match(q, p, c);
    std::set<std::size_t> is, js;
    for (const auto& x : m) {
      EXPECT_LE(std::abs(q.norms()[x.i] - p.norms()[x.j]), c);
      EXPECT_TRUE(is.insert(x.i).second);
      EXPECT_TRUE(js.insert(x.j).second);
    }
    EXPECT_TRUE(std::is_sorted(m.begin(), m.end()));
  }
}

TEST(GreedyMatch, NoiselessRecoversPlantedSet) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = gen_srcs(2000, 1600, 5, 0.0, seed);
    EXPECT_EQ(arcs_match(inst.q, inst.p, kNoiselessNormTolerance), inst.truth) << "seed " << seed;
  }
}

TEST(Solve, NoiselessRecoversRotation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = gen_srcs(1000, 800, 2, 0.0, seed);
    const auto sol = arcs_solve(inst.q, inst.p);
    EXPECT_EQ(sol.matches, inst.truth);
    EXPECT_LT(rotation_error_deg(sol.rotation, inst.r_true), 1e-6);
  }
}

TEST(Solve, PermutationEquivariant) {
  const auto inst = gen_srcs(300, 200, 3, 0.0, 9);
  std::vector<Point3> qs = inst.q.points();
  std::reverse(qs.begin(), qs.end());
  const auto sol = arcs_solve(PointCloud(qs), inst.p);
  ASSERT_EQ(sol.matches.size(), 3u);
  for (const auto& m : sol.matches) {
    EXPECT_TRUE(std::binary_search(inst.truth.begin(), inst.truth.end(), Correspondence{qs.size() - 1 - m.i, m.j}));
  }
  EXPECT_LT(rotation_error_deg(sol.rotation, inst.r_true), 1e-6);
}

// Appends Q points whose norms equal those of unmatched P points, so the
// greedy matcher pairs them with outliers.
SrcsInstance with_norm_collisions(SrcsInstance inst, std::size_t count, std::uint64_t seed) {
  std::vector<bool> used(inst.p.size(), false);
  for (const auto& m : inst.truth) used[m.j] = true;
  std::vector<Point3> qs = inst.q.points();
  Rng rng(seed);
  for (std::size_t j = 0; j < inst.p.size() && count > 0; ++j) {
    if (used[j]) continue;
    const Point3 u = Point3(rng.normal(), rng.normal(), rng.normal()).normalized();
    qs.push_back(inst.p[j].norm() * u);
    --count;
  }
  inst.q = PointCloud(qs);
  return inst;
}

TEST(Solve, DropsOutliersWithCollidingNorms) {
  for (const std::size_t k : {2u, 5u, 300u}) {
    const auto inst = with_norm_collisions(gen_srcs(2000, 1600, k, 0.0, 40 + k), 3, 7);
    const auto raw = arcs_match(inst.q, inst.p, kNoiselessNormTolerance);
    ASSERT_GT(raw.size(), inst.truth.size()) << "k=" << k;
    const auto sol = arcs_solve(inst.q, inst.p);
    EXPECT_EQ(sol.matches, inst.truth) << "k=" << k;
    EXPECT_LT(rotation_error_deg(sol.rotation, inst.r_true), 1e-6) << "k=" << k;
  }
}

TEST(Solve, FewerThanTwoMatchesIsDegenerate) {
  const auto inst = gen_srcs(100, 80, 1, 0.0, 3);
  EXPECT_THROW(arcs_solve(inst.q, inst.p), DegenerateConfiguration);
  EXPECT_THROW(arcs_solve(PointCloud(), inst.p), DegenerateConfiguration);
}

TEST(Pairs, FollowCorrespondences) {
  const PointCloud q({Point3(1, 0, 0), Point3(0, 2, 0)});
  const PointCloud p({Point3(0, 0, 2), Point3(0, 1, 0)});
  const auto pairs = pairs_from_correspondences(q, p, CorrespondenceSet{{1, 0}});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].y, Point3(0, 2, 0));
  EXPECT_EQ(pairs[0].x, Point3(0, 0, 2));
}
