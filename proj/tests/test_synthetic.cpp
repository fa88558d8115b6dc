#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "arcs/random.hpp"
#include "arcs/synthetic.hpp"

using namespace arcs;

TEST(Rng, SameSeedSameStream) {
  Rng a(5), b(5), c(6);
  for (int t = 0; t < 100; ++t) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    (void)c;
  }
  EXPECT_NE(Rng(5).next_u64(), Rng(6).next_u64());
}

TEST(Rng, UniformRangeAndMoments) {
  Rng rng(7);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int t = 0; t < n; ++t) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, IndexAndShuffle) {
  Rng rng(8);
  EXPECT_THROW(rng.index(0), std::invalid_argument);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  rng.shuffle(std::span<int>(w));
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(DeriveSeed, DistinctChildren) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 20; ++m) {
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(m, i));
  }
  EXPECT_EQ(seen.size(), 2000u);
}

TEST(GenRrs, Reproducible) {
  const auto a = gen_rrs(300, 30, 0.01, 9, true);
  const auto b = gen_rrs(300, 30, 0.01, 9, true);
  const auto c = gen_rrs(300, 30, 0.01, 10, true);
  EXPECT_EQ(a.r_true, b.r_true);
  EXPECT_EQ(a.inliers, b.inliers);
  for (std::size_t i = 0; i < a.pairs.size(); ++i) EXPECT_EQ(a.pairs[i].y, b.pairs[i].y);
  EXPECT_NE(a.r_true, c.r_true);
}

TEST(GenRrs, InliersAndNormBand) {
  const double sigma = 0.01;
  const auto inst = gen_rrs(2000, 100, sigma, 11, true);
  EXPECT_EQ(inst.inliers.size(), 100u);
  EXPECT_TRUE(std::is_sorted(inst.inliers.begin(), inst.inliers.end()));
  EXPECT_TRUE(is_rotation(inst.r_true));
  const auto flags = index_flags(inst.pairs.size(), inst.inliers);
  for (std::size_t i = 0; i < inst.pairs.size(); ++i) {
    const auto& p = inst.pairs[i];
    if (flags[i]) {
      EXPECT_LT((p.y - inst.r_true * p.x).norm(), 10 * sigma);
    } else {
      EXPECT_LE(std::abs(p.y.norm() - p.x.norm()), kMatchSigmaFactor * sigma);
    }
  }
}

TEST(GenRrs, ZeroNoiseNormConstrained) {
  const auto inst = gen_rrs(100, 10, 0.0, 12, true);
  for (const auto& p : inst.pairs) EXPECT_NEAR(p.y.norm(), p.x.norm(), 1e-12);
}

TEST(GenRrs, FixedRotationAndBadArgs) {
  const auto r = rodrigues(Point3(0, 0, 1), 0.4);
  EXPECT_EQ(gen_rrs(10, 2, 0.0, 1, false, r).r_true, r);
  EXPECT_THROW(gen_rrs(10, 0, 0.01, 1, false), std::invalid_argument);
  EXPECT_THROW(gen_rrs(10, 11, 0.01, 1, false), std::invalid_argument);
  EXPECT_THROW(gen_rrs(10, 2, -1.0, 1, false), std::invalid_argument);
}

TEST(GenSrcs, TruthIsPlanted) {
  const auto inst = gen_srcs(400, 300, 50, 0.0, 13);
  EXPECT_EQ(inst.q.size(), 400u);
  EXPECT_EQ(inst.p.size(), 300u);
  EXPECT_EQ(inst.truth.size(), 50u);
  std::set<std::size_t> is, js;
  for (const auto& c : inst.truth) {
    EXPECT_LT((inst.q[c.i] - inst.r_true * inst.p[c.j]).norm(), 1e-12);
    is.insert(c.i);
    js.insert(c.j);
  }
  EXPECT_EQ(is.size(), 50u);
  EXPECT_EQ(js.size(), 50u);
  EXPECT_THROW(gen_srcs(10, 20, 5, 0.0, 1), std::invalid_argument);
}

TEST(Metrics, SuccessRateAndPurity) {
  const std::vector<double> e{1.0, 9.99, 10.0, 50.0};
  EXPECT_DOUBLE_EQ(success_rate(e), 0.5);
  EXPECT_DOUBLE_EQ(success_rate(e, 60.0), 1.0);
  EXPECT_THROW(success_rate(std::vector<double>{}), std::invalid_argument);
  const std::vector<bool> flags{true, false, true, true};
  EXPECT_DOUBLE_EQ(inlier_purity(std::vector<std::size_t>{0, 1, 2}, flags), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(inlier_purity(std::vector<std::size_t>{}, flags), 0.0);
}

TEST(Metrics, PlantedFlags) {
  const CorrespondenceSet truth{{1, 2}, {3, 4}};
  const CorrespondenceSet cand{{0, 0}, {1, 2}, {3, 3}, {3, 4}};
  EXPECT_EQ(planted_flags(cand, truth), (std::vector<bool>{false, true, false, true}));
}

TEST(QuadFormModel, InliersVanishAtTruth) {
  const auto m = gen_quadform_model(100, 60, 14);
  ASSERT_EQ(m.ds.size(), 100u);
  for (const std::size_t i : m.inliers) EXPECT_NEAR(m.ds[i].value(m.w_true.coeffs()), 0.0, 1e-12);
  EXPECT_GT(m.ds[99].value(m.w_true.coeffs()), 0.0);
  EXPECT_THROW(gen_quadform_model(10, 10, 1), std::invalid_argument);
}

TEST(GenRrs, UnconstrainedOutliersOftenLeaveBand) {
  const auto inst = gen_rrs(1000, 100, 0.01, 15, false);
  const auto flags = index_flags(inst.pairs.size(), inst.inliers);
  std::size_t outside = 0;
  for (std::size_t i = 0; i < inst.pairs.size(); ++i) {
    if (!flags[i]) outside += std::abs(inst.pairs[i].y.norm() - inst.pairs[i].x.norm()) > kMatchSigmaFactor * 0.01;
  }
  EXPECT_GT(outside, 500u);
}

TEST(GenRrs, InlierNoiseWithinSixSigma) {
  const double sigma = 0.02;
  const auto inst = gen_rrs(3000, 3000, sigma, 16, false);
  for (const auto& p : inst.pairs) EXPECT_LE((p.y - inst.r_true * p.x).norm(), 6 * sigma);
}

TEST(GenSrcs, PlantedPairsDetermineRotation) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = gen_srcs(500, 400, 20, 0.0, seed);
    const auto r = kabsch(pairs_from_correspondences(inst.q, inst.p, inst.truth));
    EXPECT_LT(rotation_error_deg(r, inst.r_true), 1e-6);
  }
}

TEST(GenSrcs, FullOverlapIsExactRotation) {
  const auto inst = gen_srcs(50, 50, 50, 0.0, 17);
  for (const auto& c : inst.truth) EXPECT_LT((inst.q[c.i] - inst.r_true * inst.p[c.j]).norm(), 1e-12);
}
