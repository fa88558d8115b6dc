#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "arcs/random.hpp"
#include "arcs/stabbing.hpp"

using namespace arcs;

namespace {

std::vector<IntervalUnion> random_unions(Rng& rng, std::size_t owners, std::size_t max_pieces, bool grid) {
  std::vector<IntervalUnion> out;
  for (std::size_t o = 0; o < owners; ++o) {
    std::vector<Interval> pieces;
    const std::size_t k = rng.index(max_pieces + 1);
    for (std::size_t t = 0; t < k; ++t) {
      // Grid endpoints force touching and coincident intervals.
      double a = grid ? static_cast<double>(rng.index(20)) : rng.uniform(0.0, 10.0);
      double b = grid ? static_cast<double>(rng.index(20)) : rng.uniform(0.0, 10.0);
      if (a > b) std::swap(a, b);
      pieces.push_back({a, b});
    }
    out.emplace_back(o, pieces);
  }
  return out;
}

/// Best depth over every interval endpoint, leftmost on ties.
std::pair<std::size_t, double> brute_force(const std::vector<IntervalUnion>& items) {
  std::vector<double> pts;
  for (const auto& u : items) {
    for (const auto& p : u.pieces()) {
      pts.push_back(p.lo);
      pts.push_back(p.hi);
    }
  }
  std::sort(pts.begin(), pts.end());
  std::size_t best = 0;
  double at = 0.0;
  for (const double x : pts) {
    const std::size_t d = stab_count_at(items, x);
    if (d > best) {
      best = d;
      at = x;
    }
  }
  return {best, at};
}

}  // namespace

TEST(IntervalUnion, MergesOverlappingAndTouching) {
  const IntervalUnion u(3, {{2.0, 3.0}, {0.0, 1.0}, {1.0, 1.5}, {2.5, 4.0}});
  ASSERT_EQ(u.pieces().size(), 2u);
  EXPECT_DOUBLE_EQ(u.pieces()[0].hi, 1.5);
  EXPECT_DOUBLE_EQ(u.pieces()[1].lo, 2.0);
  EXPECT_DOUBLE_EQ(u.pieces()[1].hi, 4.0);
  EXPECT_EQ(u.owner(), 3u);
  EXPECT_TRUE(u.contains(4.0));
  EXPECT_FALSE(u.contains(1.7));
}

TEST(IntervalUnion, RejectsBadPieces) {
  EXPECT_THROW(IntervalUnion(0, {{1.0, 0.0}}), std::invalid_argument);
  EXPECT_THROW(IntervalUnion(0, {{0.0, std::numeric_limits<double>::infinity()}}), std::invalid_argument);
}

TEST(StabMax, EmptyInput) {
  const auto r = stab_max(std::vector<IntervalUnion>{});
  EXPECT_TRUE(r.stabbed.empty());
  EXPECT_EQ(r.omega, 0.0);
  const auto r2 = stab_max(std::vector<IntervalUnion>{IntervalUnion(0, {}), IntervalUnion(1, {})});
  EXPECT_TRUE(r2.stabbed.empty());
}

TEST(StabMax, TouchingClosedIntervalsOverlap) {
  const std::vector<IntervalUnion> items{IntervalUnion(0, {{0.0, 1.0}}), IntervalUnion(1, {{1.0, 2.0}})};
  const auto r = stab_max(items);
  EXPECT_EQ(r.omega, 1.0);
  EXPECT_EQ(r.stabbed, (std::vector<std::size_t>{0, 1}));
}

TEST(StabMax, LeftmostOnTies) {
  const std::vector<IntervalUnion> items{IntervalUnion(0, {{5.0, 6.0}}), IntervalUnion(1, {{1.0, 2.0}})};
  EXPECT_EQ(stab_max(items).omega, 1.0);
}

TEST(StabMax, PointIntervals) {
  const std::vector<IntervalUnion> items{IntervalUnion(0, {{3.0, 3.0}}), IntervalUnion(1, {{3.0, 3.0}}),
                                         IntervalUnion(2, {{0.0, 2.0}})};
  const auto r = stab_max(items);
  EXPECT_EQ(r.omega, 3.0);
  EXPECT_EQ(r.stabbed.size(), 2u);
}

TEST(StabMax, MatchesEndpointEnumeration) {
  Rng rng(21);
  for (int t = 0; t < 1000; ++t) {
    const auto items = random_unions(rng, 1 + rng.index(40), 3, t % 2 == 0);
    const auto [best, at] = brute_force(items);
    const auto r = stab_max(items);
    ASSERT_EQ(r.stabbed.size(), best) << "trial " << t;
    EXPECT_EQ(stab_count_at(items, r.omega), best);
    EXPECT_EQ(r.omega, best > 0 ? at : 0.0);
    for (const std::size_t o : r.stabbed) EXPECT_TRUE(items[o].contains(r.omega));
  }
}

namespace {

IntervalList random_list(Rng& rng, std::size_t n, int mode) {
  IntervalList list;
  for (std::size_t k = 0; k < n; ++k) {
    double a, b;
    if (mode == 0) {
      a = rng.uniform(0.0, 3.14);
      b = a + 0.05 * rng.uniform();
    } else if (mode == 1) {
      // Few distinct coordinates: heavy ties.
      a = static_cast<double>(rng.index(50));
      b = a + static_cast<double>(rng.index(3));
    } else {
      // A dense cluster inside a wide range.
      a = rng.uniform() < 0.1 ? rng.uniform(1.0, 1.001) : rng.uniform(-100.0, 100.0);
      b = a + 1e-4 * rng.uniform();
    }
    list.add(k, a, b);
  }
  return list;
}

}  // namespace

TEST(StabMax, BucketedEqualsSortedReference) {
  Rng rng(22);
  StabWorkspace ws;
  for (int t = 0; t < 30; ++t) {
    const auto list = random_list(rng, 4096 + rng.index(40000), t % 3);
    const double ref = detail::stab_point_sorted(list, ws);
    const double got = detail::stab_point_bucketed(list, ws);
    EXPECT_EQ(got, ref) << "trial " << t;
  }
}

TEST(StabMax, LargeInputUsesSameAnswer) {
  Rng rng(23);
  const auto list = random_list(rng, 20000, 0);
  StabWorkspace ws;
  const auto r = stab_max(list, ws);
  std::size_t depth = 0;
  for (std::size_t k = 0; k < list.size(); ++k) depth += list.lo[k] <= r.omega && r.omega <= list.hi[k];
  EXPECT_EQ(r.stabbed.size(), depth);
  EXPECT_EQ(r.omega, detail::stab_point_sorted(list, ws));
}

TEST(StabMax, WithoutOwnersKeepsPoint) {
  Rng rng(24);
  const auto list = random_list(rng, 500, 1);
  StabWorkspace ws;
  const auto a = stab_max(list, ws, true);
  const auto b = stab_max(list, ws, false);
  EXPECT_EQ(a.omega, b.omega);
  EXPECT_TRUE(b.stabbed.empty());
}
