#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "fixtures.hpp"
#include "matchlab/lowerbound.hpp"
#include "matchlab/matching.hpp"
#include "matchlab/metrics.hpp"
#include "matchlab/synthetic.hpp"

using namespace matchlab;

namespace {

Donation trip(const Region& r, std::int64_t from, std::int64_t to, double w = 1.0) {
  return {r.require_index(from), r.require_index(to), w};
}

std::vector<BankIndex> choices(const AlgorithmSpec& spec, const std::vector<Donation>& stream, const Region& r,
                               const Catchment& c) {
  std::vector<BankIndex> out;
  replay(spec, stream, r, c, [&](const MatchDecision& d, const AllocationState&) { out.push_back(d.chosen); });
  return out;
}

Region random_region(std::uint64_t seed, std::size_t nodes = 50, std::size_t banks = 5) {
  SyntheticSpec s;
  s.nodes = nodes;
  s.foodbanks = banks;
  s.seed = seed;
  return Region::from(euclidean_region(s));
}

}  // namespace

TEST(TwoChoice, SameNearestBankWinsRegardlessOfLoad) {
  Region r = Region::from(fixtures::uvz());
  auto c = compute_catchments(r);
  AllocationState s(2);
  s.add(0, 100.0);
  auto d = match_two_choice(s, trip(r, fixtures::U, fixtures::V), r, c);
  EXPECT_EQ(d.chosen, 0u);
  EXPECT_EQ(d.candidates.size(), 1u);
}

TEST(TwoChoice, HandTraceOnLine) {
  Region r = Region::from(fixtures::uvz());
  auto c = compute_catchments(r);
  AllocationState s(2);
  std::vector<std::int64_t> got;
  for (auto [x, y] : {std::pair{fixtures::U, fixtures::Z}, {fixtures::V, fixtures::V}, {fixtures::Z, fixtures::U}})
    got.push_back(r.bank_id(match_two_choice(s, trip(r, x, y), r, c).chosen));
  EXPECT_EQ(got, (std::vector<std::int64_t>{fixtures::U, fixtures::U, fixtures::Z}));
  EXPECT_DOUBLE_EQ(s.cum_value(0), 2.0);
  EXPECT_DOUBLE_EQ(s.cum_value(1), 1.0);
  EXPECT_EQ(s.t(), 3u);
  EXPECT_DOUBLE_EQ(s.total_value(), 3.0);
}

TEST(TwoChoice, RawModeComparesUnnormalizedTotals) {
  // N = (1, 3): bank 0 has w=2 (v=2), bank 1 has w=3 (v=1).
  Region r = Region::from(fixtures::line_region({0, 100}, {1, 3}, {1, 2}));
  auto c = compute_catchments(r);
  AllocationState s(2);
  s.add(0, 2.0);
  s.add(1, 3.0);
  AllocationState s2 = s;
  EXPECT_EQ(match_two_choice(s, trip(r, 1, 2), r, c, LoadMode::normalized).chosen, 1u);
  EXPECT_EQ(match_two_choice(s2, trip(r, 1, 2), r, c, LoadMode::raw).chosen, 0u);
}

TEST(TwoChoice, SingleBankRatioIsOne) {
  Region r = random_region(3, 20, 1);
  auto c = compute_catchments(r);
  auto stream = sample_stream(make_proportional_dist(r, PopField::fi_pop), WeightDistribution::unit(), 2000, 5);
  auto rm = replay({Algorithm::two_choice}, stream, r, c);
  EXPECT_DOUBLE_EQ(rm.max_reldist, 1.0);
  EXPECT_DOUBLE_EQ(rm.mean_reldist, 1.0);
}

TEST(TwoChoice, ThreeDriverEfficientOnRandomMetrics) {
  std::size_t decisions = 0, violations = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Region r = random_region(seed * 31);
    auto c = compute_catchments(r);
    auto stream =
        sample_stream(make_proportional_dist(r, PopField::total_pop), WeightDistribution::exponential(3.0), 10000, seed);
    for (auto mode : {LoadMode::normalized, LoadMode::raw}) {
      AllocationState s(r.bank_count());
      for (const auto& don : stream) {
        auto d = match_two_choice(s, don, r, c, mode);
        ++decisions;
        ASSERT_GE(d.travel, d.optimal);
        if (d.travel > 3.0 * d.optimal + 1e-9) ++violations;
        ASSERT_TRUE(d.considered(d.chosen));
      }
    }
  }
  EXPECT_EQ(decisions, 200000u);
  EXPECT_EQ(violations, 0u);
}

TEST(DriverOptimal, LineTieGoesToLowestId) {
  Region r = Region::from(fixtures::uvz());
  auto c = compute_catchments(r);
  AllocationState s(2);
  auto d = match_driver_optimal(s, trip(r, fixtures::U, fixtures::Z), r, c);
  EXPECT_EQ(r.bank_id(d.chosen), fixtures::U);
  EXPECT_DOUBLE_EQ(d.travel, 20.0);
  EXPECT_DOUBLE_EQ(d.optimal, 20.0);
}

TEST(DriverOptimal, HardInstanceSelfTripAtV1GoesToA) {
  Region r = build_counterexample({50, 0.1});
  auto c = compute_catchments(r);
  AllocationState s(r.bank_count());
  auto d = match_driver_optimal(s, trip(r, counterexample_v(1), counterexample_v(1)), r, c);
  EXPECT_EQ(r.bank_id(d.chosen), kCounterexampleA);
  EXPECT_DOUBLE_EQ(d.travel, 2 * (2 - 0.1 / 4));
}

TEST(DriverOptimal, TravelIsAlwaysOptimal) {
  Region r = random_region(77);
  auto c = compute_catchments(r);
  auto stream = sample_stream(make_proportional_dist(r, PopField::fi_pop), WeightDistribution::unit(), 20000, 1);
  AllocationState s(r.bank_count());
  for (const auto& don : stream) {
    auto d = match_driver_optimal(s, don, r, c);
    ASSERT_EQ(d.travel, d.optimal);
    ASSERT_EQ(d.travel, detail::optimal_route(r, don.origin, don.destination));
  }
}

TEST(DriverOptimal, SingleBankRatioIsOne) {
  Region r = random_region(4, 15, 1);
  auto c = compute_catchments(r);
  auto stream = sample_stream(make_proportional_dist(r, PopField::fi_pop), WeightDistribution::unit(), 500, 2);
  EXPECT_DOUBLE_EQ(replay({Algorithm::driver_optimal}, stream, r, c).max_reldist, 1.0);
}

TEST(Greedy, FreshStatePicksLowestId) {
  Region r = Region::from(fixtures::uvz());
  auto c = compute_catchments(r);
  AllocationState s(2);
  EXPECT_EQ(r.bank_id(match_greedy(s, trip(r, fixtures::Z, fixtures::Z), r, c).chosen), fixtures::U);
}

TEST(Greedy, PicksSmallestNormalizedLoad) {
  Region r = Region::from(fixtures::uvz());
  auto c = compute_catchments(r);
  AllocationState s(2);
  s.add(0, 2.0);  // v_u = 1.0
  s.add(1, 1.0);  // v_z = 0.5
  EXPECT_EQ(r.bank_id(match_greedy(s, trip(r, fixtures::U, fixtures::U), r, c).chosen), fixtures::Z);
}

TEST(Greedy, RoundRobinWithEqualWeights) {
  // Five equal banks, one county each.
  Region r = Region::from(fixtures::line_region({0, 10, 20, 30, 40}, {3, 3, 3, 3, 3}, {1, 2, 3, 4, 5}));
  auto c = compute_catchments(r);
  auto stream = sample_stream(make_proportional_dist(r, PopField::fi_pop), WeightDistribution::unit(), 1003, 8);
  AllocationState s(5);
  for (std::size_t t = 0; t < stream.size(); ++t) {
    match_greedy(s, stream[t], r, c);
    auto [lo, hi] = std::minmax_element(s.values().begin(), s.values().end());
    ASSERT_LE(*hi - *lo, 1.0);
  }
}

TEST(GreedyCutoff, LineExample) {
  Region r = Region::from(fixtures::uvz());
  auto c = compute_catchments(r);
  AllocationState s(2);
  s.add(0, 2.0);  // v = (1, 0)
  auto d = match_greedy_cutoff(s, trip(r, fixtures::U, fixtures::Z), r, c, 5.0);
  EXPECT_TRUE(d.all_candidates);
  EXPECT_EQ(r.bank_id(d.chosen), fixtures::Z);
}

TEST(GreedyCutoff, RejectsNegativeCutoff) {
  Region r = Region::from(fixtures::uvz());
  auto c = compute_catchments(r);
  AllocationState s(2);
  EXPECT_THROW(match_greedy_cutoff(s, trip(r, 1, 3), r, c, -1.0), std::invalid_argument);
}

TEST(GreedyCutoff, EndpointsMatchDriverOptimalAndGreedy) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Region r = random_region(seed * 101, 40, 2 + seed % 5);
    auto c = compute_catchments(r);
    auto stream =
        sample_stream(make_proportional_dist(r, PopField::total_pop), WeightDistribution::exponential(348), 5000, seed);
    EXPECT_EQ(choices({Algorithm::greedy_cutoff, LoadMode::normalized, 0.0}, stream, r, c),
              choices({Algorithm::driver_optimal}, stream, r, c));
    const auto greedy = choices({Algorithm::greedy}, stream, r, c);
    EXPECT_EQ(choices({Algorithm::greedy_cutoff, LoadMode::normalized, 2 * r.diameter()}, stream, r, c), greedy);
    EXPECT_EQ(choices({Algorithm::greedy_cutoff, LoadMode::normalized, kInf}, stream, r, c), greedy);
  }
}

TEST(GreedyCutoff, ZeroCutoffOnHardInstanceWithTies) {
  // Many equal routes here; the shared tie rule has to agree.
  Region r = build_counterexample({20, 0.1});
  auto c = compute_catchments(r);
  auto stream = sample_stream(make_proportional_dist(r, PopField::fi_pop), WeightDistribution::unit(), 5000, 3);
  EXPECT_EQ(choices({Algorithm::greedy_cutoff, LoadMode::normalized, 0.0}, stream, r, c),
            choices({Algorithm::driver_optimal}, stream, r, c));
}

TEST(Matching, ConservationForEveryAlgorithm) {
  Region r = random_region(9);
  auto c = compute_catchments(r);
  auto stream =
      sample_stream(make_proportional_dist(r, PopField::total_pop), WeightDistribution::exponential(348), 20000, 4);
  double total = 0.0;
  for (const auto& d : stream) total += d.value;
  for (AlgorithmSpec spec : {AlgorithmSpec{Algorithm::two_choice}, AlgorithmSpec{Algorithm::two_choice, LoadMode::raw},
                             AlgorithmSpec{Algorithm::driver_optimal}, AlgorithmSpec{Algorithm::greedy},
                             AlgorithmSpec{Algorithm::greedy_cutoff, LoadMode::normalized, 30.0}}) {
    AllocationState s(r.bank_count());
    std::vector<double> prev(r.bank_count(), 0.0);
    for (const auto& d : stream) {
      match(spec, s, d, r, c);
      for (BankIndex b = 0; b < r.bank_count(); ++b) {
        ASSERT_GE(s.cum_value(b), prev[b]);
        prev[b] = s.cum_value(b);
      }
    }
    double sum = 0.0;
    for (double w : s.values()) sum += w;
    EXPECT_NEAR(sum, total, 1e-9 * total) << spec.label();
    EXPECT_NEAR(s.total_value(), total, 1e-9 * total) << spec.label();
  }
}

TEST(Matching, ScalingValuesLeavesChoicesUnchanged) {
  Region r = random_region(12);
  auto c = compute_catchments(r);
  auto base =
      sample_stream(make_proportional_dist(r, PopField::total_pop), WeightDistribution::exponential(1.0), 20000, 6);
  // Powers of two scale exactly, so the comparison is pointwise.
  for (double scale : {0.25, 1024.0}) {
    auto scaled = base;
    for (auto& d : scaled) d.value *= scale;
    for (AlgorithmSpec spec : {AlgorithmSpec{Algorithm::two_choice}, AlgorithmSpec{Algorithm::greedy},
                               AlgorithmSpec{Algorithm::greedy_cutoff, LoadMode::normalized, 25.0}})
      EXPECT_EQ(choices(spec, base, r, c), choices(spec, scaled, r, c)) << spec.label() << " x" << scale;
  }
}

TEST(AlgorithmSpec, Labels) {
  EXPECT_EQ((AlgorithmSpec{Algorithm::two_choice}).label(), "two_choice");
  EXPECT_EQ((AlgorithmSpec{Algorithm::two_choice, LoadMode::raw}).label(), "two_choice_raw");
  EXPECT_EQ((AlgorithmSpec{Algorithm::greedy_cutoff, LoadMode::normalized, 60.0}).label(), "greedy_cutoff_60");
  EXPECT_EQ((AlgorithmSpec{Algorithm::greedy_cutoff, LoadMode::normalized, 12.5}).label(), "greedy_cutoff_12.5");
  EXPECT_EQ((AlgorithmSpec{Algorithm::greedy_cutoff, LoadMode::normalized, kInf}).label(), "greedy_cutoff_max");
}
