#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "matchlab/geo.hpp"
#include "matchlab/lowerbound.hpp"
#include "matchlab/rng.hpp"
#include "matchlab/synthetic.hpp"

using namespace matchlab;

TEST(ValidateRegion, LineMetricPasses) {
  auto rep = validate_region(fixtures::line_region({0, 10, 20}, {1, 1, 1}, {1}));
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.triangle_count, 0u);
}

TEST(ValidateRegion, ReportsTheViolatedTriple) {
  RegionData d;
  d.nodes = {{1, "a", 1, 1}, {2, "b", 1, 1}, {3, "c", 1, 1}};
  d.foodbanks = {1};
  d.dist = {0, 1, 5, 1, 0, 1, 5, 1, 0};
  auto rep = validate_region(d);
  ASSERT_FALSE(rep.ok());
  ASSERT_EQ(rep.triangle_count, 1u);
  EXPECT_EQ(rep.triangles[0].u, 1);
  EXPECT_EQ(rep.triangles[0].v, 2);
  EXPECT_EQ(rep.triangles[0].w, 3);
  EXPECT_DOUBLE_EQ(rep.triangles[0].excess, 3.0);
  EXPECT_THROW(Region::from(d), ValidationError);
}

TEST(ValidateRegion, HardInstancePasses) {
  for (std::size_t n : {2, 5, 50})
    EXPECT_TRUE(validate_region(build_counterexample_data({n, 0.1})).ok());
}

TEST(ValidateRegion, RejectsAsymmetricNegativeAndEmptyBanks) {
  auto base = fixtures::uvz();
  auto asym = base;
  asym.dist[1] = 11;
  EXPECT_FALSE(validate_region(asym).ok());
  auto neg = base;
  neg.dist[1] = neg.dist[3] = -1;
  EXPECT_FALSE(validate_region(neg).ok());
  auto nobank = base;
  nobank.foodbanks.clear();
  EXPECT_FALSE(validate_region(nobank).ok());
  auto stray = base;
  stray.foodbanks.push_back(99);
  EXPECT_FALSE(validate_region(stray).ok());
  auto diag = base;
  diag.dist[0] = 1;
  EXPECT_FALSE(validate_region(diag).ok());
  auto nofi = base;
  for (auto& c : nofi.nodes) c.fi_pop = 0;
  EXPECT_FALSE(validate_region(nofi).ok());
}

TEST(ValidateRegion, ToleratesRoundingNoise) {
  auto d = fixtures::uvz();
  d.dist[2] = d.dist[6] = 20.0 * (1 + 1e-12);
  EXPECT_TRUE(validate_region(d).ok());
  d.dist[2] = d.dist[6] = 20.0 * (1 + 1e-6);
  EXPECT_FALSE(validate_region(d).ok());
}

TEST(ValidateRegion, RepairReplacesWithShortestPaths) {
  RegionData d;
  d.nodes = {{1, "a", 1, 1}, {2, "b", 1, 1}, {3, "c", 1, 1}};
  d.foodbanks = {1};
  d.dist = {0, 1, 5, 1, 0, 1, 5, 1.5, 0};
  Region r = Region::from(d, true);
  EXPECT_TRUE(r.repair().applied);
  EXPECT_TRUE(r.repair().symmetrized);
  EXPECT_DOUBLE_EQ(r.dist(0, 2), 2.0);
  EXPECT_DOUBLE_EQ(r.dist(2, 1), 1.0);
  EXPECT_EQ(r.repair().cells_changed, 3u);
  EXPECT_DOUBLE_EQ(r.repair().max_reduction, 3.0);
  EXPECT_TRUE(validate_region(r.data()).ok());
}

TEST(Catchments, SingleBankServesEveryone) {
  Region r = Region::from(fixtures::line_region({0, 3, 9, 12}, {4, 5, 6, 7}, {3}));
  auto c = compute_catchments(r);
  ASSERT_EQ(c.bank_count(), 1u);
  EXPECT_EQ(c.served_pop[0], 22);
  EXPECT_EQ(c.total, 22);
  for (NodeIndex v = 0; v < r.size(); ++v) EXPECT_EQ(c.nearest[v], 0u);
}

TEST(Catchments, HardInstance) {
  const CounterexampleSpec spec{50, 0.1};
  Region r = build_counterexample(spec);
  auto c = compute_catchments(r);
  auto bank_of = [&](std::int64_t id) { return r.bank_id(c.nearest[r.require_index(id)]); };
  EXPECT_EQ(bank_of(counterexample_v(1)), kCounterexampleA);
  EXPECT_EQ(bank_of(kCounterexampleB), counterexample_v(2));
  for (BankIndex b = 0; b < c.bank_count(); ++b) EXPECT_EQ(c.served_pop[b], 1);
  EXPECT_EQ(c.total, 50);
}

TEST(Catchments, TieGoesToLowestId) {
  Region r = Region::from(fixtures::uvz());
  auto c = compute_catchments(r);
  EXPECT_EQ(r.bank_id(c.nearest[r.require_index(fixtures::V)]), fixtures::U);
  EXPECT_EQ(c.served_pop[0], 2);
  EXPECT_EQ(c.served_pop[1], 2);
}

TEST(Catchments, PartitionAndNearestOnRandomRegions) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    SyntheticSpec s;
    s.nodes = 40;
    s.foodbanks = 1 + seed % 7;
    s.seed = seed;
    Region r = Region::from(euclidean_region(s));
    Catchment c;
    try {
      c = compute_catchments(r);
    } catch (const ValidationError&) {
      continue;  // a bank can lose its own node only on exact ties; never here
    }
    std::int64_t sum = 0;
    for (auto x : c.served_pop) sum += x;
    EXPECT_EQ(sum, r.total_fi());
    std::size_t members = 0;
    for (const auto& set : c.served_set) members += set.size();
    EXPECT_EQ(members, r.size());
    for (NodeIndex v = 0; v < r.size(); ++v) {
      double best = kInf;
      for (BankIndex b = 0; b < r.bank_count(); ++b) best = std::min(best, r.dist(v, r.bank_node(b)));
      EXPECT_EQ(r.dist(v, r.bank_node(c.nearest[v])), best);
    }
    auto again = compute_catchments(r);
    EXPECT_EQ(again.nearest, c.nearest);
    EXPECT_EQ(again.served_pop, c.served_pop);
  }
}

TEST(Catchments, BankWithNoPopulationIsRejected) {
  auto d = fixtures::line_region({0, 10}, {5, 0}, {1, 2});
  Region r = Region::from(d);
  EXPECT_THROW(compute_catchments(r), ValidationError);
}

TEST(AlphaBeta, ProportionalIsUnbiased) {
  Region r = Region::from(fixtures::two_banks(30, 70, 300, 700));
  auto bb = estimate_alpha_beta(r, compute_catchments(r));
  EXPECT_DOUBLE_EQ(bb.bias.alpha, 1.0);
  EXPECT_DOUBLE_EQ(bb.bias.beta, 1.0);
}

TEST(AlphaBeta, TwoBanks) {
  Region r = Region::from(fixtures::two_banks(60, 40, 50, 50));
  auto bb = estimate_alpha_beta(r, compute_catchments(r));
  EXPECT_NEAR(bb.bias.alpha, 1.25, 1e-12);
  EXPECT_NEAR(bb.bias.beta, 1.2, 1e-12);
}

TEST(AlphaBeta, ZeroPopulationShareIsUnbounded) {
  Region r = Region::from(fixtures::two_banks(60, 40, 0, 50));
  EXPECT_THROW(estimate_alpha_beta(r, compute_catchments(r)), ValidationError);
}

TEST(AlphaBeta, BoundsAreTightOnRandomRegions) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SyntheticSpec s;
    s.nodes = 30;
    s.foodbanks = 4;
    s.seed = seed * 7919;
    Region r = Region::from(euclidean_region(s));
    auto bb = estimate_alpha_beta(r, compute_catchments(r));
    const double a = bb.bias.alpha, b = bb.bias.beta;
    bool hit_a = a == 1.0, hit_b = b == 1.0;
    for (std::size_t f = 0; f < bb.q.size(); ++f) {
      EXPECT_LE(bb.r[f] / a, bb.q[f] * (1 + 1e-12));
      EXPECT_LE(bb.q[f], b * bb.r[f] * (1 + 1e-12));
      hit_a = hit_a || std::abs(bb.r[f] / a - bb.q[f]) <= 1e-12;
      hit_b = hit_b || std::abs(bb.q[f] - b * bb.r[f]) <= 1e-12;
    }
    EXPECT_TRUE(hit_a);
    EXPECT_TRUE(hit_b);
  }
}

TEST(FAlphaBeta, ReferenceValues) {
  // 40-digit evaluations.
  EXPECT_NEAR(f_alpha_beta(1.25, 1.2), 1.4739311883324123, 1e-12);
  EXPECT_NEAR(f_alpha_beta(1.12, 1.26), 1.6246931176042867, 1e-12);
  EXPECT_NEAR(f_alpha_beta(1.12, 1.26), 1.62, 0.005);
  EXPECT_TRUE(std::isinf(f_alpha_beta(1.0, 1.0)));
}

TEST(FAlphaBeta, EdgeLimitsAreContinuous) {
  // alpha -> 1: 2 - f = 2 ln(beta) / ln((ab-1)/(a-1)), so the approach is only logarithmic.
  const double beta = 1.3;
  double prev_gap = kInf;
  for (double h : {1e-3, 1e-6, 1e-9, 1e-12}) {
    const double f = f_alpha_beta(1.0 + h, beta);
    const double gap = f_alpha_beta(1.0, beta) - f;
    const double a = 1.0 + h;
    EXPECT_NEAR(gap, 2.0 * std::log(beta) / std::log((a * beta - 1.0) / (a - 1.0)), 1e-9) << h;
    EXPECT_GT(gap, 0.0);
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  // beta -> 1 is linear in h.
  EXPECT_NEAR(f_alpha_beta(1.3, 1.0 + 1e-9), f_alpha_beta(1.3, 1.0), 1e-6);
}

TEST(FAlphaBeta, RejectsArgumentsBelowOne) {
  EXPECT_THROW(f_alpha_beta(0.99, 1.2), std::invalid_argument);
  EXPECT_THROW(f_alpha_beta(1.2, 0.5), std::invalid_argument);
}

TEST(FAlphaBeta, NonincreasingInAlpha) {
  for (double beta = 1.01; beta <= 2.0 + 1e-12; beta += 0.01) {
    double prev = kInf;
    for (double alpha = 1.01; alpha <= 2.0 + 1e-12; alpha += 0.01) {
      const double f = f_alpha_beta(alpha, beta);
      EXPECT_LE(f, prev + 1e-12) << alpha << "," << beta;
      prev = f;
    }
  }
}

TEST(RegionCsv, RoundTrip) {
  auto dir = fixtures::temp_dir("geo_roundtrip");
  SyntheticSpec s;
  s.nodes = 12;
  s.foodbanks = 3;
  auto data = euclidean_region(s);
  write_region_csv(data, dir / "c.csv", dir / "f.csv", dir / "d.csv");
  auto back = load_region_csv(dir / "c.csv", dir / "f.csv", dir / "d.csv");
  ASSERT_EQ(back.nodes.size(), data.nodes.size());
  for (std::size_t i = 0; i < data.nodes.size(); ++i) {
    EXPECT_EQ(back.nodes[i].node_id, data.nodes[i].node_id);
    EXPECT_EQ(back.nodes[i].fi_pop, data.nodes[i].fi_pop);
    EXPECT_EQ(back.nodes[i].total_pop, data.nodes[i].total_pop);
  }
  EXPECT_EQ(back.foodbanks, data.foodbanks);
  EXPECT_EQ(back.dist, data.dist);  // shortest round-trip formatting is exact
}

TEST(RegionCsv, ColumnOrderIsByHeader) {
  auto dir = fixtures::temp_dir("geo_order");
  std::ofstream(dir / "c.csv") << "node_id,name,fi_pop,total_pop\n1,a,1,2\n2,b,3,4\n";
  std::ofstream(dir / "f.csv") << "node_id\n2\n";
  std::ofstream(dir / "d.csv") << "node_id,2,1\r\n2,0,7.5\r\n1,7.5,0\r\n";
  auto d = load_region_csv(dir / "c.csv", dir / "f.csv", dir / "d.csv");
  EXPECT_EQ(d.dist, (std::vector<double>{0, 7.5, 7.5, 0}));
  EXPECT_TRUE(validate_region(d).ok());
}

TEST(RegionCsv, RejectsWrongHeaderAndMissingRows) {
  auto dir = fixtures::temp_dir("geo_bad");
  std::ofstream(dir / "c.csv") << "id,name,fi_pop,total_pop\n1,a,1,2\n";
  std::ofstream(dir / "f.csv") << "node_id\n1\n";
  std::ofstream(dir / "d.csv") << "node_id,1\n1,0\n";
  EXPECT_THROW(load_region_csv(dir / "c.csv", dir / "f.csv", dir / "d.csv"), ValidationError);
  std::ofstream(dir / "c.csv") << "node_id,name,fi_pop,total_pop\n1,a,1,2\n2,b,1,2\n";
  std::ofstream(dir / "d.csv") << "node_id,1,2\n1,0,1\n";
  EXPECT_THROW(load_region_csv(dir / "c.csv", dir / "f.csv", dir / "d.csv"), ValidationError);
  std::ofstream(dir / "d.csv") << "node_id,1,2\n1,0,x\n2,1,0\n";
  EXPECT_THROW(load_region_csv(dir / "c.csv", dir / "f.csv", dir / "d.csv"), ValidationError);
}
