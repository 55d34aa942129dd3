#ifndef MATCHLAB_LOWERBOUND_HPP
#define MATCHLAB_LOWERBOUND_HPP

// Hard instance for the fairness/efficiency tradeoff.
//
//   A --(2 - delta/4)-- v1 --1-- B --1-- v2 .. vn
//
// Banks sit at A and v2..vn; A and B are unpopulated, every v_i holds one
// person. Any (3 - delta)-efficient matcher reaches A only on trips
// v1 -> v1, i.e. with probability 1/n^2, while fairness asks for 1/n.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "matchlab/geo.hpp"
#include "matchlab/matching.hpp"
#include "matchlab/metrics.hpp"
#include "matchlab/parallel.hpp"
#include "matchlab/rng.hpp"
#include "matchlab/sampling.hpp"

namespace matchlab {

struct CounterexampleSpec {
  std::size_t n = 50;   // populated nodes v1..vn
  double delta = 0.1;   // in (0, 4)
};

inline constexpr std::int64_t kCounterexampleA = 0;
inline constexpr std::int64_t kCounterexampleB = 1;
/// Node id of v_i (1-based i).
constexpr std::int64_t counterexample_v(std::size_t i) { return static_cast<std::int64_t>(i) + 1; }

inline RegionData build_counterexample_data(const CounterexampleSpec& spec) {
  if (spec.n < 2) throw ValidationError("counterexample needs n >= 2");
  if (!(spec.delta > 0.0 && spec.delta < 4.0)) throw ValidationError("counterexample needs delta in (0, 4)");
  RegionData data;
  data.nodes.push_back({kCounterexampleA, "A", 0, 0});
  data.nodes.push_back({kCounterexampleB, "B", 0, 0});
  for (std::size_t i = 1; i <= spec.n; ++i)
    data.nodes.push_back({counterexample_v(i), "v" + std::to_string(i), 1, 1});
  const std::size_t size = data.nodes.size();
  data.dist.assign(size * size, kInf);
  for (std::size_t i = 0; i < size; ++i) data.dist[i * size + i] = 0.0;
  auto edge = [&](std::size_t a, std::size_t b, double w) {
    data.dist[a * size + b] = data.dist[b * size + a] = w;
  };
  const std::size_t A = 0, B = 1, v1 = 2;
  edge(A, v1, 2.0 - spec.delta / 4.0);
  edge(v1, B, 1.0);
  for (std::size_t i = 2; i <= spec.n; ++i) edge(B, i + 1, 1.0);
  shortest_path_closure(data.dist, size);
  data.foodbanks.push_back(kCounterexampleA);
  for (std::size_t i = 2; i <= spec.n; ++i) data.foodbanks.push_back(counterexample_v(i));
  return data;
}

inline Region build_counterexample(const CounterexampleSpec& spec) {
  return Region::from(build_counterexample_data(spec));
}

struct TradeoffRun {
  std::size_t deliveries_to_A = 0;
  double max_menvy = 1.0;
  double max_reldist = 1.0;
  double mean_reldist = 1.0;
  /// Decisions where "routed via A" and "trip is v1 -> v1" disagree.
  std::size_t a_route_mismatches = 0;
  std::vector<EnvySample> envy_trace;
};

struct TradeoffReport {
  CounterexampleSpec spec;
  std::size_t m = 0;
  std::size_t runs = 0;
  std::uint64_t base_seed = 0;
  std::vector<TradeoffRun> driver_optimal;
  std::vector<TradeoffRun> two_choice;
};

/// Driver-optimal (a 1-efficient, hence (3-delta)-efficient, witness) and
/// two-choice on the hard instance with (1,1)-biased unit donations.
/// Both algorithms consume the same stream in each run.
inline TradeoffReport tradeoff_experiment(const CounterexampleSpec& spec, std::size_t m, std::size_t runs,
                                          std::uint64_t base_seed) {
  if (m < spec.n * spec.n) throw ValidationError("tradeoff experiment needs m >= n^2");
  if (runs < 1) throw ValidationError("tradeoff experiment needs runs >= 1");
  const Region region = build_counterexample(spec);
  const Catchment catchment = compute_catchments(region);
  const NodeDistribution dist = make_proportional_dist(region, PopField::fi_pop);
  const NodeIndex v1 = region.require_index(counterexample_v(1));
  const BankIndex bank_a = 0;  // lowest id

  TradeoffReport rep;
  rep.spec = spec;
  rep.m = m;
  rep.runs = runs;
  rep.base_seed = base_seed;
  rep.driver_optimal.resize(runs);
  rep.two_choice.resize(runs);
  parallel_for(runs, [&](std::size_t r) {
    auto stream = sample_stream(dist, WeightDistribution::unit(), m, run_seed(base_seed, r));
    auto one = [&](const AlgorithmSpec& algo) {
      TradeoffRun out;
      auto rm = replay(algo, stream, region, catchment, [&](const MatchDecision& d, const AllocationState&) {
        const bool via_a = d.chosen == bank_a;
        const bool v1_trip = d.donation.origin == v1 && d.donation.destination == v1;
        if (via_a) ++out.deliveries_to_A;
        if (via_a != v1_trip) ++out.a_route_mismatches;
      });
      out.max_menvy = rm.max_menvy;
      out.max_reldist = rm.max_reldist;
      out.mean_reldist = rm.mean_reldist;
      out.envy_trace = std::move(rm.envy_trace);
      return out;
    };
    rep.driver_optimal[r] = one({Algorithm::driver_optimal});
    rep.two_choice[r] = one({Algorithm::two_choice});
  });
  return rep;
}

}  // namespace matchlab

#endif  // MATCHLAB_LOWERBOUND_HPP
