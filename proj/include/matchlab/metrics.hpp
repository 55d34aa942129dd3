#ifndef MATCHLAB_METRICS_HPP
#define MATCHLAB_METRICS_HPP

// Fairness (multiplicative envy, coverage) and driver-efficiency statistics.

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "matchlab/common.hpp"
#include "matchlab/geo.hpp"
#include "matchlab/matching.hpp"

namespace matchlab {

inline constexpr std::string_view kMeanEnvyDefinition =
    "mean_menvy = (1/|F|) * sum_f (max_f' v_f') / v_f with v_f = w_f / N_f";

inline std::vector<double> normalized_loads(const AllocationState& state, const Catchment& catchment) {
  std::vector<double> v(state.bank_count());
  for (BankIndex b = 0; b < v.size(); ++b)
    v[b] = state.cum_value(b) / static_cast<double>(catchment.served_pop[b]);
  return v;
}

/// Smallest eps with eps * v_f >= max v for all f, i.e. max v / min v.
/// inf when some bank has nothing while another has something.
inline double max_mult_envy(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("max_mult_envy: no food banks");
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*hi <= 0.0) return 1.0;
  if (*lo <= 0.0) return kInf;
  return *hi / *lo;
}

inline double max_mult_envy(const AllocationState& state, const Catchment& catchment) {
  return max_mult_envy(normalized_loads(state, catchment));
}

inline double mean_mult_envy(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean_mult_envy: no food banks");
  const double hi = *std::max_element(v.begin(), v.end());
  if (hi <= 0.0) return 1.0;
  double acc = 0.0;
  for (double x : v) {
    if (x <= 0.0) return kInf;
    acc += hi / x;
  }
  return acc / static_cast<double>(v.size());
}

inline double mean_mult_envy(const AllocationState& state, const Catchment& catchment) {
  return mean_mult_envy(normalized_loads(state, catchment));
}

struct DriverStats {
  double max_reldist = 1.0;
  double mean_reldist = 1.0;
  std::size_t count = 0;
  std::size_t infinite = 0;  // optimal = 0 but travel > 0; excluded from mean
};

/// Streaming form of driver_stats.
class DriverStatsAccumulator {
 public:
  void add(double ratio) {
    if (std::isinf(ratio)) {
      ++infinite_;
      return;
    }
    ++count_;
    sum_ += ratio;
    max_ = std::max(max_, ratio);
  }
  void add(const MatchDecision& d) { add(d.ratio()); }

  DriverStats result() const {
    DriverStats s;
    s.count = count_;
    s.infinite = infinite_;
    if (count_ > 0) {
      s.max_reldist = max_;
      s.mean_reldist = sum_ / static_cast<double>(count_);
    }
    if (infinite_ > 0) s.max_reldist = kInf;
    return s;
  }

 private:
  std::size_t count_ = 0, infinite_ = 0;
  double sum_ = 0.0;
  double max_ = 1.0;
};

inline DriverStats driver_stats(std::span<const MatchDecision> decisions) {
  DriverStatsAccumulator acc;
  for (const auto& d : decisions) acc.add(d);
  return acc.result();
}

struct CountyRatio {
  std::int64_t node_id = 0;
  std::int64_t foodbank_id = 0;
  double per_capita = 0.0;
  double proportional_share = 0.0;
  double ratio = 0.0;
};

/// Per-county value per capita relative to the perfectly proportional share.
inline std::vector<CountyRatio> county_coverage(const AllocationState& state, const Catchment& catchment,
                                                const Region& region) {
  if (!(state.total_value() > 0.0)) throw std::invalid_argument("county_coverage: no value allocated");
  const double share = state.total_value() / static_cast<double>(catchment.total);
  std::vector<CountyRatio> out;
  out.reserve(region.size());
  for (NodeIndex v = 0; v < region.size(); ++v) {
    const BankIndex b = catchment.nearest[v];
    CountyRatio r;
    r.node_id = region.node(v).node_id;
    r.foodbank_id = region.bank_id(b);
    r.per_capita = state.cum_value(b) / static_cast<double>(catchment.served_pop[b]);
    r.proportional_share = share;
    r.ratio = r.per_capita / share;
    out.push_back(r);
  }
  return out;
}

/// Envy samples are taken every max(1, m/1000) steps and at t = m.
inline std::size_t envy_trace_stride(std::size_t m) { return std::max<std::size_t>(1, m / 1000); }

struct EnvySample {
  std::size_t t = 0;
  double max_menvy = 1.0;
};

struct RunMetrics {
  double max_menvy = 1.0;
  double mean_menvy = 1.0;
  double max_reldist = 1.0;
  double mean_reldist = 1.0;
  std::size_t infinite_ratio_count = 0;
  std::vector<EnvySample> envy_trace;
  std::vector<CountyRatio> county_ratios;
  std::vector<double> final_values;  // w_f(m)
  double total_value = 0.0;
  std::uint64_t stream_hash = 0;
};

/// Replays `stream` through one algorithm and collects every statistic.
/// `on_decision` sees each decision before the next donation arrives.
template <typename OnDecision>
RunMetrics replay(const AlgorithmSpec& spec, std::span<const Donation> stream, const Region& region,
                  const Catchment& catchment, OnDecision&& on_decision) {
  AllocationState state(region.bank_count());
  DriverStatsAccumulator drivers;
  RunMetrics rm;
  const std::size_t stride = envy_trace_stride(stream.size());
  Fnv1a h;
  for (const auto& donation : stream) {
    h.update_value(donation.origin);
    h.update_value(donation.destination);
    h.update_value(donation.value);
    MatchDecision d = match(spec, state, donation, region, catchment);
    drivers.add(d);
    on_decision(d, state);
    if (state.t() % stride == 0 || state.t() == stream.size())
      rm.envy_trace.push_back({state.t(), max_mult_envy(state, catchment)});
  }
  auto v = normalized_loads(state, catchment);
  rm.max_menvy = max_mult_envy(v);
  rm.mean_menvy = mean_mult_envy(v);
  auto ds = drivers.result();
  rm.max_reldist = ds.max_reldist;
  rm.mean_reldist = ds.mean_reldist;
  rm.infinite_ratio_count = ds.infinite;
  rm.county_ratios = county_coverage(state, catchment, region);
  rm.final_values.assign(state.values().begin(), state.values().end());
  rm.total_value = state.total_value();
  rm.stream_hash = h.digest();
  return rm;
}

inline RunMetrics replay(const AlgorithmSpec& spec, std::span<const Donation> stream, const Region& region,
                         const Catchment& catchment) {
  return replay(spec, stream, region, catchment, [](const MatchDecision&, const AllocationState&) {});
}

}  // namespace matchlab

#endif  // MATCHLAB_METRICS_HPP
