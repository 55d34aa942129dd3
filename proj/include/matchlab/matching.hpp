#ifndef MATCHLAB_MATCHING_HPP
#define MATCHLAB_MATCHING_HPP

// Online donation-to-food-bank matchers and the allocation state they share.
//
// Every matcher is deterministic: ties are broken by fixed rules and no
// matcher draws random numbers, so one donation stream replays identically
// under every algorithm.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "matchlab/common.hpp"
#include "matchlab/geo.hpp"
#include "matchlab/sampling.hpp"

namespace matchlab {

/// Cumulative value w_f(t) received by each food bank.
class AllocationState {
 public:
  explicit AllocationState(std::size_t banks) : cum_(banks, 0.0) {}

  std::size_t bank_count() const noexcept { return cum_.size(); }
  double cum_value(BankIndex b) const { return cum_[b]; }
  std::span<const double> values() const noexcept { return cum_; }
  std::size_t t() const noexcept { return t_; }
  double total_value() const noexcept { return total_; }

  void add(BankIndex b, double value) {
    if (!(value >= 0.0)) throw std::invalid_argument("AllocationState::add: negative value");
    cum_.at(b) += value;
    total_ += value;
    ++t_;
  }

 private:
  std::vector<double> cum_;
  std::size_t t_ = 0;
  double total_ = 0.0;
};

enum class LoadMode { normalized, raw };

struct MatchDecision {
  Donation donation;
  BankIndex chosen = 0;
  double travel = 0.0;   // d(x, chosen) + d(chosen, y)
  double optimal = 0.0;  // min over all banks
  bool all_candidates = false;
  std::vector<BankIndex> candidates;  // empty when all_candidates

  bool considered(BankIndex b) const {
    return all_candidates || std::find(candidates.begin(), candidates.end(), b) != candidates.end();
  }

  /// travel / optimal, 1 for a zero-length route, inf if only optimal is 0.
  double ratio() const noexcept {
    if (optimal > 0.0) return travel / optimal;
    return travel == 0.0 ? 1.0 : kInf;
  }
};

namespace detail {

inline double route(const Region& region, NodeIndex x, BankIndex b, NodeIndex y) {
  NodeIndex f = region.bank_node(b);
  return region.dist(x, f) + region.dist(f, y);
}

inline double optimal_route(const Region& region, NodeIndex x, NodeIndex y) {
  double best = kInf;
  for (BankIndex b = 0; b < region.bank_count(); ++b) best = std::min(best, route(region, x, b, y));
  return best;
}

inline double normalized_load(const AllocationState& s, const Catchment& c, BankIndex b) {
  return s.cum_value(b) / static_cast<double>(c.served_pop[b]);
}

}  // namespace detail

/// Two choices: the nearest banks to origin and destination; the one with
/// the smaller load wins, ties to the origin's bank.
inline MatchDecision match_two_choice(AllocationState& state, const Donation& donation,
                                      const Region& region, const Catchment& catchment,
                                      LoadMode mode = LoadMode::normalized) {
  const BankIndex fo = catchment.nearest[donation.origin];
  const BankIndex fd = catchment.nearest[donation.destination];
  auto load = [&](BankIndex b) {
    return mode == LoadMode::normalized ? detail::normalized_load(state, catchment, b)
                                        : state.cum_value(b);
  };
  MatchDecision d;
  d.donation = donation;
  d.chosen = load(fd) < load(fo) ? fd : fo;
  d.candidates = fo == fd ? std::vector<BankIndex>{fo} : std::vector<BankIndex>{fo, fd};
  d.travel = detail::route(region, donation.origin, d.chosen, donation.destination);
  d.optimal = detail::optimal_route(region, donation.origin, donation.destination);
  state.add(d.chosen, donation.value);
  return d;
}

/// Shortest route through any bank. Equal routes go to the smaller
/// normalized load, then the lowest id, so this coincides with the c = 0
/// member of the cutoff family.
inline MatchDecision match_driver_optimal(AllocationState& state, const Donation& donation,
                                          const Region& region, const Catchment& catchment) {
  MatchDecision d;
  d.donation = donation;
  d.all_candidates = true;
  d.optimal = kInf;
  double best_load = kInf;
  for (BankIndex b = 0; b < region.bank_count(); ++b) {
    double r = detail::route(region, donation.origin, b, donation.destination);
    double l = detail::normalized_load(state, catchment, b);
    if (r < d.optimal || (r == d.optimal && l < best_load)) {
      d.optimal = r;
      best_load = l;
      d.chosen = b;
    }
  }
  d.travel = d.optimal;
  state.add(d.chosen, donation.value);
  return d;
}

/// Smallest normalized load anywhere, ignoring location; ties to lowest id.
inline MatchDecision match_greedy(AllocationState& state, const Donation& donation,
                                  const Region& region, const Catchment& catchment) {
  MatchDecision d;
  d.donation = donation;
  d.all_candidates = true;
  double best_load = kInf;
  for (BankIndex b = 0; b < catchment.bank_count(); ++b) {
    double l = detail::normalized_load(state, catchment, b);
    if (l < best_load) {
      best_load = l;
      d.chosen = b;
    }
  }
  d.travel = detail::route(region, donation.origin, d.chosen, donation.destination);
  d.optimal = detail::optimal_route(region, donation.origin, donation.destination);
  state.add(d.chosen, donation.value);
  return d;
}

/// Greedy restricted to banks whose route is at most `cutoff_miles` longer
/// than the optimal route. c = 0 is driver-optimal; c = inf is greedy.
inline MatchDecision match_greedy_cutoff(AllocationState& state, const Donation& donation,
                                         const Region& region, const Catchment& catchment,
                                         double cutoff_miles) {
  if (!(cutoff_miles >= 0.0)) throw std::invalid_argument("cutoff must be >= 0");
  const std::size_t nb = region.bank_count();
  std::vector<double> routes(nb);
  MatchDecision d;
  d.donation = donation;
  d.optimal = kInf;
  for (BankIndex b = 0; b < nb; ++b) {
    routes[b] = detail::route(region, donation.origin, b, donation.destination);
    d.optimal = std::min(d.optimal, routes[b]);
  }
  double best_load = kInf;
  for (BankIndex b = 0; b < nb; ++b) {
    if (routes[b] - d.optimal > cutoff_miles) continue;
    d.candidates.push_back(b);
    double l = detail::normalized_load(state, catchment, b);
    if (l < best_load) {
      best_load = l;
      d.chosen = b;
    }
  }
  if (d.candidates.size() == nb) {
    d.all_candidates = true;
    d.candidates.clear();
  }
  d.travel = routes[d.chosen];
  state.add(d.chosen, donation.value);
  return d;
}

// ---------------------------------------------------------------------------
// Algorithm selection

enum class Algorithm { two_choice, driver_optimal, greedy, greedy_cutoff };

struct AlgorithmSpec {
  Algorithm kind = Algorithm::two_choice;
  LoadMode load_mode = LoadMode::normalized;  // two_choice only
  double cutoff_miles = 0.0;                  // greedy_cutoff only; inf = "max"

  /// Stable name used in CSV output.
  std::string label() const {
    switch (kind) {
      case Algorithm::two_choice:
        return load_mode == LoadMode::normalized ? "two_choice" : "two_choice_raw";
      case Algorithm::driver_optimal:
        return "driver_optimal";
      case Algorithm::greedy:
        return "greedy";
      case Algorithm::greedy_cutoff:
        return "greedy_cutoff_" + (std::isinf(cutoff_miles) ? std::string("max") : format_real(cutoff_miles));
    }
    return "unknown";
  }

  friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

inline MatchDecision match(const AlgorithmSpec& spec, AllocationState& state, const Donation& donation,
                           const Region& region, const Catchment& catchment) {
  switch (spec.kind) {
    case Algorithm::two_choice:
      return match_two_choice(state, donation, region, catchment, spec.load_mode);
    case Algorithm::driver_optimal:
      return match_driver_optimal(state, donation, region, catchment);
    case Algorithm::greedy:
      return match_greedy(state, donation, region, catchment);
    case Algorithm::greedy_cutoff:
      return match_greedy_cutoff(state, donation, region, catchment, spec.cutoff_miles);
  }
  throw std::logic_error("unknown algorithm");
}

}  // namespace matchlab

#endif  // MATCHLAB_MATCHING_HPP
