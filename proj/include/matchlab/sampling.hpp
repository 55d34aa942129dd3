#ifndef MATCHLAB_SAMPLING_HPP
#define MATCHLAB_SAMPLING_HPP

// Donation streams: node distributions, weight distributions, seeded draws.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "matchlab/common.hpp"
#include "matchlab/geo.hpp"
#include "matchlab/rng.hpp"

namespace matchlab {

/// Inverse-CDF sampler over indices [0, n). One uniform per draw; entries
/// with zero probability are never returned.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> probs) {
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("DiscreteSampler: bad probability");
      total += p;
    }
    if (!(total > 0.0)) throw std::invalid_argument("DiscreteSampler: zero total probability");
    cdf_.resize(probs.size());
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      cdf_[i] = acc / total;
      if (probs[i] > 0.0) last_positive = i;
    }
    for (std::size_t i = last_positive; i < cdf_.size(); ++i) cdf_[i] = 1.0;
  }

  std::size_t size() const noexcept { return cdf_.size(); }

  std::size_t operator()(double u) const noexcept {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::size_t>(it - cdf_.begin());
  }
  std::size_t operator()(Xoshiro256ss& rng) const noexcept { return (*this)(rng.uniform()); }

 private:
  std::vector<double> cdf_;
};

enum class PopField { fi_pop, total_pop };

inline std::string to_string(PopField f) { return f == PopField::fi_pop ? "fi_pop" : "total_pop"; }

inline std::vector<double> population_weights(const Region& region, PopField field) {
  std::vector<double> w;
  w.reserve(region.size());
  for (const auto& c : region.nodes())
    w.push_back(static_cast<double>(field == PopField::fi_pop ? c.fi_pop : c.total_pop));
  return w;
}

/// Origin/destination distribution over region nodes. `bias` is measured
/// against food-insecure population weights.
class NodeDistribution {
 public:
  NodeDistribution(std::vector<double> probs, std::span<const double> reference_weights)
      : probs_(normalize(std::move(probs))), sampler_(probs_), bias_(bias_of(probs_, reference_weights)) {}

  const std::vector<double>& probs() const noexcept { return probs_; }
  const Bias& bias_report() const noexcept { return bias_; }
  NodeIndex sample(Xoshiro256ss& rng) const noexcept { return static_cast<NodeIndex>(sampler_(rng)); }

 private:
  static std::vector<double> normalize(std::vector<double> p) {
    double total = 0.0;
    for (double x : p) total += x;
    if (!(total > 0.0)) throw ValidationError("node distribution has zero total weight");
    for (double& x : p) x /= total;
    return p;
  }

  std::vector<double> probs_;
  DiscreteSampler sampler_;
  Bias bias_;
};

inline NodeDistribution make_proportional_dist(const Region& region, PopField field) {
  auto w = population_weights(region, field);
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) throw ValidationError("sampling field " + to_string(field) + " is all zero");
  return NodeDistribution(std::move(w), population_weights(region, PopField::fi_pop));
}

/// Weights raised to 1 + tilt (0^x = 0). Used for both nodes and bins.
inline std::vector<double> tilted_weights(std::span<const double> weights, double tilt) {
  if (!std::isfinite(tilt) || tilt < 0.0) throw std::invalid_argument("tilt must be finite and >= 0");
  std::vector<double> out;
  out.reserve(weights.size());
  for (double w : weights) out.push_back(w > 0.0 ? std::pow(w, 1.0 + tilt) : 0.0);
  return out;
}

/// Selection proportional to fi_pop^(1+tilt): a controllable bias generator.
inline NodeDistribution make_tilted_dist(const Region& region, double tilt) {
  auto fi = population_weights(region, PopField::fi_pop);
  return NodeDistribution(tilted_weights(fi, tilt), fi);
}

/// Largest tilt in [0, hi] whose tilted distribution stays within the given
/// (alpha, beta) bounds, by bisection (both grow monotonically with tilt).
inline double max_tilt_within(std::span<const double> weights, double max_alpha, double max_beta,
                              double hi = 8.0, int iters = 100) {
  auto ok = [&](double t) {
    // Normalize first, as the distribution objects do, so the bound holds
    // bit-for-bit on what they report.
    auto p = tilted_weights(weights, t);
    double total = 0.0;
    for (double x : p) total += x;
    for (double& x : p) x /= total;
    auto b = bias_of(p, weights);
    return b.alpha <= max_alpha && b.beta <= max_beta;
  };
  if (ok(hi)) return hi;
  double lo = 0.0;
  for (int i = 0; i < iters; ++i) {
    double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

class WeightDistribution {
 public:
  enum class Kind { unit, exponential };

  static WeightDistribution unit() { return WeightDistribution(Kind::unit, 1.0); }
  static WeightDistribution exponential(double mean) {
    if (!(mean > 0.0) || !std::isfinite(mean))
      throw ValidationError("exponential mean must be positive and finite");
    return WeightDistribution(Kind::exponential, mean);
  }
  /// Exp(1): the E[W] = 1 normalization.
  static WeightDistribution normalized_exponential() { return exponential(1.0); }

  Kind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return kind_ == Kind::unit ? 0.0 : mean_ * mean_; }

  /// Unit weights consume no randomness. Exponential uses -mean*ln(1-U),
  /// redrawing the single value U = 0 that would give a zero weight.
  double sample(Xoshiro256ss& rng) const noexcept {
    if (kind_ == Kind::unit) return 1.0;
    for (;;) {
      double u = rng.uniform();
      if (u > 0.0) return mean_ * -std::log(1.0 - u);
    }
  }

  std::string describe() const {
    return kind_ == Kind::unit ? "unit" : "exponential(mean=" + format_real(mean_) + ")";
  }

 private:
  WeightDistribution(Kind k, double mean) : kind_(k), mean_(mean) {}
  Kind kind_;
  double mean_;
};

struct Donation {
  NodeIndex origin = 0;
  NodeIndex destination = 0;
  double value = 1.0;

  friend bool operator==(const Donation&, const Donation&) = default;
};

/// m i.i.d. donations. Draw order per donation: origin, destination, value.
inline std::vector<Donation> sample_stream(const NodeDistribution& dist, const WeightDistribution& wdist,
                                           std::size_t m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sample_stream: m must be >= 1");
  Xoshiro256ss rng(seed);
  std::vector<Donation> out;
  out.reserve(m);
  for (std::size_t t = 0; t < m; ++t) {
    Donation d;
    d.origin = dist.sample(rng);
    d.destination = dist.sample(rng);
    d.value = wdist.sample(rng);
    out.push_back(d);
  }
  return out;
}

/// Fingerprint of a stream: origins, destinations and value bit patterns.
inline std::uint64_t stream_hash(std::span<const Donation> stream) {
  Fnv1a h;
  for (const auto& d : stream) {
    h.update_value(d.origin);
    h.update_value(d.destination);
    h.update_value(d.value);
  }
  return h.digest();
}

}  // namespace matchlab

#endif  // MATCHLAB_SAMPLING_HPP
