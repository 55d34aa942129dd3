#ifndef MATCHLAB_BALLSBINS_HPP
#define MATCHLAB_BALLSBINS_HPP

// Weighted balls into weighted bins with biased two-choice sampling.
//
// A bin of integer weight N_i is viewed as N_i unit slots, each selected
// with probability P(bin i) / N_i. Loads are compared by normalized value
// v_i = w_i / N_i. Alongside the process itself this header carries the
// analysis objects used to test it: slot-rank probabilities, the
// (1+eps)-choice reference process on unit bins, exponential potentials
// of the centered load vector, majorization, and an empirical
// stochastic-dominance check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "matchlab/common.hpp"
#include "matchlab/geo.hpp"
#include "matchlab/parallel.hpp"
#include "matchlab/rng.hpp"
#include "matchlab/sampling.hpp"

namespace matchlab {

class BinsConfig {
 public:
  /// Selection proportional to weight: (1,1)-biased.
  static BinsConfig proportional(std::vector<std::int64_t> weights, WeightDistribution balls,
                                 double a = 0.05) {
    auto w = as_doubles(weights);
    return BinsConfig(std::move(weights), w, balls, a);
  }

  /// Selection proportional to N_i^(1 + tilt).
  static BinsConfig tilted(std::vector<std::int64_t> weights, double tilt, WeightDistribution balls,
                           double a = 0.05) {
    auto w = as_doubles(weights);
    return BinsConfig(std::move(weights), tilted_weights(w, tilt), balls, a);
  }

  /// Arbitrary selection probabilities (normalized here).
  static BinsConfig with_selection(std::vector<std::int64_t> weights, std::vector<double> selection,
                                   WeightDistribution balls, double a = 0.05) {
    return BinsConfig(std::move(weights), std::move(selection), balls, a);
  }

  std::size_t bins() const noexcept { return weights_.size(); }
  std::int64_t weight(std::size_t i) const { return weights_[i]; }
  const std::vector<std::int64_t>& weights() const noexcept { return weights_; }
  std::int64_t total_weight() const noexcept { return total_; }
  const std::vector<double>& selection() const noexcept { return selection_; }
  const Bias& bias() const noexcept { return bias_; }
  const WeightDistribution& balls() const noexcept { return balls_; }
  double a() const noexcept { return a_; }

  std::size_t sample_bin(Xoshiro256ss& rng) const noexcept { return sampler_(rng); }

 private:
  BinsConfig(std::vector<std::int64_t> weights, std::vector<double> selection, WeightDistribution balls,
             double a)
      : weights_(std::move(weights)), balls_(balls), a_(a) {
    if (weights_.empty()) throw ValidationError("bins config needs at least one bin");
    for (auto w : weights_) {
      if (w <= 0) throw ValidationError("bin weights must be positive integers");
      total_ += w;
    }
    if (selection.size() != weights_.size())
      throw ValidationError("selection probabilities must match the number of bins");
    if (!(a_ > 0.0) || !std::isfinite(a_)) throw ValidationError("potential parameter a must be positive");
    double s = 0.0;
    for (double p : selection) s += p;
    if (!(s > 0.0)) throw ValidationError("selection probabilities sum to zero");
    for (double& p : selection) p /= s;
    selection_ = std::move(selection);
    sampler_ = DiscreteSampler(selection_);
    bias_ = bias_of(selection_, as_doubles(weights_));
  }

  static std::vector<double> as_doubles(const std::vector<std::int64_t>& w) {
    return std::vector<double>(w.begin(), w.end());
  }

  std::vector<std::int64_t> weights_;
  std::vector<double> selection_;
  DiscreteSampler sampler_;
  Bias bias_;
  WeightDistribution balls_;
  double a_;
  std::int64_t total_ = 0;
};

struct BinsState {
  std::vector<double> w;  // cumulative weight per bin
  std::size_t t = 0;
  double total = 0.0;

  explicit BinsState(std::size_t bins = 0) : w(bins, 0.0) {}

  double value(const BinsConfig& c, std::size_t i) const { return w[i] / static_cast<double>(c.weight(i)); }
};

/// Gap(t) = max_i v_i - min_i v_i.
inline double gap(const BinsState& s, const BinsConfig& c) {
  double lo = kInf, hi = -kInf;
  for (std::size_t i = 0; i < c.bins(); ++i) {
    double v = s.value(c, i);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

/// The bin with the smaller v among two draws; ties go to the first.
inline std::size_t choose_bin(const BinsState& s, const BinsConfig& c, std::size_t first, std::size_t second) {
  return s.value(c, second) < s.value(c, first) ? second : first;
}

/// One ball: `choices` bins (1 or 2) drawn i.i.d. from the selection
/// distribution, then the ball weight. Returns the chosen bin.
inline std::size_t step_two_choice(BinsState& s, const BinsConfig& c, Xoshiro256ss& rng, int choices = 2) {
  std::size_t chosen = c.sample_bin(rng);
  if (choices >= 2) chosen = choose_bin(s, c, chosen, c.sample_bin(rng));
  const double ball = c.balls().sample(rng);
  s.w[chosen] += ball;
  s.total += ball;
  ++s.t;
  return chosen;
}

// ---------------------------------------------------------------------------
// Slot-rank probabilities

struct SlotProbabilities {
  std::vector<double> p;        // p_i: ball lands via the i-th most loaded slot
  std::vector<double> psi;      // psi_i = (sum_{j<=i} pi_j)^2
  std::vector<double> uniform;  // p^U_i = (2i - 1) / N^2
};

/// Slots ordered by normalized load, most loaded first, ties by bin index.
/// The two sampled slots both lie in the top i exactly when the ball lands
/// in one of the i most loaded slots, hence psi_i is a squared prefix sum.
inline SlotProbabilities slot_probabilities(const BinsConfig& c, const BinsState& s) {
  std::vector<std::size_t> order(c.bins());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return s.value(c, x) > s.value(c, y); });
  const auto N = static_cast<std::size_t>(c.total_weight());
  SlotProbabilities out;
  out.p.reserve(N);
  out.psi.reserve(N);
  out.uniform.reserve(N);
  const double n2 = static_cast<double>(N) * static_cast<double>(N);
  double prefix = 0.0;
  std::size_t rank = 0;
  for (std::size_t bin : order) {
    const double pi = c.selection()[bin] / static_cast<double>(c.weight(bin));
    for (std::int64_t slot = 0; slot < c.weight(bin); ++slot) {
      ++rank;
      out.p.push_back(pi * (pi + 2.0 * prefix));
      prefix += pi;
      out.psi.push_back(prefix * prefix);
      out.uniform.push_back(static_cast<double>(2 * rank - 1) / n2);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// (1+eps)-choice reference process on N unit bins

/// phi_i = (i/N)^(1+eps) for i = 0..N: probability of landing in one of the
/// i most loaded bins.
inline std::vector<double> one_plus_eps_cdf(std::size_t n_bins, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
  if (n_bins == 0) throw std::invalid_argument("need at least one bin");
  std::vector<double> phi(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i)
    phi[i] = std::pow(static_cast<double>(i) / static_cast<double>(n_bins), 1.0 + eps);
  phi[n_bins] = 1.0;
  return phi;
}

/// Per-rank allocation probabilities phi_i - phi_{i-1}, rank 1 = most loaded.
inline std::vector<double> one_plus_eps_probabilities(std::size_t n_bins, double eps) {
  auto phi = one_plus_eps_cdf(n_bins, eps);
  std::vector<double> p(n_bins);
  for (std::size_t i = 1; i <= n_bins; ++i) p[i - 1] = phi[i] - phi[i - 1];
  return p;
}

class OnePlusEpsProcess {
 public:
  OnePlusEpsProcess(std::size_t n_bins, double eps)
      : phi_(one_plus_eps_cdf(n_bins, eps)), load_(n_bins, 0), order_(n_bins) {
    std::iota(order_.begin(), order_.end(), 0);
  }

  std::size_t bins() const noexcept { return load_.size(); }
  const std::vector<std::int64_t>& loads() const noexcept { return load_; }
  /// Bin indices from most to least loaded, ties by bin index.
  const std::vector<std::size_t>& order() const noexcept { return order_; }

  /// Adds one ball; rank chosen by inverse transform on one uniform.
  std::size_t step(Xoshiro256ss& rng) {
    const double u = rng.uniform();
    auto it = std::upper_bound(phi_.begin() + 1, phi_.end(), u);
    std::size_t rank = static_cast<std::size_t>(it - phi_.begin()) - 1;  // 0-based
    if (rank >= order_.size()) rank = order_.size() - 1;
    return add_at_rank(rank);
  }

  /// Adds a ball to the bin at 0-based rank; keeps `order_` sorted.
  std::size_t add_at_rank(std::size_t rank) {
    const std::size_t bin = order_[rank];
    ++load_[bin];
    // Move toward the front past bins it now outranks.
    std::size_t pos = rank;
    while (pos > 0) {
      std::size_t prev = order_[pos - 1];
      bool before = load_[bin] > load_[prev] || (load_[bin] == load_[prev] && bin < prev);
      if (!before) break;
      order_[pos] = prev;
      --pos;
    }
    order_[pos] = bin;
    return bin;
  }

  std::int64_t gap() const {
    auto [lo, hi] = std::minmax_element(load_.begin(), load_.end());
    return *hi - *lo;
  }

 private:
  std::vector<double> phi_;
  std::vector<std::int64_t> load_;
  std::vector<std::size_t> order_;
};

// ---------------------------------------------------------------------------
// Potentials

struct PotentialSample {
  std::size_t t = 0;
  double phi = 0.0;
  double psi = 0.0;
  double gamma = 0.0;
};

/// x_i = v_i - total/N; zero-mean under slot weighting.
inline std::vector<double> centered_loads(const BinsState& s, const BinsConfig& c) {
  const double mean = s.total / static_cast<double>(c.total_weight());
  std::vector<double> x(c.bins());
  for (std::size_t i = 0; i < c.bins(); ++i) x[i] = s.value(c, i) - mean;
  return x;
}

/// Slot-level potentials: every slot of bin i contributes e^{+-a x_i}.
inline PotentialSample potentials(const BinsState& s, const BinsConfig& c, double a) {
  PotentialSample out;
  out.t = s.t;
  auto x = centered_loads(s, c);
  for (std::size_t i = 0; i < c.bins(); ++i) {
    const double slots = static_cast<double>(c.weight(i));
    out.phi += slots * std::exp(a * x[i]);
    out.psi += slots * std::exp(-a * x[i]);
  }
  out.gamma = out.phi + out.psi;
  return out;
}

// ---------------------------------------------------------------------------
// Process runner

struct GapSample {
  std::size_t t = 0;
  double gap = 0.0;
};

struct ProcessOptions {
  std::size_t m = 1;
  std::uint64_t seed = 0;
  std::vector<std::size_t> schedule;  // sample times; t = m is always added
  int choices = 2;                    // 1 = one-choice ablation
};

struct ProcessResult {
  std::vector<GapSample> gaps;
  std::vector<PotentialSample> potentials;
  BinsState final_state;
  /// |total - m E[W]| / sqrt(m Var[W]): the Chebyshev statistic of total weight.
  double total_weight_z = 0.0;
};

/// Sample times t, t+step, ... up to m, plus m.
inline std::vector<std::size_t> every(std::size_t step, std::size_t m, std::size_t from = 0) {
  std::vector<std::size_t> out;
  if (step == 0) return out;
  for (std::size_t t = from == 0 ? step : from; t <= m; t += step) out.push_back(t);
  return out;
}

inline ProcessResult run_process(const BinsConfig& c, const ProcessOptions& opt) {
  if (opt.m < 1) throw std::invalid_argument("run_process: m must be >= 1");
  std::vector<std::size_t> schedule = opt.schedule;
  schedule.push_back(opt.m);
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
  schedule.erase(std::remove_if(schedule.begin(), schedule.end(), [&](std::size_t t) { return t > opt.m; }),
                 schedule.end());

  ProcessResult r;
  BinsState s(c.bins());
  Xoshiro256ss rng(opt.seed);
  auto next = schedule.begin();
  if (next != schedule.end() && *next == 0) {
    r.gaps.push_back({0, 0.0});
    r.potentials.push_back(potentials(s, c, c.a()));
    ++next;
  }
  while (s.t < opt.m) {
    step_two_choice(s, c, rng, opt.choices);
    if (next != schedule.end() && s.t == *next) {
      r.gaps.push_back({s.t, gap(s, c)});
      r.potentials.push_back(potentials(s, c, c.a()));
      ++next;
    }
  }
  const double expected = static_cast<double>(opt.m) * c.balls().mean();
  const double sd = std::sqrt(static_cast<double>(opt.m) * c.balls().variance());
  const double dev = std::abs(s.total - expected);
  r.total_weight_z = sd > 0.0 ? dev / sd : (dev == 0.0 ? 0.0 : kInf);
  r.final_state = std::move(s);
  return r;
}

// ---------------------------------------------------------------------------
// Majorization and stochastic dominance

/// True iff x majorizes y: every prefix sum of sorted-descending x is at
/// least that of y, and (unless relaxed) the totals agree.
inline bool check_majorization(std::span<const double> x, std::span<const double> y,
                               bool require_equal_sum = true, double tol = 1e-9) {
  if (x.size() != y.size()) throw std::invalid_argument("check_majorization: length mismatch");
  std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end(), std::greater<>());
  std::sort(ys.begin(), ys.end(), std::greater<>());
  double px = 0.0, py = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    px += xs[i];
    py += ys[i];
    if (px < py - tol * std::max(1.0, std::abs(py))) return false;
  }
  if (require_equal_sum && std::abs(px - py) > tol * std::max(1.0, std::abs(py))) return false;
  return true;
}

/// One-sample DKW half-width at failure probability `delta`.
inline double dkw_band(std::size_t n, double delta) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

struct EcdfPoint {
  double value = 0.0;
  double slot_cdf = 0.0;  // P(Gap <= value), weighted process
  double eps_cdf = 0.0;   // P(Gap_{1+eps} <= value)
};

struct DominanceReport {
  double eps = 0.0;
  double eps_bound = 0.0;   // f(alpha, beta) - 1
  bool certified = false;   // 0 < eps <= eps_bound
  std::string warning;
  std::size_t runs = 0;
  std::size_t m = 0;
  std::vector<EcdfPoint> ecdf;
  double max_violation = 0.0;  // max over values of eps_cdf - slot_cdf
  double band = 0.0;           // sum of the two DKW half-widths
  bool dominance_holds = false;
};

/// Compares the final-gap distributions of the weighted two-choice process
/// under `slot_config` and of the (1+eps)-choice process on N unit bins
/// (N = total bin weight). Dominance of the (1+eps) gap means its ECDF
/// lies below the weighted-process ECDF everywhere, up to the union of two
/// DKW bands at the given confidence.
inline DominanceReport dominance_experiment(const BinsConfig& slot_config, double eps, std::size_t m,
                                            std::size_t runs, std::uint64_t base_seed,
                                            double confidence = 0.999) {
  if (runs < 1 || m < 1) throw std::invalid_argument("dominance_experiment: runs and m must be >= 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("dominance_experiment: eps must lie in (0, 1]");
  if (slot_config.balls().kind() != WeightDistribution::Kind::unit)
    throw std::invalid_argument("dominance_experiment: the comparison is defined for unit balls only");
  DominanceReport rep;
  rep.eps = eps;
  rep.runs = runs;
  rep.m = m;
  const auto& b = slot_config.bias();
  rep.eps_bound = f_alpha_beta(b.alpha, b.beta) - 1.0;
  rep.certified = eps > 0.0 && eps <= rep.eps_bound;
  if (!rep.certified)
    rep.warning = "eps = " + format_real(eps) + " exceeds f(alpha,beta) - 1 = " + format_real(rep.eps_bound) +
                  "; dominance is not guaranteed for this configuration";

  const auto N = static_cast<std::size_t>(slot_config.total_weight());
  auto snap = [](double g) { return std::round(g * 1e9) / 1e9; };
  std::vector<double> slot_gaps(runs), eps_gaps(runs);
  parallel_for(runs, [&](std::size_t r) {
    ProcessOptions opt;
    opt.m = m;
    opt.seed = run_seed(base_seed, r);
    slot_gaps[r] = snap(run_process(slot_config, opt).gaps.back().gap);
    OnePlusEpsProcess ref(N, eps);
    Xoshiro256ss rng(run_seed(base_seed ^ 0xD0D0D0D0D0D0D0D0ULL, r));
    for (std::size_t t = 0; t < m; ++t) ref.step(rng);
    eps_gaps[r] = static_cast<double>(ref.gap());
  });

  std::sort(slot_gaps.begin(), slot_gaps.end());
  std::sort(eps_gaps.begin(), eps_gaps.end());
  std::vector<double> values = slot_gaps;
  values.insert(values.end(), eps_gaps.begin(), eps_gaps.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const double n = static_cast<double>(runs);
  for (double v : values) {
    EcdfPoint pt;
    pt.value = v;
    pt.slot_cdf = static_cast<double>(std::upper_bound(slot_gaps.begin(), slot_gaps.end(), v) - slot_gaps.begin()) / n;
    pt.eps_cdf = static_cast<double>(std::upper_bound(eps_gaps.begin(), eps_gaps.end(), v) - eps_gaps.begin()) / n;
    rep.max_violation = std::max(rep.max_violation, pt.eps_cdf - pt.slot_cdf);
    rep.ecdf.push_back(pt);
  }
  const double delta = 1.0 - confidence;
  rep.band = 2.0 * dkw_band(runs, delta / 2.0);
  rep.dominance_holds = rep.max_violation <= rep.band;
  return rep;
}

}  // namespace matchlab

#endif  // MATCHLAB_BALLSBINS_HPP
