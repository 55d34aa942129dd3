#ifndef MATCHLAB_HARNESS_HPP
#define MATCHLAB_HARNESS_HPP

// Experiment orchestration and file output. Every writer is a pure
// function of its inputs (no timestamps, fixed number formatting), so the
// same config and seed give byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "matchlab/ballsbins.hpp"
#include "matchlab/config.hpp"
#include "matchlab/geo.hpp"
#include "matchlab/lowerbound.hpp"
#include "matchlab/matching.hpp"
#include "matchlab/metrics.hpp"
#include "matchlab/parallel.hpp"
#include "matchlab/rng.hpp"
#include "matchlab/sampling.hpp"

namespace matchlab {

struct AlgorithmRuns {
  AlgorithmSpec spec;
  std::vector<RunMetrics> runs;
};

struct AggregateRow {
  double max_menvy = 1.0, mean_menvy = 1.0, max_reldist = 1.0, mean_reldist = 1.0;
};

struct ResultsBundle {
  ExperimentConfig config;
  Region region;
  Catchment catchment;
  Bias sampling_bias;
  std::vector<AlgorithmRuns> algorithms;
  std::vector<std::uint64_t> run_seeds;
  std::vector<std::uint64_t> stream_hashes;  // per run, from the generated stream
  std::vector<double> stream_totals;         // per run
  bool paired = true;                        // every algorithm replayed the same stream
  double max_conservation_error = 0.0;       // relative, over all runs and algorithms

  const AlgorithmRuns* find(const std::string& label) const {
    for (const auto& a : algorithms)
      if (a.spec.label() == label) return &a;
    return nullptr;
  }
};

inline NodeDistribution make_distribution(const Region& region, const SamplingSpec& s) {
  if (s.tilt) return make_tilted_dist(region, *s.tilt);
  return make_proportional_dist(region, s.field);
}

/// Arithmetic mean of per-run statistics; an infinite entry makes the mean infinite.
inline AggregateRow aggregate(const std::vector<RunMetrics>& runs) {
  AggregateRow a{0.0, 0.0, 0.0, 0.0};
  for (const auto& r : runs) {
    a.max_menvy += r.max_menvy;
    a.mean_menvy += r.mean_menvy;
    a.max_reldist += r.max_reldist;
    a.mean_reldist += r.mean_reldist;
  }
  const double n = static_cast<double>(runs.size());
  a.max_menvy /= n;
  a.mean_menvy /= n;
  a.max_reldist /= n;
  a.mean_reldist /= n;
  return a;
}

inline ResultsBundle run_experiment(const ExperimentConfig& cfg, Region region) {
  if (cfg.algorithms.empty()) throw ValidationError("config needs at least one algorithm");
  Catchment catchment = compute_catchments(region);
  const NodeDistribution dist = make_distribution(region, cfg.sampling);
  ResultsBundle b{cfg, std::move(region), std::move(catchment), dist.bias_report(), {}, {}, {}, {}, true, 0.0};
  for (const auto& spec : cfg.algorithms) b.algorithms.push_back({spec, std::vector<RunMetrics>(cfg.runs)});
  b.run_seeds.resize(cfg.runs);
  b.stream_hashes.resize(cfg.runs);
  b.stream_totals.resize(cfg.runs);
  std::vector<double> conservation(cfg.runs, 0.0);
  std::vector<char> paired(cfg.runs, 1);

  parallel_for(cfg.runs, [&](std::size_t r) {
    const std::uint64_t seed = run_seed(cfg.seed, r);
    const auto stream = sample_stream(dist, cfg.weights, cfg.m, seed);
    const std::uint64_t hash = stream_hash(stream);
    double total = 0.0;
    for (const auto& d : stream) total += d.value;
    b.run_seeds[r] = seed;
    b.stream_hashes[r] = hash;
    b.stream_totals[r] = total;
    for (auto& algo : b.algorithms) {
      RunMetrics rm = replay(algo.spec, stream, b.region, b.catchment);
      double allocated = 0.0;
      for (double w : rm.final_values) allocated += w;
      conservation[r] = std::max(conservation[r], std::abs(allocated - total) / std::max(1.0, std::abs(total)));
      if (rm.stream_hash != hash) paired[r] = 0;
      algo.runs[r] = std::move(rm);
    }
  });
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    b.max_conservation_error = std::max(b.max_conservation_error, conservation[r]);
    b.paired = b.paired && paired[r];
  }
  return b;
}

inline ResultsBundle run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, load_region(cfg.region)); }

// ---------------------------------------------------------------------------
// Output helpers

namespace harness_detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// JSON number, or the string "inf" for non-finite values.
inline json num(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

/// Linear-interpolation quantile of sorted data (inf-safe).
inline double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return 0.0;
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || s[lo] == s[hi]) return s[lo];
  if (std::isinf(s[hi])) return s[hi];
  return s[lo] + frac * (s[hi] - s[lo]);
}

inline void write_json(const json& j, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

}  // namespace harness_detail

inline void write_results_csv(const ResultsBundle& b, const std::filesystem::path& path) {
  auto out = harness_detail::open_out(path);
  out << "algorithm,run,max_menvy,mean_menvy,max_reldist,mean_reldist\n";
  for (const auto& a : b.algorithms) {
    const auto label = a.spec.label();
    for (std::size_t r = 0; r < a.runs.size(); ++r) {
      const auto& m = a.runs[r];
      out << label << ',' << r << ',' << format_real(m.max_menvy) << ',' << format_real(m.mean_menvy) << ','
          << format_real(m.max_reldist) << ',' << format_real(m.mean_reldist) << '\n';
    }
    const auto g = aggregate(a.runs);
    out << label << ",mean," << format_real(g.max_menvy) << ',' << format_real(g.mean_menvy) << ','
        << format_real(g.max_reldist) << ',' << format_real(g.mean_reldist) << '\n';
  }
  harness_detail::finish(out, path);
}

inline void write_envy_trace_csv(const std::vector<std::pair<std::string, const std::vector<RunMetrics>*>>& series,
                                 const std::filesystem::path& path) {
  auto out = harness_detail::open_out(path);
  out << "algorithm,run,t,max_menvy\n";
  for (const auto& [label, runs] : series)
    for (std::size_t r = 0; r < runs->size(); ++r)
      for (const auto& s : (*runs)[r].envy_trace) out << label << ',' << r << ',' << s.t << ',' << format_real(s.max_menvy) << '\n';
  harness_detail::finish(out, path);
}

/// Per-county ratios averaged over runs.
inline std::vector<CountyRatio> mean_county_ratios(const std::vector<RunMetrics>& runs) {
  if (runs.empty()) return {};
  std::vector<CountyRatio> acc = runs.front().county_ratios;
  for (auto& c : acc) c.per_capita = c.proportional_share = c.ratio = 0.0;
  for (const auto& r : runs)
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i].per_capita += r.county_ratios[i].per_capita;
      acc[i].proportional_share += r.county_ratios[i].proportional_share;
      acc[i].ratio += r.county_ratios[i].ratio;
    }
  const double n = static_cast<double>(runs.size());
  for (auto& c : acc) {
    c.per_capita /= n;
    c.proportional_share /= n;
    c.ratio /= n;
  }
  return acc;
}

inline void write_county_ratio_csv(const std::vector<CountyRatio>& rows, const std::filesystem::path& path) {
  auto out = harness_detail::open_out(path);
  out << "node_id,foodbank_id,per_capita,proportional_share,ratio\n";
  for (const auto& c : rows)
    out << c.node_id << ',' << c.foodbank_id << ',' << format_real(c.per_capita) << ','
        << format_real(c.proportional_share) << ',' << format_real(c.ratio) << '\n';
  harness_detail::finish(out, path);
}

inline json bundle_metadata(const ResultsBundle& b) {
  using harness_detail::num;
  json j;
  j["software"] = {{"name", "matchlab"}, {"version", std::string(kVersion)}};
  j["prng"] = std::string(kPrngName);
  j["run_seed_derivation"] = "run_seed(base_seed, run_index)";
  j["base_seed"] = b.config.seed;
  j["config_hash"] = hex64(config_hash(b.config.raw));
  j["m"] = b.config.m;
  j["runs"] = b.config.runs;
  j["sampling"] = {{"field", to_string(b.config.sampling.field)}};
  if (b.config.sampling.tilt) j["sampling"]["tilt"] = *b.config.sampling.tilt;
  j["sampling"]["bias"] = {{"alpha", num(b.sampling_bias.alpha)}, {"beta", num(b.sampling_bias.beta)}};
  j["weights"] = b.config.weights.describe();
  json algos = json::array();
  for (const auto& a : b.algorithms) algos.push_back(a.spec.label());
  j["algorithms"] = algos;
  json seeds = json::array(), hashes = json::array();
  for (std::size_t r = 0; r < b.run_seeds.size(); ++r) {
    seeds.push_back(hex64(b.run_seeds[r]));
    hashes.push_back(hex64(b.stream_hashes[r]));
  }
  j["run_seeds"] = seeds;
  j["stream_hashes"] = hashes;
  j["pairing"] = {{"paired", b.paired},
                  {"note", "each run index replays one shared donation stream through every algorithm"}};
  j["mean_envy_definition"] = std::string(kMeanEnvyDefinition);
  j["aggregation"] = "arithmetic mean of per-run statistics (rows with run = mean)";
  j["conservation"] = {{"max_relative_error", b.max_conservation_error}, {"tolerance", 1e-9}};
  const auto& rep = b.region.repair();
  j["metric_repair"] = {{"requested", b.config.region.repair_metric},
                        {"applied", rep.applied},
                        {"symmetrized", rep.symmetrized},
                        {"cells_changed", rep.cells_changed},
                        {"max_reduction", rep.max_reduction}};
  j["region"] = {{"nodes", b.region.size()}, {"foodbanks", b.region.bank_count()}, {"total_fi", b.region.total_fi()},
                 {"total_pop", b.region.total_pop()}};
  j["config"] = b.config.raw;
  return j;
}

/// results.csv, envy_trace.csv, <algorithm>/county_ratio.csv and metadata.json.
inline void write_bundle(const ResultsBundle& b, const std::filesystem::path& dir) {
  write_results_csv(b, dir / "results.csv");
  std::vector<std::pair<std::string, const std::vector<RunMetrics>*>> series;
  for (const auto& a : b.algorithms) series.emplace_back(a.spec.label(), &a.runs);
  write_envy_trace_csv(series, dir / "envy_trace.csv");
  for (const auto& a : b.algorithms)
    write_county_ratio_csv(mean_county_ratios(a.runs), dir / a.spec.label() / "county_ratio.csv");
  harness_detail::write_json(bundle_metadata(b), dir / "metadata.json");
}

// ---------------------------------------------------------------------------
// Figure data

struct EnvyBand {
  std::size_t t = 0;
  double mean = 0.0, p10 = 0.0, p90 = 0.0;
};

/// Mean and 10/90 percentiles of max m-envy across runs at each trace time.
inline std::vector<EnvyBand> envy_over_time(const std::vector<const std::vector<EnvySample>*>& traces) {
  std::vector<EnvyBand> out;
  if (traces.empty()) return out;
  const std::size_t len = traces.front()->size();
  for (const auto* tr : traces)
    if (tr->size() != len) throw std::invalid_argument("envy_over_time: traces differ in length");
  std::vector<double> col(traces.size());
  for (std::size_t k = 0; k < len; ++k) {
    double sum = 0.0;
    for (std::size_t r = 0; r < traces.size(); ++r) {
      col[r] = (*traces[r])[k].max_menvy;
      sum += col[r];
    }
    std::sort(col.begin(), col.end());
    out.push_back({(*traces.front())[k].t, sum / static_cast<double>(col.size()),
                   harness_detail::quantile_sorted(col, 0.1), harness_detail::quantile_sorted(col, 0.9)});
  }
  return out;
}

template <typename Runs, typename TraceOf>
std::vector<EnvyBand> envy_over_time(const Runs& runs, TraceOf trace_of) {
  std::vector<const std::vector<EnvySample>*> traces;
  for (const auto& r : runs) traces.push_back(&trace_of(r));
  return envy_over_time(traces);
}

inline void write_envy_time_csv(const std::vector<std::pair<std::string, std::vector<EnvyBand>>>& series,
                                const std::filesystem::path& path) {
  auto out = harness_detail::open_out(path);
  out << "algorithm,t,mean,p10,p90\n";
  for (const auto& [label, bands] : series)
    for (const auto& e : bands)
      out << label << ',' << e.t << ',' << format_real(e.mean) << ',' << format_real(e.p10) << ','
          << format_real(e.p90) << '\n';
  harness_detail::finish(out, path);
}

inline std::string coverage_band(double ratio, const CoverageBands& bands) {
  if (ratio < bands.green_low) return "red";
  if (ratio > bands.green_high) return "brown";
  return "green";
}

inline void write_county_band_csv(const std::vector<CountyRatio>& rows, const CoverageBands& bands,
                                  const std::filesystem::path& path) {
  auto out = harness_detail::open_out(path);
  out << "node_id,foodbank_id,ratio,band\n";
  for (const auto& c : rows)
    out << c.node_id << ',' << c.foodbank_id << ',' << format_real(c.ratio) << ',' << coverage_band(c.ratio, bands)
        << '\n';
  harness_detail::finish(out, path);
}

/// envy_time.csv plus <algorithm>/county_band.csv.
inline void emit_figure_data(const ResultsBundle& b, const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::vector<EnvyBand>>> series;
  for (const auto& a : b.algorithms) {
    series.emplace_back(a.spec.label(), envy_over_time(a.runs, [](const RunMetrics& r) -> const auto& {
                          return r.envy_trace;
                        }));
    write_county_band_csv(mean_county_ratios(a.runs), b.config.bands, dir / a.spec.label() / "county_band.csv");
  }
  write_envy_time_csv(series, dir / "envy_time.csv");
}

// ---------------------------------------------------------------------------
// Cutoff sweep

struct ParetoPoint {
  std::string c;  // miles, "max", or "alg1"
  double max_menvy = 1.0;
  double max_reldist = 1.0;
};

struct SweepResult {
  ResultsBundle bundle;
  std::vector<ParetoPoint> points;
};

/// Greedy-with-cutoff at every c plus two-choice once, on paired streams.
inline SweepResult sweep_cutoff(ExperimentConfig cfg, const std::vector<double>& c_values) {
  if (c_values.empty()) throw ValidationError("sweep needs at least one cutoff");
  cfg.algorithms.clear();
  for (double c : c_values) {
    if (!(c >= 0.0)) throw ValidationError("cutoffs must be nonnegative");
    AlgorithmSpec s{Algorithm::greedy_cutoff, LoadMode::normalized, c};
    bool dup = false;
    for (const auto& e : cfg.algorithms) dup = dup || e.label() == s.label();
    if (!dup) cfg.algorithms.push_back(s);
  }
  cfg.algorithms.push_back({Algorithm::two_choice});
  ResultsBundle b = run_experiment(cfg);
  std::vector<ParetoPoint> pts;
  for (const auto& a : b.algorithms) {
    const auto g = aggregate(a.runs);
    std::string c = a.spec.kind == Algorithm::two_choice ? "alg1"
                    : std::isinf(a.spec.cutoff_miles)    ? "max"
                                                         : format_real(a.spec.cutoff_miles);
    pts.push_back({c, g.max_menvy, g.max_reldist});
  }
  return {std::move(b), std::move(pts)};
}

inline void write_pareto_csv(const std::vector<ParetoPoint>& pts, const std::filesystem::path& path) {
  auto out = harness_detail::open_out(path);
  out << "c,max_menvy,max_reldist\n";
  for (const auto& p : pts) out << p.c << ',' << format_real(p.max_menvy) << ',' << format_real(p.max_reldist) << '\n';
  harness_detail::finish(out, path);
}

/// Parses "0,10,20,max" into miles (max = infinity).
inline std::vector<double> parse_cutoff_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& f : split_csv_line(text)) {
    if (f == "max")
      out.push_back(kInf);
    else
      out.push_back(parse_real(f));
    if (!(out.back() >= 0.0)) throw ValidationError("cutoffs must be nonnegative");
  }
  if (out.empty()) throw ValidationError("empty cutoff list");
  return out;
}

// ---------------------------------------------------------------------------
// alpha/beta report

inline json alphabeta_report(const Region& region) {
  using harness_detail::num;
  const Catchment c = compute_catchments(region);
  const BankBias bb = estimate_alpha_beta(region, c);
  json banks = json::array();
  for (BankIndex b = 0; b < c.bank_count(); ++b)
    banks.push_back({{"foodbank_id", region.bank_id(b)}, {"served_fi", c.served_pop[b]}, {"q", bb.q[b]}, {"r", bb.r[b]}});
  return {{"alpha", num(bb.bias.alpha)},
          {"beta", num(bb.bias.beta)},
          {"f_alpha_beta", num(f_alpha_beta(bb.bias.alpha, bb.bias.beta))},
          {"foodbanks", banks}};
}

// ---------------------------------------------------------------------------
// Balls into bins

struct BallsBinsOutcome {
  BallsBinsConfig config;
  BinsConfig bins;
  std::vector<std::uint64_t> seeds;
  std::vector<ProcessResult> two_choice;
  std::vector<ProcessResult> one_choice;  // empty unless the ablation is on
  std::optional<DominanceReport> dominance;
};

/// eps for the dominance check: explicit, or the condition boundary capped at 1.
inline double dominance_eps(const DominanceSpec& d, const Bias& bias) {
  if (d.eps) return *d.eps;
  const double bound = f_alpha_beta(bias.alpha, bias.beta) - 1.0;
  if (!(bound > 0.0))
    throw ValidationError("f(alpha,beta) <= 1 for this selection: no eps meets the dominance condition; set dominance.eps");
  return std::min(bound, 1.0);
}

inline BallsBinsOutcome run_ballsbins(const BallsBinsConfig& cfg) {
  BallsBinsOutcome o{cfg, cfg.bins(), {}, {}, {}, std::nullopt};
  const auto schedule = cfg.sample_times();
  o.seeds.resize(cfg.runs);
  for (std::size_t r = 0; r < cfg.runs; ++r) o.seeds[r] = run_seed(cfg.seed, r);
  auto fan_out = [&](int choices) {
    std::vector<ProcessResult> res(cfg.runs);
    parallel_for(cfg.runs, [&](std::size_t r) {
      ProcessOptions opt{cfg.m, o.seeds[r], schedule, choices};
      res[r] = run_process(o.bins, opt);
      res[r].final_state.w.clear();  // keep memory small; final gap is in the trace
    });
    return res;
  };
  o.two_choice = fan_out(2);
  if (cfg.one_choice_ablation) o.one_choice = fan_out(1);
  if (cfg.dominance) {
    const auto& d = *cfg.dominance;
    // The coupling only covers unit balls, whatever the main process uses.
    const auto unit_bins = BinsConfig::with_selection(o.bins.weights(), o.bins.selection(),
                                                      WeightDistribution::unit(), o.bins.a());
    o.dominance = dominance_experiment(unit_bins, dominance_eps(d, unit_bins.bias()), d.m, d.runs,
                                       cfg.seed ^ 0x5EED5EED5EED5EEDULL, d.confidence);
  }
  return o;
}

inline double median(std::vector<double> x) {
  if (x.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

inline void write_ballsbins(const BallsBinsOutcome& o, const std::filesystem::path& dir) {
  using harness_detail::num;
  {
    const auto path = dir / "gap_trace.csv";
    auto out = harness_detail::open_out(path);
    out << "process,run,t,gap\n";
    auto emit = [&](const char* name, const std::vector<ProcessResult>& res) {
      for (std::size_t r = 0; r < res.size(); ++r)
        for (const auto& g : res[r].gaps) out << name << ',' << r << ',' << g.t << ',' << format_real(g.gap) << '\n';
    };
    emit("two_choice", o.two_choice);
    emit("one_choice", o.one_choice);
    harness_detail::finish(out, path);
  }
  {
    const auto path = dir / "potential_trace.csv";
    auto out = harness_detail::open_out(path);
    out << "run,t,phi,psi,gamma,a\n";
    const std::string a = format_real(o.bins.a());
    for (std::size_t r = 0; r < o.two_choice.size(); ++r)
      for (const auto& p : o.two_choice[r].potentials)
        out << r << ',' << p.t << ',' << format_real(p.phi) << ',' << format_real(p.psi) << ','
            << format_real(p.gamma) << ',' << a << '\n';
    harness_detail::finish(out, path);
  }
  json j;
  j["software"] = {{"name", "matchlab"}, {"version", std::string(kVersion)}};
  j["prng"] = std::string(kPrngName);
  j["config_hash"] = hex64(config_hash(o.config.raw));
  j["bins"] = o.bins.bins();
  j["total_weight"] = o.bins.total_weight();
  j["balls"] = o.bins.balls().describe();
  j["bias"] = {{"alpha", num(o.bins.bias().alpha)},
               {"beta", num(o.bins.bias().beta)},
               {"f_alpha_beta", num(f_alpha_beta(o.bins.bias().alpha, o.bins.bias().beta))}};
  auto summarize = [&](const std::vector<ProcessResult>& res) {
    json s;
    std::vector<double> gaps, z;
    for (const auto& r : res) {
      gaps.push_back(r.gaps.back().gap);
      z.push_back(r.total_weight_z);
    }
    s["final_gap"] = gaps;
    s["median_final_gap"] = median(gaps);
    s["max_total_weight_z"] = num(*std::max_element(z.begin(), z.end()));
    return s;
  };
  j["two_choice"] = summarize(o.two_choice);
  if (!o.one_choice.empty()) j["one_choice"] = summarize(o.one_choice);
  if (o.dominance) {
    const auto& d = *o.dominance;
    j["dominance"] = {{"eps", d.eps},           {"eps_bound", num(d.eps_bound)}, {"certified", d.certified},
                      {"warning", d.warning},   {"runs", d.runs},                {"m", d.m},
                      {"max_violation", d.max_violation}, {"band", d.band},       {"dominance_holds", d.dominance_holds}};
    const auto path = dir / "dominance_ecdf.csv";
    auto out = harness_detail::open_out(path);
    out << "gap,slot_cdf,eps_cdf\n";
    for (const auto& p : d.ecdf)
      out << format_real(p.value) << ',' << format_real(p.slot_cdf) << ',' << format_real(p.eps_cdf) << '\n';
    harness_detail::finish(out, path);
  }
  j["config"] = o.config.raw;
  harness_detail::write_json(j, dir / "summary.json");
}

// ---------------------------------------------------------------------------
// Lower-bound experiment output

inline void write_tradeoff(const TradeoffReport& rep, const std::filesystem::path& dir) {
  using harness_detail::num;
  const std::pair<const char*, const std::vector<TradeoffRun>*> series[] = {{"driver_optimal", &rep.driver_optimal},
                                                                           {"two_choice", &rep.two_choice}};
  {
    const auto path = dir / "lowerbound.csv";
    auto out = harness_detail::open_out(path);
    out << "algorithm,run,deliveries_to_A,max_menvy,max_reldist,mean_reldist\n";
    for (const auto& [name, runs] : series)
      for (std::size_t r = 0; r < runs->size(); ++r) {
        const auto& x = (*runs)[r];
        out << name << ',' << r << ',' << x.deliveries_to_A << ',' << format_real(x.max_menvy) << ','
            << format_real(x.max_reldist) << ',' << format_real(x.mean_reldist) << '\n';
      }
    harness_detail::finish(out, path);
  }
  {
    const auto path = dir / "envy_trace.csv";
    auto out = harness_detail::open_out(path);
    out << "algorithm,run,t,max_menvy\n";
    for (const auto& [name, runs] : series)
      for (std::size_t r = 0; r < runs->size(); ++r)
        for (const auto& s : (*runs)[r].envy_trace) out << name << ',' << r << ',' << s.t << ',' << format_real(s.max_menvy) << '\n';
    harness_detail::finish(out, path);
  }
  std::vector<std::pair<std::string, std::vector<EnvyBand>>> bands;
  for (const auto& [name, runs] : series)
    bands.emplace_back(name, envy_over_time(*runs, [](const TradeoffRun& r) -> const auto& { return r.envy_trace; }));
  write_envy_time_csv(bands, dir / "envy_time.csv");

  json j;
  j["software"] = {{"name", "matchlab"}, {"version", std::string(kVersion)}};
  j["prng"] = std::string(kPrngName);
  j["n"] = rep.spec.n;
  j["delta"] = rep.spec.delta;
  j["m"] = rep.m;
  j["runs"] = rep.runs;
  j["base_seed"] = rep.base_seed;
  for (const auto& [name, runs] : series) {
    double deliveries = 0.0;
    std::size_t mismatches = 0;
    std::vector<double> envy, reldist;
    for (const auto& x : *runs) {
      deliveries += static_cast<double>(x.deliveries_to_A);
      mismatches += x.a_route_mismatches;
      envy.push_back(x.max_menvy);
      reldist.push_back(x.max_reldist);
    }
    j[name] = {{"mean_deliveries_to_A", deliveries / static_cast<double>(runs->size())},
               {"median_max_menvy", num(median(envy))},
               {"max_reldist", *std::max_element(reldist.begin(), reldist.end())},
               {"a_route_mismatches", mismatches}};
  }
  j["expected_deliveries_to_A"] = static_cast<double>(rep.m) / static_cast<double>(rep.spec.n * rep.spec.n);
  harness_detail::write_json(j, dir / "summary.json");
}

}  // namespace matchlab

#endif  // MATCHLAB_HARNESS_HPP
