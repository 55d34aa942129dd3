#ifndef MATCHLAB_CONFIG_HPP
#define MATCHLAB_CONFIG_HPP

// JSON experiment configuration. Every object is checked against its list
// of known keys; an unknown key is a validation error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "matchlab/ballsbins.hpp"
#include "matchlab/common.hpp"
#include "matchlab/geo.hpp"
#include "matchlab/lowerbound.hpp"
#include "matchlab/matching.hpp"
#include "matchlab/sampling.hpp"
#include "matchlab/synthetic.hpp"

namespace matchlab {

using json = nlohmann::json;

inline constexpr std::string_view kExperimentSchema = "matchlab.experiment/1";
inline constexpr std::string_view kBallsBinsSchema = "matchlab.ballsbins/1";

struct FileRegion {
  std::string counties, foodbanks, distances;
};

struct RegionSource {
  std::variant<FileRegion, SyntheticSpec, CounterexampleSpec> source;
  bool repair_metric = false;
};

struct SamplingSpec {
  PopField field = PopField::fi_pop;
  std::optional<double> tilt;  // only with fi_pop
};

struct CoverageBands {
  double green_low = 0.8;
  double green_high = 1.25;
};

struct ExperimentConfig {
  RegionSource region;
  SamplingSpec sampling;
  WeightDistribution weights = WeightDistribution::unit();
  std::size_t m = 50000;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  std::vector<AlgorithmSpec> algorithms;
  std::string output = "out";
  CoverageBands bands;
  json raw;  // as parsed, for hashing and echoing
};

namespace config_detail {

inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

inline const json& require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + ": missing key '" + key + "'");
  return *it;
}

inline std::size_t positive_count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 1) throw ValidationError(where + " must be an integer >= 1");
  return j.get<std::size_t>();
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + " must be a number");
  return j.get<double>();
}

inline std::uint64_t seed_of(const json& j, const std::string& where) {
  if (j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0)) return j.get<std::uint64_t>();
  throw ValidationError(where + " must be a nonnegative integer");
}

/// Paths in a config are relative to the config file's directory.
inline std::string resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path.string();
  return (base / path).lexically_normal().string();
}

}  // namespace config_detail

inline WeightDistribution parse_weight_distribution(const json& j, const std::string& where = "weights") {
  using namespace config_detail;
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  const auto& type = require(j, "type", where);
  if (type == "unit") {
    check_keys(j, {"type"}, where);
    return WeightDistribution::unit();
  }
  if (type == "exponential") {
    check_keys(j, {"type", "mean"}, where);
    return WeightDistribution::exponential(number(require(j, "mean", where), where + ".mean"));
  }
  throw ValidationError(where + ": unknown weight type " + type.dump());
}

inline AlgorithmSpec parse_algorithm(const json& j, const std::string& where) {
  using namespace config_detail;
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  const auto& algo = require(j, "algo", where);
  AlgorithmSpec spec;
  if (algo == "two_choice") {
    check_keys(j, {"algo", "load_mode"}, where);
    spec.kind = Algorithm::two_choice;
    if (auto it = j.find("load_mode"); it != j.end()) {
      if (*it == "normalized")
        spec.load_mode = LoadMode::normalized;
      else if (*it == "raw")
        spec.load_mode = LoadMode::raw;
      else
        throw ValidationError(where + ".load_mode must be \"normalized\" or \"raw\"");
    }
  } else if (algo == "driver_optimal") {
    check_keys(j, {"algo"}, where);
    spec.kind = Algorithm::driver_optimal;
  } else if (algo == "greedy") {
    check_keys(j, {"algo"}, where);
    spec.kind = Algorithm::greedy;
  } else if (algo == "greedy_cutoff") {
    check_keys(j, {"algo", "c_miles"}, where);
    spec.kind = Algorithm::greedy_cutoff;
    const auto& c = require(j, "c_miles", where);
    if (c == "max")
      spec.cutoff_miles = kInf;
    else
      spec.cutoff_miles = number(c, where + ".c_miles");
    if (!(spec.cutoff_miles >= 0.0)) throw ValidationError(where + ".c_miles must be >= 0");
  } else {
    throw ValidationError(where + ": unknown algorithm " + algo.dump());
  }
  return spec;
}

inline RegionSource parse_region_source(const json& j, const std::filesystem::path& base) {
  using namespace config_detail;
  check_keys(j, {"files", "synthetic", "counterexample", "repair_metric"}, "region");
  RegionSource src;
  int kinds = static_cast<int>(j.contains("files")) + static_cast<int>(j.contains("synthetic")) +
              static_cast<int>(j.contains("counterexample"));
  if (kinds != 1) throw ValidationError("region: exactly one of files, synthetic, counterexample is required");
  if (auto it = j.find("repair_metric"); it != j.end()) {
    if (!it->is_boolean()) throw ValidationError("region.repair_metric must be a boolean");
    src.repair_metric = it->get<bool>();
  }
  if (auto it = j.find("files"); it != j.end()) {
    check_keys(*it, {"counties", "foodbanks", "distances"}, "region.files");
    FileRegion f;
    auto path = [&](const char* k) {
      const auto& v = require(*it, k, "region.files");
      if (!v.is_string()) throw ValidationError(std::string("region.files.") + k + " must be a string");
      auto p = resolve(v.get<std::string>(), base);
      if (!std::filesystem::exists(p)) throw ValidationError("region file does not exist: " + p);
      return p;
    };
    f.counties = path("counties");
    f.foodbanks = path("foodbanks");
    f.distances = path("distances");
    src.source = f;
  } else if (auto it = j.find("synthetic"); it != j.end()) {
    check_keys(*it, {"nodes", "foodbanks", "seed", "side_miles", "fi_min", "fi_max", "pop_factor_min",
                     "pop_factor_max"},
               "region.synthetic");
    SyntheticSpec s;
    s.nodes = positive_count(require(*it, "nodes", "region.synthetic"), "region.synthetic.nodes");
    s.foodbanks = positive_count(require(*it, "foodbanks", "region.synthetic"), "region.synthetic.foodbanks");
    if (it->contains("seed")) s.seed = seed_of((*it)["seed"], "region.synthetic.seed");
    if (it->contains("side_miles")) s.side_miles = number((*it)["side_miles"], "region.synthetic.side_miles");
    if (it->contains("fi_min")) s.fi_min = static_cast<std::int64_t>(positive_count((*it)["fi_min"], "region.synthetic.fi_min"));
    if (it->contains("fi_max")) s.fi_max = static_cast<std::int64_t>(positive_count((*it)["fi_max"], "region.synthetic.fi_max"));
    if (it->contains("pop_factor_min")) s.pop_factor_min = number((*it)["pop_factor_min"], "region.synthetic.pop_factor_min");
    if (it->contains("pop_factor_max")) s.pop_factor_max = number((*it)["pop_factor_max"], "region.synthetic.pop_factor_max");
    src.source = s;
  } else {
    const auto& c = j["counterexample"];
    check_keys(c, {"n", "delta"}, "region.counterexample");
    CounterexampleSpec s;
    if (c.contains("n")) s.n = positive_count(c["n"], "region.counterexample.n");
    if (c.contains("delta")) s.delta = number(c["delta"], "region.counterexample.delta");
    src.source = s;
  }
  return src;
}

inline Region load_region(const RegionSource& src) {
  RegionData data = std::visit(
      [](const auto& s) -> RegionData {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FileRegion>)
          return load_region_csv(s.counties, s.foodbanks, s.distances);
        else if constexpr (std::is_same_v<T, SyntheticSpec>)
          return euclidean_region(s);
        else
          return build_counterexample_data(s);
      },
      src.source);
  return Region::from(std::move(data), src.repair_metric);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path + " is not valid JSON: " + e.what());
  }
}

inline ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base = {}) {
  using namespace config_detail;
  check_keys(j, {"schema", "region", "sampling", "weights", "m", "runs", "seed", "algorithms", "output",
                 "coverage_bands", "a"},
             "config");
  const auto& schema = require(j, "schema", "config");
  if (schema != kExperimentSchema)
    throw ValidationError("config.schema must be \"" + std::string(kExperimentSchema) + "\"");
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.region = parse_region_source(require(j, "region", "config"), base);

  const auto& sampling = require(j, "sampling", "config");
  check_keys(sampling, {"field", "tilt"}, "sampling");
  const auto& field = require(sampling, "field", "sampling");
  if (field == "fi_pop")
    cfg.sampling.field = PopField::fi_pop;
  else if (field == "total_pop")
    cfg.sampling.field = PopField::total_pop;
  else
    throw ValidationError("sampling.field must be \"fi_pop\" or \"total_pop\"");
  if (sampling.contains("tilt")) {
    if (cfg.sampling.field != PopField::fi_pop) throw ValidationError("sampling.tilt requires field fi_pop");
    cfg.sampling.tilt = number(sampling["tilt"], "sampling.tilt");
    if (!(*cfg.sampling.tilt >= 0.0)) throw ValidationError("sampling.tilt must be >= 0");
  }

  cfg.weights = parse_weight_distribution(require(j, "weights", "config"));
  if (j.contains("m")) cfg.m = positive_count(j["m"], "config.m");
  if (j.contains("runs")) cfg.runs = positive_count(j["runs"], "config.runs");
  if (j.contains("seed")) cfg.seed = seed_of(j["seed"], "config.seed");
  const auto& algos = require(j, "algorithms", "config");
  if (!algos.is_array() || algos.empty()) throw ValidationError("config.algorithms must be a nonempty array");
  for (std::size_t i = 0; i < algos.size(); ++i)
    cfg.algorithms.push_back(parse_algorithm(algos[i], "algorithms[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i)
    for (std::size_t k = 0; k < i; ++k)
      if (cfg.algorithms[i].label() == cfg.algorithms[k].label())
        throw ValidationError("duplicate algorithm " + cfg.algorithms[i].label());
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ValidationError("config.output must be a string");
    cfg.output = resolve(j["output"].get<std::string>(), base);
  } else {
    cfg.output = resolve(cfg.output, base);
  }
  if (j.contains("coverage_bands")) {
    const auto& b = j["coverage_bands"];
    check_keys(b, {"green_low", "green_high"}, "coverage_bands");
    if (b.contains("green_low")) cfg.bands.green_low = number(b["green_low"], "coverage_bands.green_low");
    if (b.contains("green_high")) cfg.bands.green_high = number(b["green_high"], "coverage_bands.green_high");
    if (!(cfg.bands.green_low > 0.0 && cfg.bands.green_low <= 1.0 && cfg.bands.green_high >= 1.0))
      throw ValidationError("coverage_bands need 0 < green_low <= 1 <= green_high");
  }
  if (j.contains("a") && !(number(j["a"], "config.a") > 0.0)) throw ValidationError("config.a must be positive");
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_json_file(path), std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// balls-into-bins configs

struct DominanceSpec {
  std::optional<double> eps;  // nullopt = condition boundary f(alpha,beta) - 1
  std::size_t m = 8;
  std::size_t runs = 100000;
  double confidence = 0.999;
};

struct BallsBinsConfig {
  std::vector<std::int64_t> weights;
  std::optional<double> tilt;  // nullopt = proportional
  WeightDistribution balls = WeightDistribution::unit();
  double a = 0.05;
  std::size_t m = 100000;
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  std::size_t every = 0;               // 0: default max(1, m/1000)
  std::vector<std::size_t> schedule;   // explicit times, overrides `every`
  bool one_choice_ablation = false;
  std::optional<DominanceSpec> dominance;
  std::string output = "out";
  json raw;

  BinsConfig bins() const {
    return tilt ? BinsConfig::tilted(weights, *tilt, balls, a) : BinsConfig::proportional(weights, balls, a);
  }
  std::vector<std::size_t> sample_times() const {
    if (!schedule.empty()) return schedule;
    return matchlab::every(every > 0 ? every : std::max<std::size_t>(1, m / 1000), m);
  }
};

inline BallsBinsConfig parse_ballsbins_config(const json& j, const std::filesystem::path& base = {}) {
  using namespace config_detail;
  check_keys(j, {"schema", "bins", "m", "runs", "seed", "schedule", "one_choice_ablation", "dominance", "output"},
             "config");
  const auto& schema = require(j, "schema", "config");
  if (schema != kBallsBinsSchema)
    throw ValidationError("config.schema must be \"" + std::string(kBallsBinsSchema) + "\"");
  BallsBinsConfig cfg;
  cfg.raw = j;
  const auto& bins = require(j, "bins", "config");
  check_keys(bins, {"weights", "selection", "balls", "a"}, "bins");
  const auto& w = require(bins, "weights", "bins");
  if (!w.is_array() || w.empty()) throw ValidationError("bins.weights must be a nonempty array");
  for (const auto& x : w) cfg.weights.push_back(static_cast<std::int64_t>(positive_count(x, "bins.weights[]")));
  if (bins.contains("selection")) {
    const auto& s = bins["selection"];
    if (s == "proportional") {
    } else if (s.is_object()) {
      check_keys(s, {"tilt"}, "bins.selection");
      cfg.tilt = number(require(s, "tilt", "bins.selection"), "bins.selection.tilt");
      if (!(*cfg.tilt >= 0.0)) throw ValidationError("bins.selection.tilt must be >= 0");
    } else {
      throw ValidationError("bins.selection must be \"proportional\" or {\"tilt\": x}");
    }
  }
  if (bins.contains("balls")) cfg.balls = parse_weight_distribution(bins["balls"], "bins.balls");
  if (bins.contains("a")) {
    cfg.a = number(bins["a"], "bins.a");
    if (!(cfg.a > 0.0)) throw ValidationError("bins.a must be positive");
  }
  if (j.contains("m")) cfg.m = positive_count(j["m"], "config.m");
  if (j.contains("runs")) cfg.runs = positive_count(j["runs"], "config.runs");
  if (j.contains("seed")) cfg.seed = seed_of(j["seed"], "config.seed");
  if (j.contains("schedule")) {
    const auto& s = j["schedule"];
    if (s.is_array()) {
      for (const auto& t : s) cfg.schedule.push_back(positive_count(t, "schedule[]"));
    } else if (s.is_object()) {
      check_keys(s, {"every"}, "schedule");
      cfg.every = positive_count(require(s, "every", "schedule"), "schedule.every");
    } else {
      throw ValidationError("schedule must be an array of times or {\"every\": k}");
    }
  }
  if (j.contains("one_choice_ablation")) {
    if (!j["one_choice_ablation"].is_boolean()) throw ValidationError("one_choice_ablation must be a boolean");
    cfg.one_choice_ablation = j["one_choice_ablation"].get<bool>();
  }
  if (j.contains("dominance")) {
    const auto& d = j["dominance"];
    check_keys(d, {"eps", "m", "runs", "confidence"}, "dominance");
    DominanceSpec ds;
    if (d.contains("eps") && d["eps"] != "boundary") ds.eps = number(d["eps"], "dominance.eps");
    if (d.contains("m")) ds.m = positive_count(d["m"], "dominance.m");
    if (d.contains("runs")) ds.runs = positive_count(d["runs"], "dominance.runs");
    if (d.contains("confidence")) {
      ds.confidence = number(d["confidence"], "dominance.confidence");
      if (!(ds.confidence > 0.0 && ds.confidence < 1.0)) throw ValidationError("dominance.confidence must be in (0,1)");
    }
    cfg.dominance = ds;
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ValidationError("config.output must be a string");
    cfg.output = resolve(j["output"].get<std::string>(), base);
  } else {
    cfg.output = resolve(cfg.output, base);
  }
  cfg.bins();  // validates weights/selection up front
  return cfg;
}

inline BallsBinsConfig load_ballsbins_config(const std::string& path) {
  return parse_ballsbins_config(read_json_file(path), std::filesystem::path(path).parent_path());
}

/// 64-bit fingerprint of a parsed config (keys are serialized sorted).
inline std::uint64_t config_hash(const json& j) {
  Fnv1a h;
  h.update(j.dump());
  return h.digest();
}

inline std::string hex64(std::uint64_t x) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[x & 0xF];
    x >>= 4;
  }
  return s;
}

}  // namespace matchlab

#endif  // MATCHLAB_CONFIG_HPP
