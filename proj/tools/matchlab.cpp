// matchlab command-line driver.
//
// Exit codes: 0 success, 2 validation failure, 1 any other error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "matchlab/config.hpp"
#include "matchlab/geo.hpp"
#include "matchlab/harness.hpp"
#include "matchlab/lowerbound.hpp"

namespace {

using namespace matchlab;

int validate_cmd(const std::string& config_path) {
  const auto cfg = load_experiment_config(config_path);
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
      cfg.region.source);
  if (cfg.region.repair_metric) {
    Region region = Region::from(std::move(data), true);
    const auto& rep = region.repair();
    std::cout << "repaired metric: " << rep.cells_changed << " cells changed, max reduction "
              << format_real(rep.max_reduction) << "\n";
    std::cout << "ok: " << region.size() << " nodes, " << region.bank_count() << " food banks\n";
    return 0;
  }
  const auto report = validate_region(data);
  if (!report.ok()) {
    for (const auto& line : report.lines()) std::cerr << line << "\n";
    return 2;
  }
  std::cout << "ok: " << data.nodes.size() << " nodes, " << data.foodbanks.size() << " food banks\n";
  return 0;
}

int run_cmd(const std::string& config_path) {
  const auto cfg = load_experiment_config(config_path);
  const auto bundle = run_experiment(cfg);
  write_bundle(bundle, cfg.output);
  emit_figure_data(bundle, cfg.output);
  for (const auto& a : bundle.algorithms) {
    const auto g = aggregate(a.runs);
    std::cout << a.spec.label() << ": max_menvy=" << format_real(g.max_menvy)
              << " mean_menvy=" << format_real(g.mean_menvy) << " max_reldist=" << format_real(g.max_reldist)
              << " mean_reldist=" << format_real(g.mean_reldist) << "\n";
  }
  std::cout << "wrote " << cfg.output << "\n";
  return 0;
}

int sweep_cmd(const std::string& config_path, const std::string& cutoffs) {
  const auto cfg = load_experiment_config(config_path);
  const auto sweep = sweep_cutoff(cfg, parse_cutoff_list(cutoffs));
  const std::filesystem::path out(cfg.output);
  write_pareto_csv(sweep.points, out / "pareto.csv");
  write_bundle(sweep.bundle, out);
  for (const auto& p : sweep.points)
    std::cout << "c=" << p.c << " max_menvy=" << format_real(p.max_menvy) << " max_reldist=" << format_real(p.max_reldist)
              << "\n";
  return 0;
}

int ballsbins_cmd(const std::string& config_path) {
  const auto cfg = load_ballsbins_config(config_path);
  const auto outcome = run_ballsbins(cfg);
  write_ballsbins(outcome, cfg.output);
  std::vector<double> gaps;
  for (const auto& r : outcome.two_choice) gaps.push_back(r.gaps.back().gap);
  std::cout << "median final gap: " << format_real(median(gaps)) << "\n";
  if (outcome.dominance) {
    const auto& d = *outcome.dominance;
    if (!d.warning.empty()) std::cerr << "warning: " << d.warning << "\n";
    std::cout << "dominance: violation=" << format_real(d.max_violation) << " band=" << format_real(d.band)
              << (d.dominance_holds ? " holds" : " FAILS") << "\n";
  }
  return 0;
}

int alphabeta_cmd(const std::string& config_path) {
  const auto cfg = load_experiment_config(config_path);
  std::cout << alphabeta_report(load_region(cfg.region)).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matchlab: two-choice donation matching experiments"};
  app.set_version_flag("--version", std::string(matchlab::kVersion));
  app.require_subcommand(1);

  std::string config;
  auto* validate = app.add_subcommand("validate", "check a config and its region");
  validate->add_option("--config", config, "experiment config (JSON)")->required();

  auto* run = app.add_subcommand("run", "run every configured algorithm");
  run->add_option("--config", config, "experiment config (JSON)")->required();

  std::string cutoffs = "0,10,20,30,40,50,60,70,80,90,100,120,140,160,180,200,max";
  auto* sweep = app.add_subcommand("sweep-cutoff", "greedy-with-cutoff sweep plus two-choice");
  sweep->add_option("--config", config, "experiment config (JSON)")->required();
  sweep->add_option("--c", cutoffs, "comma-separated cutoffs in miles, 'max' for no cutoff");

  auto* bb = app.add_subcommand("ballsbins", "weighted balls-into-bins process");
  bb->add_option("--config", config, "ballsbins config (JSON)")->required();

  matchlab::CounterexampleSpec lb_spec;
  std::size_t lb_m = 100000, lb_runs = 100;
  std::uint64_t lb_seed = 1;
  std::string lb_out = "lowerbound_out";
  auto* lb = app.add_subcommand("lowerbound", "fairness/efficiency tradeoff on the hard instance");
  lb->add_option("--n", lb_spec.n, "populated nodes")->check(CLI::Range(2, 100000));
  lb->add_option("--delta", lb_spec.delta, "efficiency slack, in (0, 4)");
  lb->add_option("--m", lb_m, "donations per run");
  lb->add_option("--runs", lb_runs, "runs");
  lb->add_option("--seed", lb_seed, "base seed");
  lb->add_option("--out", lb_out, "output directory");

  auto* ab = app.add_subcommand("alphabeta", "alpha, beta and f(alpha, beta) of a region");
  ab->add_option("--config", config, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*validate) return validate_cmd(config);
    if (*run) return run_cmd(config);
    if (*sweep) return sweep_cmd(config, cutoffs);
    if (*bb) return ballsbins_cmd(config);
    if (*ab) return alphabeta_cmd(config);
    if (*lb) {
      const auto rep = matchlab::tradeoff_experiment(lb_spec, lb_m, lb_runs, lb_seed);
      matchlab::write_tradeoff(rep, lb_out);
      std::cout << "wrote " << lb_out << "\n";
      return 0;
    }
  } catch (const matchlab::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
