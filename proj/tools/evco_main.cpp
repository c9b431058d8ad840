#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "evco/commands.hpp"

// evco: coordinated EV charging scheduler.
//
//   evco generate  --out DIR [--seed N] [generator knobs | --config FILE]
//   evco solve     --scenario DIR --out DIR [solver knobs]
//   evco baseline  --scenario DIR --out DIR
//   evco compare   --run-a report.json --run-b report.json --out PATH
//   evco selftest  [--level quick|full]
//
// Config files are INI-style key=value with one section per subcommand;
// command-line flags override file values. EVCO_LOG=quiet silences
// progress output (errors still print).

namespace {

struct NullBuf : std::streambuf {
  int overflow(int c) override { return c; }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordinated EV charging scheduler"};
  app.set_config("--config", "", "INI config file with [generate]/[solve] sections");
  app.require_subcommand(1);

  NullBuf null_buf;
  std::ostream null_stream(&null_buf);
  const char* log_env = std::getenv("EVCO_LOG");
  const bool quiet = log_env != nullptr && std::string(log_env) == "quiet";
  std::ostream& log = quiet ? null_stream : std::cerr;

  evco::GenConfig gen;
  std::string gen_out;
  auto* cmd_gen = app.add_subcommand("generate", "write a synthetic scenario as CSV files");
  cmd_gen->add_option("--out", gen_out, "output directory")->required();
  cmd_gen->add_option("--seed", gen.seed, "RNG seed");
  cmd_gen->add_option("--n-evs", gen.n_evs, "number of EVs");
  cmd_gen->add_option("--n-feeders", gen.n_feeders, "number of feeders");
  cmd_gen->add_option("--horizon", gen.horizon, "number of hourly slots");
  cmd_gen->add_option("--charger-kw", gen.charger_kw, "charger power at stays");
  cmd_gen->add_option("--battery-kwh-min", gen.battery_kwh_min, "");
  cmd_gen->add_option("--battery-kwh-max", gen.battery_kwh_max, "");
  cmd_gen->add_option("--soc-init-min", gen.soc_init_min, "");
  cmd_gen->add_option("--soc-init-max", gen.soc_init_max, "");
  cmd_gen->add_option("--commuter-prob", gen.commuter_prob, "");
  cmd_gen->add_option("--extra-trip-prob", gen.extra_trip_prob, "");
  cmd_gen->add_option("--weekend-trip-prob", gen.weekend_trip_prob, "");
  cmd_gen->add_option("--night-owl-prob", gen.night_owl_prob, "");
  cmd_gen->add_option("--trip-energy-kwh-min", gen.trip_energy_kwh_min, "");
  cmd_gen->add_option("--trip-energy-kwh-max", gen.trip_energy_kwh_max, "");
  cmd_gen->add_option("--trip-slots-min", gen.trip_slots_min, "");
  cmd_gen->add_option("--trip-slots-max", gen.trip_slots_max, "");
  cmd_gen->add_option("--work-weight-alpha", gen.work_weight_alpha, "");
  cmd_gen->add_option("--home-weight-alpha", gen.home_weight_alpha, "");
  cmd_gen->add_option("--capacity-base-mw", gen.capacity_base_mw, "");
  cmd_gen->add_option("--capacity-day-factor", gen.capacity_day_factor, "");
  cmd_gen->add_option("--capacity-night-factor", gen.capacity_night_factor, "");
  cmd_gen->add_option("--feeder-spread", gen.feeder_spread, "");

  evco::cli::SolveArgs solve;
  std::string solve_scenario, solve_out, s1_optimizer = "adam";
  auto* cmd_solve = app.add_subcommand("solve", "run the coordinated schedule optimizer");
  cmd_solve->add_option("--scenario", solve_scenario, "scenario directory")->required();
  cmd_solve->add_option("--out", solve_out, "output directory")->required();
  cmd_solve->add_option("--rho", solve.options.rho, "consensus penalty");
  cmd_solve->add_option("--kappa-rho", solve.options.kappa_rho, "EV subproblem regularizer");
  cmd_solve->add_option("--gap-tol", solve.options.gap_tol, "relative gap stopping tolerance");
  cmd_solve->add_option("--max-iter", solve.options.max_iter, "outer iteration cap");
  cmd_solve->add_option("--threads", solve.options.threads, "worker threads (0 = hardware)");
  cmd_solve->add_option("--certificate-period", solve.options.certificate_period,
                        "iterations between certificates");
  cmd_solve->add_option("--seed", solve.options.seed, "recorded in the report");
  cmd_solve->add_option("--eps-abs", solve.options.eps_abs, "residual absolute tolerance");
  cmd_solve->add_option("--eps-rel", solve.options.eps_rel, "residual relative tolerance");
  cmd_solve->add_option("--s1-tol", solve.options.s1.tol, "inner duality-gap tolerance");
  cmd_solve->add_option("--s1-max-iter", solve.options.s1.max_iter, "inner iteration cap");
  cmd_solve->add_option("--s1-optimizer", s1_optimizer, "adam or pga");
  cmd_solve->add_flag("--no-warm-start", [&solve](int64_t) { solve.options.s1.warm_start = false; },
                      "cold-start the inner duals every iteration");
  cmd_solve->add_flag("--no-price-projection",
                      [&solve](int64_t) { solve.options.project_prices = false; },
                      "report the dual bound only when the raw price is valid");
  cmd_solve->add_option("--violation-threshold-mw", solve.violation_threshold_mw,
                        "feeder counting threshold");

  evco::cli::BaselineArgs base;
  std::string base_scenario, base_out;
  auto* cmd_base = app.add_subcommand("baseline", "run the unmanaged charging baseline");
  cmd_base->add_option("--scenario", base_scenario, "scenario directory")->required();
  cmd_base->add_option("--out", base_out, "output directory")->required();
  cmd_base->add_option("--violation-threshold-mw", base.violation_threshold_mw,
                       "feeder counting threshold");

  std::string cmp_a, cmp_b, cmp_out;
  auto* cmd_cmp = app.add_subcommand("compare", "compare two run reports");
  cmd_cmp->add_option("--run-a", cmp_a, "first report.json")->required();
  cmd_cmp->add_option("--run-b", cmp_b, "second report.json")->required();
  cmd_cmp->add_option("--out", cmp_out, "comparison output path")->required();

  std::string st_level = "quick";
  int st_threads = 0;
  auto* cmd_st = app.add_subcommand("selftest", "run the built-in verification suite");
  cmd_st->add_option("--level", st_level, "quick or full");
  cmd_st->add_option("--threads", st_threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_gen->parsed()) {
      return evco::cli::run_generate(gen, gen_out, log);
    }
    if (cmd_solve->parsed()) {
      if (s1_optimizer == "pga") {
        solve.options.s1.optimizer = evco::Optimizer::PGA;
      } else if (s1_optimizer != "adam") {
        log << "error: --s1-optimizer must be adam or pga\n";
        return evco::cli::kExitValidation;
      }
      solve.scenario_dir = solve_scenario;
      solve.out_dir = solve_out;
      return evco::cli::run_solve(solve, log);
    }
    if (cmd_base->parsed()) {
      base.scenario_dir = base_scenario;
      base.out_dir = base_out;
      return evco::cli::run_baseline(base, log);
    }
    if (cmd_cmp->parsed()) {
      return evco::cli::run_compare(cmp_a, cmp_b, cmp_out, std::cout);
    }
    if (cmd_st->parsed()) {
      return evco::cli::run_selftest(st_level, st_threads, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return evco::cli::kExitValidation;
  }
  return evco::cli::kExitOk;
}
