#include "evco/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "evco/parallel.hpp"

namespace evco::cli {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

json options_json(const AdmmOptions& o) {
  json j;
  j["rho"] = o.rho;
  j["kappa_rho"] = o.kappa_rho;
  j["max_iter"] = o.max_iter;
  j["gap_tol"] = o.gap_tol;
  j["eps_abs"] = o.eps_abs;
  j["eps_rel"] = o.eps_rel;
  j["certificate_period"] = o.certificate_period;
  j["project_prices"] = o.project_prices;
  j["seed"] = o.seed;
  j["threads_requested"] = o.threads;
  j["threads_resolved"] = resolve_threads(o.threads);
  json s1;
  s1["optimizer"] = o.s1.optimizer == Optimizer::Adam ? "adam" : "pga";
  s1["eta"] = o.s1.adam.eta;
  s1["tol"] = o.s1.tol;
  s1["max_iter"] = o.s1.max_iter;
  s1["mask_period"] = o.s1.mask_period;
  s1["masking"] = o.s1.masking;
  s1["warm_start"] = o.s1.warm_start;
  j["s1"] = s1;
  json d1;
  d1["optimizer"] = o.d1.optimizer == Optimizer::Adam ? "adam" : "pga";
  d1["tol"] = o.d1.tol;
  d1["max_iter"] = o.d1.max_iter;
  d1["mask_period"] = o.d1.mask_period;
  j["d1"] = d1;
  return j;
}

json metrics_json(const MetricsReport& m) {
  json j{{"total_max_violation_mw", m.total_max_violation},
         {"feeders_over_threshold", m.feeders_over_threshold},
         {"threshold_mw", m.threshold},
         {"per_feeder_violation_mw", m.per_feeder_violation}};
  j["pvr_load"] = m.pvr_load.has_value() ? json(*m.pvr_load) : json(nullptr);
  j["pvr_overload"] = m.pvr_overload.has_value() ? json(*m.pvr_overload) : json(nullptr);
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructuralError("cannot write " + path.string());
  out << content;
}

void write_schedule(const std::filesystem::path& path, const Scenario& sc, const Grid& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructuralError("cannot write " + path.string());
  out << "ev_id,slot,kw\n";
  for (int i = 0; i < sc.ev_count(); ++i) {
    for (int t = 0; t < sc.horizon(); ++t) {
      out << sc.profiles[i].id << ',' << t << ',' << fmt17(p(i, t)) << '\n';
    }
  }
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open " + path.string());
  json j;
  in >> j;
  return j;
}

}  // namespace

std::string config_hash(const GenConfig& config) {
  uint64_t h = 1469598103934665603ULL;
  for (const std::string& line : describe_config(config)) {
    for (char c : line) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    h ^= static_cast<unsigned char>('\n');
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int run_generate(const GenConfig& config, const std::filesystem::path& out_dir,
                 std::ostream& log) {
  try {
    validate_config(config);
  } catch (const StructuralError& e) {
    log << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  try {
    const Scenario sc = generate_scenario(config);
    save_scenario(sc, out_dir);
    json manifest{{"schema", "evco.scenario_manifest/1"},
                  {"seed", config.seed},
                  {"config_hash", config_hash(config)},
                  {"n_evs", sc.ev_count()},
                  {"n_feeders", sc.feeder_count()},
                  {"horizon", sc.horizon()},
                  {"files", json::array({"evs.csv", "trajectory.csv", "feeders.csv"})}};
    json cfg;
    for (const std::string& line : describe_config(config)) {
      const auto pos = line.find('=');
      cfg[line.substr(0, pos)] = line.substr(pos + 1);
    }
    manifest["config"] = cfg;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    log << "generated " << sc.ev_count() << " EVs / " << sc.feeder_count() << " feeders / T="
        << sc.horizon() << " into " << out_dir.string() << "\n";
    return kExitOk;
  } catch (const StructuralError& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

int run_solve(const SolveArgs& args, std::ostream& log) {
  LoadResult loaded;
  try {
    loaded = load_scenario(args.scenario_dir);
  } catch (const StructuralError& e) {
    log << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  for (const auto& w : loaded.warnings) log << "warning: " << w << "\n";
  const Scenario& sc = loaded.scenario;

  const RunReport report = run(sc, args.options);
  const MetricsReport m =
      metrics(report.state.hat_l, sc.feeders.capacity, args.violation_threshold_mw);

  json trace = json::array();
  for (const TraceRecord& tr : report.state.trace) {
    json row{{"iter", tr.iter},
             {"grid_cost_hat_mw", tr.grid_cost_hat},
             {"grid_cost_consensus_mw", tr.grid_cost_consensus},
             {"primal_residual", tr.primal_residual},
             {"dual_residual", tr.dual_residual},
             {"residual_ok", tr.residual_ok}};
    row["rel_gap"] = number_or_null(tr.rel_gap);
    row["primal_objective"] = number_or_null(tr.primal_objective);
    row["dual_bound"] = number_or_null(tr.dual_bound);
    row["gap_projected"] = tr.gap_projected;
    row["decentralized_cost_mw"] = number_or_null(tr.decentralized_cost);
    trace.push_back(std::move(row));
  }

  json cert{{"primal", report.certificate.primal},
            {"projected", report.certificate.projected}};
  cert["dual"] =
      report.certificate.dual.has_value() ? json(*report.certificate.dual) : json(nullptr);
  cert["rel_gap"] =
      report.certificate.rel_gap.has_value() ? json(*report.certificate.rel_gap) : json(nullptr);
  cert["decentralized_cost_mw"] = number_or_null(report.certificate.decentralized_cost);

  json out{{"schema", "evco.run_report/1"},
           {"kind", "solve"},
           {"scenario",
            json{{"dir", args.scenario_dir.string()},
                 {"n_evs", sc.ev_count()},
                 {"n_feeders", sc.feeder_count()},
                 {"horizon", sc.horizon()},
                 {"dropped_evs", loaded.warnings.size()}}},
           {"options", options_json(args.options)},
           {"kappa_used", report.kappa_used},
           {"result",
            json{{"iterations", report.state.iter},
                 {"stop_reason", report.stop_reason},
                 {"primal_objective", report.primal_objective},
                 {"grid_cost_mw", report.grid_cost_final},
                 {"ev_cost", report.ev_cost_final},
                 {"certificate", cert}}},
           {"metrics", metrics_json(m)},
           {"trace", trace}};

  try {
    std::filesystem::create_directories(args.out_dir);
    write_text(args.out_dir / "report.json", out.dump(2) + "\n");
    write_schedule(args.out_dir / "schedule.csv", sc, report.state.p);
  } catch (const StructuralError& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  }
  log << "solve finished after " << report.state.iter << " iterations (" << report.stop_reason
      << "), grid cost " << report.grid_cost_final << " MW";
  if (report.certificate.rel_gap.has_value()) {
    log << ", certified gap " << *report.certificate.rel_gap;
  }
  log << "\n";
  return kExitOk;
}

int run_baseline(const BaselineArgs& args, std::ostream& log) {
  LoadResult loaded;
  try {
    loaded = load_scenario(args.scenario_dir);
  } catch (const StructuralError& e) {
    log << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  for (const auto& w : loaded.warnings) log << "warning: " << w << "\n";
  const Scenario& sc = loaded.scenario;

  const Grid schedules = asap_plus(sc);
  const Grid loads = aggregate_load(schedules, sc.location, sc.feeder_count(), sc.unit_scale);
  const MetricsReport m = metrics(loads, sc.feeders.capacity, args.violation_threshold_mw);

  json out{{"schema", "evco.run_report/1"},
           {"kind", "baseline"},
           {"scenario",
            json{{"dir", args.scenario_dir.string()},
                 {"n_evs", sc.ev_count()},
                 {"n_feeders", sc.feeder_count()},
                 {"horizon", sc.horizon()},
                 {"dropped_evs", loaded.warnings.size()}}},
           {"result", json{{"grid_cost_mw", m.total_max_violation}}},
           {"metrics", metrics_json(m)}};
  try {
    std::filesystem::create_directories(args.out_dir);
    write_text(args.out_dir / "report.json", out.dump(2) + "\n");
    write_schedule(args.out_dir / "schedule.csv", sc, schedules);
  } catch (const StructuralError& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  }
  log << "baseline total max-violation " << m.total_max_violation << " MW over "
      << m.feeders_over_threshold << " feeders above " << args.violation_threshold_mw << " MW\n";
  return kExitOk;
}

int run_compare(const std::filesystem::path& run_a, const std::filesystem::path& run_b,
                const std::filesystem::path& out_path, std::ostream& log) {
  json a, b;
  try {
    a = load_json(run_a);
    b = load_json(run_b);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  }
  json cmp{{"schema", "evco.compare/1"}};
  try {
    auto pick = [](const json& j) {
      const json& m = j.at("metrics");
      return json{{"kind", j.at("kind")},
                  {"total_max_violation_mw", m.at("total_max_violation_mw")},
                  {"feeders_over_threshold", m.at("feeders_over_threshold")},
                  {"pvr_load", m.at("pvr_load")},
                  {"pvr_overload", m.at("pvr_overload")}};
    };
    cmp["a"] = pick(a);
    cmp["b"] = pick(b);
    auto ratio = [](const json& x, const json& y) -> json {
      if (x.is_null() || y.is_null()) return nullptr;
      const double den = y.get<double>();
      if (den == 0.0) return nullptr;
      return x.get<double>() / den;
    };
    cmp["ratios"] = json{
        {"total_max_violation", ratio(cmp["a"]["total_max_violation_mw"],
                                      cmp["b"]["total_max_violation_mw"])},
        {"pvr_load", ratio(cmp["a"]["pvr_load"], cmp["b"]["pvr_load"])},
        {"pvr_overload", ratio(cmp["a"]["pvr_overload"], cmp["b"]["pvr_overload"])}};
  } catch (const json::exception& e) {
    log << "error: run report schema mismatch: " << e.what() << "\n";
    return kExitValidation;
  }
  try {
    if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
    write_text(out_path, cmp.dump(2) + "\n");
  } catch (const StructuralError& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  }
  log << cmp.dump(2) << "\n";
  return kExitOk;
}

}  // namespace evco::cli
