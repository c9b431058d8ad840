// Acceptance suite: one check per release criterion, each printing a
// single [PASS]/[FAIL] line. Returns a nonzero exit code if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "evco/admm.hpp"
#include "evco/commands.hpp"
#include "evco/feeder_solver.hpp"
#include "evco/oracles.hpp"
#include "evco/scenario.hpp"

using namespace evco;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, const std::string& detail) {
  if (detail.empty()) {
    std::printf("[PASS] C%02d %s\n", index, name.c_str());
  } else {
    std::printf("[FAIL] C%02d %s: %s\n", index, name.c_str(), detail.c_str());
    ++g_failures;
  }
  std::fflush(stdout);
}

void criterion(int index, const std::string& name, const std::function<std::string()>& body) {
  std::string detail;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    detail = body();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("       (%.1fs) ", secs);
  report(index, name, detail);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The fixed regression scenario: 1000 EVs, 20 feeders, one week. Capacity
// is tight enough that unmanaged charging overloads heavily while the
// coordinated optimum keeps a small but strictly positive violation.
GenConfig regression_config() {
  GenConfig cfg;
  cfg.n_evs = 1000;
  cfg.n_feeders = 20;
  cfg.horizon = 168;
  cfg.seed = 42;
  return cfg;
}

AdmmOptions regression_options() {
  AdmmOptions opts;
  opts.max_iter = 350;
  opts.gap_tol = 0.10;
  opts.certificate_period = 10;
  opts.threads = 4;
  return opts;
}

EvInstance instance_from_profile(const EvProfile& ev, double reg, std::mt19937_64& rng) {
  EvInstance inst;
  inst.variant = EvVariant::S1;
  inst.reg = reg;
  inst.bounds = derive_bounds(ev);
  inst.anchor.resize(ev.horizon());
  std::uniform_real_distribution<double> xi(-1.0, 2.0);
  for (int t = 0; t < ev.horizon(); ++t) {
    inst.anchor[t] = ev.p_min[t] + xi(rng) * (ev.p_max[t] - ev.p_min[t]);
  }
  return inst;
}

struct RegressionArtifacts {
  Scenario scenario;
  RunReport run_report;
  Grid baseline;
  bool ready = false;
};

RegressionArtifacts g_regression;

}  // namespace

int main() {
  criterion(1, "feasibility oracle equivalence (10k labeled instances)", []() -> std::string {
    const auto labeled = labeled_feasibility_instances(90210, 10000, 1, 12);
    for (size_t k = 0; k < labeled.size(); ++k) {
      const auto& li = labeled[k];
      const bool got = check_necessary(li.bounds) && is_feasible(li.bounds);
      if (got != li.feasible) {
        return "label mismatch at instance " + std::to_string(k) +
               (li.feasible ? " (feasible classified empty)" : " (empty classified feasible)");
      }
      std::vector<double> target(li.bounds.horizon(), 0.25);
      const auto proj = project_feasible(target, li.bounds);
      if (proj.has_value() != li.feasible) {
        return "projection emptiness mismatch at instance " + std::to_string(k);
      }
      if (proj && !satisfies_constraints(*proj, li.bounds, 1e-9)) {
        return "projected profile violates constraints at instance " + std::to_string(k);
      }
    }
    return "";
  });

  criterion(2, "projection identity and idempotence", []() -> std::string {
    const auto labeled = labeled_feasibility_instances(555, 3000, 1, 12);
    std::mt19937_64 rng(556);
    std::uniform_real_distribution<double> wild(-5.0, 5.0);
    int identities = 0, idempotents = 0;
    for (const auto& li : labeled) {
      if (li.feasible && identities < 1000) {
        const auto out = project_feasible(li.witness, li.bounds);
        if (!out.has_value()) return "witness projection reported empty";
        if (*out != li.witness) return "projection moved an already-feasible target";
        ++identities;
      } else if (!li.feasible) {
        continue;
      }
      if (idempotents < 1000) {
        std::vector<double> target(li.bounds.horizon());
        for (double& x : target) x = wild(rng);
        const auto once = project_feasible(target, li.bounds);
        if (!once.has_value()) return "feasible instance reported empty";
        const auto twice = project_feasible(*once, li.bounds);
        if (!twice.has_value() || *twice != *once) return "projection is not exactly idempotent";
        ++idempotents;
      }
    }
    if (identities < 1000 || idempotents < 1000) return "insufficient instances generated";
    return "";
  });

  criterion(3, "batched S1 certified accuracy at horizon 168", []() -> std::string {
    GenConfig cfg;
    cfg.n_evs = 10000;
    cfg.n_feeders = 20;
    cfg.horizon = 168;
    cfg.seed = 20250810;
    const Scenario sc = generate_scenario(cfg);
    std::mt19937_64 rng(8192);
    std::vector<EvInstance> instances;
    instances.reserve(8192);
    for (int i = 0; i < sc.ev_count() && instances.size() < 8192; ++i) {
      double weekly = 0.0;
      for (double d : sc.profiles[i].demand) weekly += d;
      if (weekly > 60.0) instances.push_back(instance_from_profile(sc.profiles[i], 1e-3, rng));
    }
    if (instances.size() < 8192) {
      return "eligible population too small: " + std::to_string(instances.size());
    }
    SolveBatchOptions opts;
    opts.tol = 0.01;
    opts.max_iter = 200;
    opts.mask_period = 20;
    opts.threads = 4;
    const auto results = solve_batch(instances, opts);
    int by100 = 0, by200 = 0;
    for (size_t k = 0; k < results.size(); ++k) {
      if (results[k].gap < -1e-12) return "invalid certificate: negative gap";
      if (results[k].best_dual_value >
          results[k].primal_value + 1e-10 * std::max(1.0, std::abs(results[k].primal_value))) {
        return "invalid certificate: psi above Phi at instance " + std::to_string(k);
      }
      if (results[k].converged && results[k].iterations <= 100) ++by100;
      if (results[k].converged && results[k].iterations <= 200) ++by200;
    }
    const double f100 = by100 / 8192.0, f200 = by200 / 8192.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "gap<=1%% for %.2f%% by 100 iters, %.2f%% by 200", 100 * f100,
                  100 * f200);
    std::printf("       %s\n", buf);
    if (f100 < 0.95) return std::string("below 95% by iteration 100: ") + buf;
    if (f200 < 0.98) return std::string("below 98% by iteration 200: ") + buf;
    return "";
  });

  criterion(4, "S1 solver matches the certified oracle", []() -> std::string {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> xi(-1.0, 2.0);
    for (int rep = 0; rep < 500; ++rep) {
      const int t_len = 1 + static_cast<int>(rng() % 8);
      std::vector<double> p_lo(t_len, 0.0), p_hi(t_len), s_lo(t_len), s_hi(t_len);
      double acc = 0.0;
      for (int t = 0; t < t_len; ++t) {
        p_hi[t] = 0.5 + 9.5 * unif(rng);
        acc += p_hi[t] * unif(rng);
        s_lo[t] = acc - 1.0 - 4.0 * unif(rng);
        s_hi[t] = acc + 1.0 + 4.0 * unif(rng);
      }
      EvInstance inst;
      inst.variant = EvVariant::S1;
      inst.reg = 1e-3;
      inst.bounds = bounds_from_cumulative(p_lo, p_hi, s_lo, s_hi);
      inst.anchor.resize(t_len);
      for (int t = 0; t < t_len; ++t) inst.anchor[t] = xi(rng) * p_hi[t];

      const auto ref = oracle_s1(inst, 1e-6);
      SolveBatchOptions opts;
      opts.tol = 1e-8;
      opts.max_iter = 4000;
      opts.threads = 1;
      const auto got = solve_batch({inst}, opts);
      for (int t = 0; t < t_len; ++t) {
        if (std::abs(got[0].p[t] - ref.p[t]) > 1e-3) {
          return "instance " + std::to_string(rep) + ": |dp| = " +
                 std::to_string(std::abs(got[0].p[t] - ref.p[t]));
        }
      }
    }
    return "";
  });

  criterion(5, "feeder solver exactness (10k instances, T=168)", []() -> std::string {
    std::mt19937_64 rng(1605);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 10000; ++rep) {
      const int t_len = 168;
      std::vector<double> target(t_len), cap(t_len);
      for (int t = 0; t < t_len; ++t) {
        target[t] = 3.0 * unif(rng) - 0.5;
        cap[t] = 1.5 * unif(rng);
      }
      const double rho_over_i = 1e-3 * std::pow(10.0, 3.0 * unif(rng));
      const auto sol = solve_s2(target, cap, rho_over_i);
      if (sol.v < 0.0) return "negative violation level";
      if (sol.xi0 < -1e-10) return "negative xi0";
      double xi_sum = sol.xi0;
      for (int t = 0; t < t_len; ++t) {
        if (sol.load[t] - cap[t] > sol.v + 1e-10) return "primal infeasibility";
        if (sol.xi[t] < -1e-10) return "negative xi";
        xi_sum += sol.xi[t];
        if (std::abs(rho_over_i * (sol.load[t] - target[t]) + sol.xi[t]) > 1e-10) {
          return "load stationarity violated";
        }
        if (std::abs(sol.xi[t] * (sol.load[t] - cap[t] - sol.v)) > 1e-10) {
          return "load complementarity violated";
        }
      }
      if (std::abs(xi_sum - 1.0) > 1e-10) return "v stationarity violated";
      if (std::abs(sol.xi0 * sol.v) > 1e-10) return "v complementarity violated";
      const double v_ref = oracle_s2(target, cap, rho_over_i, 1e-10);
      if (std::abs(sol.v - v_ref) > 1e-7) {
        return "oracle deviation " + std::to_string(std::abs(sol.v - v_ref));
      }
    }
    return "";
  });

  criterion(6, "grid dual evaluation exactness and boundaries", []() -> std::string {
    std::mt19937_64 rng(1606);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 10000; ++rep) {
      const int t_len = 1 + static_cast<int>(rng() % 24);
      std::vector<double> price(t_len), cap(t_len);
      double sum = 0.0, min_p = 0.0, dot = 0.0;
      for (int t = 0; t < t_len; ++t) {
        price[t] = (unif(rng) < 0.05) ? -0.3 * unif(rng) : (1.8 / t_len) * unif(rng);
        cap[t] = 4.0 * unif(rng);
        sum += price[t];
        min_p = std::min(min_p, price[t]);
        dot += price[t] * cap[t];
      }
      const auto v = solve_d2(price, cap);
      const bool expect_finite = !(sum > 1.0 || min_p < 0.0);
      if (v.finite != expect_finite) return "case classification mismatch";
      if (v.finite) {
        if (std::abs(v.value + dot) > 1e-12 * std::max(1.0, std::abs(dot))) {
          return "finite value mismatch";
        }
        // Feasible-point sampling never beats the reported optimum.
        for (int draw = 0; draw < 20; ++draw) {
          const double vs = 2.0 * unif(rng);
          double obj = vs;
          for (int t = 0; t < t_len; ++t) {
            obj -= price[t] * (cap[t] + vs - 3.0 * unif(rng));
          }
          if (obj < v.value - 1e-9) return "sampled point beat the reported optimum";
        }
      }
    }
    // Exact boundary triplet.
    const std::vector<double> cap2{1.0, 2.0};
    if (!solve_d2(std::vector<double>{0.5, 0.5}, cap2).finite) return "sum==1 misclassified";
    if (solve_d2(std::vector<double>{0.5, 0.5 + 1e-9}, cap2).finite) {
      return "sum==1+1e-9 misclassified";
    }
    if (!solve_d2(std::vector<double>{0.5, 0.5 - 1e-9}, cap2).finite) {
      return "sum==1-1e-9 misclassified";
    }
    return "";
  });

  criterion(7, "prefix operator norm closed form", []() -> std::string {
    for (int t_len : {1, 2, 7, 24, 168}) {
      const double closed = 0.5 * lipschitz_constant(t_len, EvVariant::D1, 1.0);
      const double power = prefix_operator_norm_sq_power_iteration(t_len, 1e-10);
      if (std::abs(closed - power) > 1e-6 * power) {
        return "power-iteration mismatch at T=" + std::to_string(t_len);
      }
    }
    const double h168 = 0.5 * lipschitz_constant(168, EvVariant::D1, 1.0);
    const double approx = 0.405 * 168.0 * 168.0;
    if (std::abs(h168 - approx) > 0.01 * approx) return "quadratic approximation off by >1%";
    return "";
  });

  criterion(8, "sharing reduction equivalence on 20 micro instances", []() -> std::string {
    std::mt19937_64 seeder(88);
    for (int rep = 0; rep < 20; ++rep) {
      std::mt19937_64 rng(seeder());
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      const int n = 1 + static_cast<int>(rng() % 4);
      const int t_len = 1 + static_cast<int>(rng() % 4);
      const int n_feeders = 1 + static_cast<int>(rng() % 2);
      Scenario sc;
      sc.unit_scale = 1.0;
      sc.location = LocationMap(n, t_len, LocationMap::kAway);
      for (int i = 0; i < n; ++i) {
        EvProfile ev;
        ev.id = "m" + std::to_string(i);
        ev.p_min.assign(t_len, 0.0);
        ev.p_max.assign(t_len, 0.0);
        ev.e_min.assign(t_len, 0.0);
        ev.e_max.assign(t_len, 8.0);
        ev.demand.assign(t_len, 0.0);
        ev.e_init = 4.0;
        for (int t = 0; t < t_len; ++t) {
          if (unif(rng) < 0.85) {
            sc.location.at(i, t) = static_cast<int32_t>(rng() % n_feeders);
            ev.p_max[t] = 1.0 + 3.0 * unif(rng);
          }
        }
        double chargeable = 0.0;
        for (double pm : ev.p_max) chargeable += pm;
        ev.e_min[t_len - 1] = 4.0 + 0.5 * chargeable * unif(rng);
        if (ev.e_min[t_len - 1] > ev.e_max[t_len - 1]) ev.e_min[t_len - 1] = ev.e_max[t_len - 1];
        sc.profiles.push_back(std::move(ev));
      }
      sc.feeders.capacity = Grid(n_feeders, t_len, 0.0);
      for (int s = 0; s < n_feeders; ++s) {
        sc.feeders.ids.push_back(std::to_string(s));
        for (int t = 0; t < t_len; ++t) sc.feeders.capacity(s, t) = 0.5 + 2.0 * unif(rng);
      }

      AdmmOptions opts;
      opts.s1.optimizer = Optimizer::PGA;
      opts.s1.tol = 0.0;
      opts.s1.max_iter = 300;
      opts.s1.masking = false;
      opts.s1.warm_start = false;
      opts.s1.threads = 1;

      const int iters = 50;
      const auto dense = dense_admm_small(sc, opts, iters);
      auto state = init_state(sc, opts);
      for (int k = 0; k < iters; ++k) {
        step(state, sc, opts);
        for (size_t c = 0; c < state.p.data.size(); ++c) {
          if (std::abs(dense.p[k].data[c] - state.p.data[c]) > 1e-9) {
            return "primal mismatch (instance " + std::to_string(rep) + ", iter " +
                   std::to_string(k) + ")";
          }
        }
        for (size_t c = 0; c < state.l.data.size(); ++c) {
          if (std::abs(dense.z_bar[k].data[c] * n - state.l.data[c]) > 1e-9) {
            return "consensus variable mismatch (instance " + std::to_string(rep) + ")";
          }
        }
        if (dense.mu_consensus_spread[k] > 1e-9) {
          return "per-EV duals diverged (instance " + std::to_string(rep) + ")";
        }
        for (size_t c = 0; c < state.mu.data.size(); ++c) {
          if (std::abs(dense.mu_i[k][0].data[c] - state.mu.data[c]) > 1e-9) {
            return "dual mismatch (instance " + std::to_string(rep) + ")";
          }
        }
      }
    }
    return "";
  });

  criterion(9, "regression scenario reaches a 10% certified gap", []() -> std::string {
    g_regression.scenario = generate_scenario(regression_config());
    const AdmmOptions opts = regression_options();
    g_regression.run_report = run(g_regression.scenario, opts);
    g_regression.baseline = asap_plus(g_regression.scenario);
    g_regression.ready = true;

    const RunReport& rep = g_regression.run_report;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "iters=%d stop=%s grid=%.4f MW gap=%s", rep.state.iter,
                  rep.stop_reason.c_str(), rep.grid_cost_final,
                  rep.certificate.rel_gap.has_value()
                      ? std::to_string(*rep.certificate.rel_gap).c_str()
                      : "unavailable");
    std::printf("       %s\n", buf);

    if (!rep.certificate.rel_gap.has_value()) return "certificate unavailable at termination";
    if (*rep.certificate.rel_gap > 0.10) {
      return "relative gap " + std::to_string(*rep.certificate.rel_gap) + " above 10%";
    }
    // Weak duality at every evaluated certificate.
    for (const auto& tr : rep.state.trace) {
      if (!std::isnan(tr.rel_gap) && !std::isnan(tr.dual_bound)) {
        if (tr.dual_bound > tr.primal_objective + 1e-8 * std::max(1.0, std::abs(tr.primal_objective))) {
          return "weak duality violated at iteration " + std::to_string(tr.iter);
        }
      }
    }
    // Windowed minimum of the aggregate violation is nonincreasing after
    // iteration 50 (window = 50 iterations).
    const auto& trace = rep.state.trace;
    const int window = 50;
    double prev_min = 1e300;
    for (size_t start = 50; start + window <= trace.size(); ++start) {
      double w_min = 1e300;
      for (size_t k = start; k < start + window; ++k) {
        w_min = std::min(w_min, trace[k].grid_cost_hat);
      }
      if (w_min > prev_min + 1e-9) {
        return "windowed min increased at window starting " + std::to_string(start);
      }
      prev_min = std::min(prev_min, w_min);
    }
    return "";
  });

  criterion(10, "coordination beats the unmanaged baseline", []() -> std::string {
    if (!g_regression.ready) return "regression run unavailable";
    const Scenario& sc = g_regression.scenario;
    const Grid base_load =
        aggregate_load(g_regression.baseline, sc.location, sc.feeder_count(), sc.unit_scale);
    const auto base_metrics = metrics(base_load, sc.feeders.capacity, 0.1);
    const auto mac_metrics =
        metrics(g_regression.run_report.state.hat_l, sc.feeders.capacity, 0.1);
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "violation: mac=%.4f asap=%.4f MW; pvr_load: mac=%s asap=%s",
                  mac_metrics.total_max_violation, base_metrics.total_max_violation,
                  mac_metrics.pvr_load ? std::to_string(*mac_metrics.pvr_load).c_str() : "n/a",
                  base_metrics.pvr_load ? std::to_string(*base_metrics.pvr_load).c_str() : "n/a");
    std::printf("       %s\n", buf);
    if (base_metrics.total_max_violation <= 0.0) return "baseline has no violations to reduce";
    if (mac_metrics.total_max_violation > 0.10 * base_metrics.total_max_violation) {
      return "violation ratio above 10%";
    }
    if (!mac_metrics.pvr_load.has_value() || !base_metrics.pvr_load.has_value()) {
      return "load PVR unavailable";
    }
    if (*mac_metrics.pvr_load > 0.25 * *base_metrics.pvr_load) {
      return "PVR ratio above 0.25";
    }
    return "";
  });

  criterion(11, "decentralized best responses track the central solution", []() -> std::string {
    if (!g_regression.ready) return "regression run unavailable";
    const Scenario& sc = g_regression.scenario;
    const AdmmOptions opts = regression_options();
    Grid lambda(sc.feeder_count(), sc.horizon(), 0.0);
    for (size_t k = 0; k < lambda.data.size(); ++k) {
      lambda.data[k] = opts.rho * g_regression.run_report.state.mu.data[k];
    }
    const auto resp = decentralized_response(lambda, sc, opts);
    const double central = g_regression.run_report.grid_cost_final;
    const double rel = std::abs(resp.cost - central) / std::max(central, 1e-12);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "decentralized=%.4f central=%.4f MW (rel %.3f)", resp.cost,
                  central, rel);
    std::printf("       %s\n", buf);
    if (central <= 0.0) return "central violation is zero; relative comparison undefined";
    if (rel > 0.25) return "relative deviation above 25%";
    return "";
  });

  criterion(12, "masking neutrality on 1000 instances", []() -> std::string {
    std::mt19937_64 rng(1212);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> xi(-1.0, 2.0);
    std::vector<EvInstance> instances;
    for (int rep = 0; rep < 1000; ++rep) {
      const int t_len = 1 + static_cast<int>(rng() % 24);
      std::vector<double> p_lo(t_len, 0.0), p_hi(t_len), s_lo(t_len), s_hi(t_len);
      double acc = 0.0;
      for (int t = 0; t < t_len; ++t) {
        p_hi[t] = 0.5 + 9.5 * unif(rng);
        acc += p_hi[t] * unif(rng);
        s_lo[t] = acc - 1.0 - 4.0 * unif(rng);
        s_hi[t] = acc + 1.0 + 4.0 * unif(rng);
      }
      EvInstance inst;
      inst.variant = EvVariant::S1;
      inst.reg = 1e-3;
      inst.bounds = bounds_from_cumulative(p_lo, p_hi, s_lo, s_hi);
      inst.anchor.resize(t_len);
      for (int t = 0; t < t_len; ++t) inst.anchor[t] = xi(rng) * p_hi[t];
      instances.push_back(std::move(inst));
    }
    SolveBatchOptions with;
    with.threads = 4;
    with.max_iter = 120;
    SolveBatchOptions without = with;
    without.masking = false;
    long inner_with = 0, inner_without = 0;
    const auto a = solve_batch(instances, with, nullptr, &inner_with);
    const auto b = solve_batch(instances, without, nullptr, &inner_without);
    bool any_early = false;
    for (size_t k = 0; k < instances.size(); ++k) {
      if (a[k].iterations != b[k].iterations || a[k].converged != b[k].converged) {
        return "termination mismatch at instance " + std::to_string(k);
      }
      if (std::abs(a[k].gap - b[k].gap) > 1e-9) return "gap mismatch";
      for (size_t t = 0; t < a[k].p.size(); ++t) {
        if (std::abs(a[k].p[t] - b[k].p[t]) > 1e-9) return "profile mismatch";
      }
      any_early |= a[k].converged && a[k].iterations < with.max_iter;
    }
    if (!any_early) return "no instance converged early; test vacuous";
    if (inner_with >= inner_without) return "masking failed to reduce inner iterations";
    return "";
  });

  criterion(13, "solve runs are byte-identical for a fixed seed", []() -> std::string {
    const fs::path base = fs::temp_directory_path() / "evco_acceptance_det";
    fs::remove_all(base);
    fs::create_directories(base);
    GenConfig cfg;
    cfg.n_evs = 200;
    cfg.n_feeders = 6;
    cfg.horizon = 72;
    cfg.seed = 4242;
    std::ostringstream log;
    if (cli::run_generate(cfg, base / "scenario", log) != cli::kExitOk) {
      return "scenario generation failed";
    }
    cli::SolveArgs args;
    args.scenario_dir = base / "scenario";
    args.options.max_iter = 60;
    args.options.certificate_period = 10;
    args.options.threads = 3;
    args.options.seed = 7;
    args.out_dir = base / "run_a";
    if (cli::run_solve(args, log) != cli::kExitOk) return "first solve failed";
    args.out_dir = base / "run_b";
    if (cli::run_solve(args, log) != cli::kExitOk) return "second solve failed";
    if (slurp(base / "run_a" / "report.json") != slurp(base / "run_b" / "report.json")) {
      return "reports differ";
    }
    if (slurp(base / "run_a" / "schedule.csv") != slurp(base / "run_b" / "schedule.csv")) {
      return "schedules differ";
    }
    return "";
  });

  if (g_failures == 0) {
    std::printf("acceptance: all 13 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}
