#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "evco/commands.hpp"
#include "evco/feeder_solver.hpp"
#include "evco/oracles.hpp"
#include "evco/parallel.hpp"

// Built-in verification suite: oracle cross-checks and invariant sweeps
// runnable from the shipped binary, so installations can be validated
// without the source tree.

namespace evco::cli {

namespace {

struct CheckRunner {
  std::ostream& log;
  int failures = 0;

  void run(const std::string& name, const std::function<std::string()>& body) {
    std::string detail;
    try {
      detail = body();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
      log << "[PASS] " << name << "\n";
    } else {
      log << "[FAIL] " << name << ": " << detail << "\n";
      ++failures;
    }
  }
};

EvInstance random_s1_instance(std::mt19937_64& rng, int t_len) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> p_lo(t_len), p_hi(t_len), s_lo(t_len), s_hi(t_len), w(t_len);
  double prefix = 0.0;
  for (int t = 0; t < t_len; ++t) {
    p_lo[t] = 0.0;
    p_hi[t] = 1.0 + 9.0 * unit(rng);
    w[t] = p_lo[t] + (p_hi[t] - p_lo[t]) * unit(rng);
    prefix += w[t];
    s_lo[t] = prefix - 1.0 - 5.0 * unit(rng);
    s_hi[t] = prefix + 1.0 + 5.0 * unit(rng);
  }
  EvInstance inst;
  inst.variant = EvVariant::S1;
  inst.reg = 1e-3;
  inst.bounds = bounds_from_cumulative(p_lo, p_hi, s_lo, s_hi);
  inst.anchor.resize(t_len);
  std::uniform_real_distribution<double> xi(-1.0, 2.0);
  for (int t = 0; t < t_len; ++t) {
    inst.anchor[t] = p_lo[t] + xi(rng) * (p_hi[t] - p_lo[t]);
  }
  return inst;
}

Scenario micro_scenario(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = 1 + static_cast<int>(rng() % 4);
  const int t_len = 1 + static_cast<int>(rng() % 4);
  const int n_feeders = 1 + static_cast<int>(rng() % 2);
  Scenario sc;
  sc.unit_scale = 1.0;
  sc.location = LocationMap(n, t_len, LocationMap::kAway);
  sc.profiles.resize(n);
  for (int i = 0; i < n; ++i) {
    EvProfile& ev = sc.profiles[i];
    ev.id = "m" + std::to_string(i);
    ev.p_min.assign(t_len, 0.0);
    ev.p_max.assign(t_len, 0.0);
    ev.e_min.assign(t_len, 0.0);
    ev.e_max.assign(t_len, 6.0);
    ev.demand.assign(t_len, 0.0);
    ev.e_init = 3.0;
    for (int t = 0; t < t_len; ++t) {
      if (unit(rng) < 0.8) {
        sc.location.at(i, t) = static_cast<int32_t>(rng() % n_feeders);
        ev.p_max[t] = 2.0 + 2.0 * unit(rng);
      } else {
        ev.demand[t] = 1.5 * unit(rng);
      }
    }
    ev.e_min[t_len - 1] = ev.e_init * 0.5;
  }
  sc.feeders.capacity = Grid(n_feeders, t_len, 0.0);
  sc.feeders.ids.resize(n_feeders);
  for (int s = 0; s < n_feeders; ++s) {
    sc.feeders.ids[s] = std::to_string(s);
    for (int t = 0; t < t_len; ++t) sc.feeders.capacity(s, t) = 1.0 + 2.0 * unit(rng);
  }
  // Keep only feasible EVs (demand draws can exceed what charging restores).
  Scenario kept;
  kept.unit_scale = sc.unit_scale;
  kept.feeders = sc.feeders;
  std::vector<int> rows;
  for (int i = 0; i < n; ++i) {
    const auto b = derive_bounds(sc.profiles[i]);
    if (check_necessary(b) && is_feasible(b)) rows.push_back(i);
  }
  if (rows.empty()) rows.push_back(-1);
  if (rows[0] == -1) {
    // Degenerate draw; fall back to a single idle EV.
    EvProfile ev = sc.profiles[0];
    ev.demand.assign(t_len, 0.0);
    ev.e_min.assign(t_len, 0.0);
    kept.profiles.push_back(ev);
    kept.location = LocationMap(1, t_len, LocationMap::kAway);
    for (int t = 0; t < t_len; ++t) kept.location.at(0, t) = sc.location.at(0, t);
    return kept;
  }
  kept.location = LocationMap(static_cast<int>(rows.size()), t_len, LocationMap::kAway);
  for (size_t k = 0; k < rows.size(); ++k) {
    kept.profiles.push_back(sc.profiles[rows[k]]);
    for (int t = 0; t < t_len; ++t) kept.location.at(static_cast<int>(k), t) = sc.location.at(rows[k], t);
  }
  return kept;
}

}  // namespace

int run_selftest(const std::string& level, int threads, std::ostream& log) {
  if (level != "quick" && level != "full") {
    log << "error: selftest level must be 'quick' or 'full'\n";
    return kExitValidation;
  }
  const bool full = level == "full";
  CheckRunner cr{log};

  cr.run("feasibility-oracle-labels", [&]() -> std::string {
    const int count = full ? 10000 : 2000;
    const auto labeled = labeled_feasibility_instances(7001, count);
    for (size_t k = 0; k < labeled.size(); ++k) {
      const auto& li = labeled[k];
      const bool got = check_necessary(li.bounds) && is_feasible(li.bounds);
      if (got != li.feasible) {
        return "label mismatch at instance " + std::to_string(k);
      }
      const std::vector<double> zeros(li.bounds.horizon(), 0.0);
      const auto proj = project_feasible(zeros, li.bounds);
      if (proj.has_value() != li.feasible) {
        return "projection emptiness mismatch at instance " + std::to_string(k);
      }
      if (proj && !satisfies_constraints(*proj, li.bounds)) {
        return "projection violates constraints at instance " + std::to_string(k);
      }
    }
    return "";
  });

  cr.run("projection-identity-idempotence", [&]() -> std::string {
    const auto labeled = labeled_feasibility_instances(7002, full ? 600 : 200);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> jitter(-3.0, 3.0);
    for (const auto& li : labeled) {
      if (li.feasible) {
        const auto back = project_feasible(li.witness, li.bounds);
        if (!back || *back != li.witness) return "identity failed on a feasible witness";
      }
      std::vector<double> target(li.bounds.horizon());
      for (double& x : target) x = jitter(rng);
      const auto once = project_feasible(target, li.bounds);
      if (!once) continue;
      const auto twice = project_feasible(*once, li.bounds);
      if (!twice || *twice != *once) return "projection is not idempotent";
    }
    return "";
  });

  cr.run("s2-kkt-and-oracle", [&]() -> std::string {
    std::mt19937_64 rng(7003);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int count = full ? 4000 : 1000;
    for (int k = 0; k < count; ++k) {
      const int t_len = 1 + static_cast<int>(rng() % 24);
      std::vector<double> target(t_len), cap(t_len);
      for (int t = 0; t < t_len; ++t) {
        target[t] = 4.0 * unit(rng) - 1.0;
        cap[t] = 2.0 * unit(rng);
      }
      const double rho_over_i = 0.05 + 4.0 * unit(rng);
      const auto sol = solve_s2(target, cap, rho_over_i);
      double xi_sum = sol.xi0;
      for (int t = 0; t < t_len; ++t) {
        if (sol.load[t] - cap[t] > sol.v + 1e-10) return "primal feasibility violated";
        if (sol.xi[t] < -1e-12) return "dual feasibility violated";
        xi_sum += sol.xi[t];
        if (std::abs(rho_over_i * (sol.load[t] - target[t]) + sol.xi[t]) > 1e-10) {
          return "stationarity in load violated";
        }
        if (std::abs(sol.xi[t] * (sol.load[t] - cap[t] - sol.v)) > 1e-10) {
          return "complementary slackness (load) violated";
        }
      }
      if (std::abs(xi_sum - 1.0) > 1e-10) return "multiplier sum is not 1";
      if (std::abs(sol.xi0 * sol.v) > 1e-10) return "complementary slackness (v) violated";
      const double v_ref = oracle_s2(target, cap, rho_over_i);
      if (std::abs(sol.v - v_ref) > 1e-7) {
        return "oracle disagreement: " + std::to_string(sol.v) + " vs " + std::to_string(v_ref);
      }
    }
    return "";
  });

  cr.run("d2-three-cases", [&]() -> std::string {
    std::mt19937_64 rng(7004);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
      const int t_len = 1 + static_cast<int>(rng() % 12);
      std::vector<double> price(t_len), cap(t_len);
      double sum = 0.0, min_p = 0.0, dot = 0.0;
      for (int t = 0; t < t_len; ++t) {
        price[t] = (unit(rng) < 0.1) ? -0.2 * unit(rng) : 0.4 * unit(rng);
        cap[t] = 3.0 * unit(rng);
        sum += price[t];
        min_p = std::min(min_p, price[t]);
        dot += price[t] * cap[t];
      }
      const auto v = solve_d2(price, cap);
      const bool expect_finite = !(sum > 1.0 || min_p < 0.0);
      if (v.finite != expect_finite) return "finiteness case mismatch";
      if (v.finite && std::abs(v.value + dot) > 1e-12) return "finite value mismatch";
    }
    return "";
  });

  cr.run("operator-norm-closed-form", [&]() -> std::string {
    for (int t_len : {1, 2, 7, 24, 168}) {
      const double closed = lipschitz_constant(t_len, EvVariant::D1, 2.0);  // = ||H||^2
      const double power = prefix_operator_norm_sq_power_iteration(t_len);
      if (std::abs(closed - power) > 1e-6 * power) {
        return "mismatch at T=" + std::to_string(t_len);
      }
    }
    return "";
  });

  cr.run("s1-vs-oracle", [&]() -> std::string {
    std::mt19937_64 rng(7005);
    const int count = full ? 120 : 40;
    for (int k = 0; k < count; ++k) {
      const int t_len = 1 + static_cast<int>(rng() % 8);
      const auto inst = random_s1_instance(rng, t_len);
      const auto ref = oracle_s1(inst, 1e-6);
      SolveBatchOptions opts;
      opts.max_iter = 2000;
      opts.tol = 1e-8;
      opts.threads = 1;
      const auto got = solve_batch({inst}, opts);
      for (int t = 0; t < t_len; ++t) {
        if (std::abs(got[0].p[t] - ref.p[t]) > 1e-3) {
          return "primal mismatch at instance " + std::to_string(k);
        }
      }
    }
    return "";
  });

  cr.run("weak-duality-sampling", [&]() -> std::string {
    std::mt19937_64 rng(7006);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < (full ? 500 : 200); ++k) {
      const int t_len = 1 + static_cast<int>(rng() % 8);
      auto inst = random_s1_instance(rng, t_len);
      if (k % 2 == 1) {
        inst.variant = EvVariant::D1;
        inst.reg = 0.5;
        for (double& x : inst.anchor) x = 2.0 * unit(rng) - 1.0;
      }
      DualIterate u = DualIterate::zeros(t_len);
      for (int t = 0; t < t_len; ++t) {
        u.u_lo[t] = 2.0 * unit(rng);
        u.u_hi[t] = 2.0 * unit(rng);
      }
      std::vector<double> target(t_len);
      for (double& x : target) x = 10.0 * unit(rng) - 2.0;
      const auto p = project_feasible(target, inst.bounds);
      const auto eval = dual_value_grad(u, inst);
      if (eval.psi > instance_objective(*p, inst) + 1e-10) return "psi exceeded Phi";
    }
    return "";
  });

  cr.run("masking-invariance", [&]() -> std::string {
    std::mt19937_64 rng(7007);
    std::vector<EvInstance> instances;
    for (int k = 0; k < (full ? 400 : 150); ++k) {
      instances.push_back(random_s1_instance(rng, 1 + static_cast<int>(rng() % 12)));
    }
    SolveBatchOptions with;
    with.threads = threads;
    with.max_iter = 100;
    SolveBatchOptions without = with;
    without.masking = false;
    long inner_with = 0, inner_without = 0;
    const auto a = solve_batch(instances, with, nullptr, &inner_with);
    const auto b = solve_batch(instances, without, nullptr, &inner_without);
    for (size_t k = 0; k < instances.size(); ++k) {
      if (a[k].iterations != b[k].iterations || std::abs(a[k].gap - b[k].gap) > 1e-9) {
        return "result mismatch at instance " + std::to_string(k);
      }
      for (size_t t = 0; t < a[k].p.size(); ++t) {
        if (std::abs(a[k].p[t] - b[k].p[t]) > 1e-9) {
          return "profile mismatch at instance " + std::to_string(k);
        }
      }
    }
    bool any_early = false;
    for (const auto& r : a) any_early |= r.converged && r.iterations < with.max_iter;
    if (any_early && inner_with >= inner_without) {
      return "masking did not reduce inner iterations";
    }
    return "";
  });

  cr.run("sharing-reduction-equivalence", [&]() -> std::string {
    for (uint64_t seed = 1; seed <= (full ? 8u : 4u); ++seed) {
      const Scenario sc = micro_scenario(seed * 17);
      AdmmOptions opts;
      opts.s1.optimizer = Optimizer::PGA;
      opts.s1.max_iter = 400;
      opts.s1.tol = 0.0;
      opts.s1.masking = false;
      opts.s1.warm_start = false;
      opts.s1.threads = 1;
      const int iters = 30;
      const auto dense = dense_admm_small(sc, opts, iters);
      AdmmState state = init_state(sc, opts);
      for (int k = 0; k < iters; ++k) {
        step(state, sc, opts);
        const Grid& dp = dense.p[k];
        for (size_t c = 0; c < dp.data.size(); ++c) {
          if (std::abs(dp.data[c] - state.p.data[c]) > 1e-9) {
            return "p mismatch at iteration " + std::to_string(k);
          }
        }
        for (size_t c = 0; c < state.l.data.size(); ++c) {
          const double dense_l = dense.z_bar[k].data[c] * sc.ev_count();
          if (std::abs(dense_l - state.l.data[c]) > 1e-9) {
            return "consensus load mismatch at iteration " + std::to_string(k);
          }
        }
        if (dense.mu_consensus_spread[k] > 1e-9) {
          return "per-EV duals failed to reach consensus";
        }
        for (size_t c = 0; c < state.mu.data.size(); ++c) {
          if (std::abs(dense.mu_i[k][0].data[c] - state.mu.data[c]) > 1e-9) {
            return "dual mismatch at iteration " + std::to_string(k);
          }
        }
      }
    }
    return "";
  });

  if (full) {
    cr.run("s1-convergence-population", [&]() -> std::string {
      GenConfig cfg;
      cfg.n_evs = 10000;
      cfg.seed = 20240811;
      const Scenario sc = generate_scenario(cfg);
      std::vector<EvInstance> instances;
      std::mt19937_64 rng(5);
      std::uniform_real_distribution<double> xi(-1.0, 2.0);
      for (int i = 0; i < sc.ev_count() && instances.size() < 8192; ++i) {
        const auto& ev = sc.profiles[i];
        double weekly = 0.0;
        for (double d : ev.demand) weekly += d;
        if (weekly <= 60.0) continue;
        EvInstance inst;
        inst.variant = EvVariant::S1;
        inst.reg = 1e-3;
        inst.bounds = derive_bounds(ev);
        inst.anchor.resize(sc.horizon());
        for (int t = 0; t < sc.horizon(); ++t) {
          inst.anchor[t] = ev.p_min[t] + xi(rng) * (ev.p_max[t] - ev.p_min[t]);
        }
        instances.push_back(std::move(inst));
      }
      if (instances.size() < 8192) {
        return "population too small: " + std::to_string(instances.size());
      }
      SolveBatchOptions opts;
      opts.threads = threads;
      opts.tol = 0.01;
      opts.max_iter = 200;
      const auto results = solve_batch(instances, opts);
      int by100 = 0, by200 = 0;
      for (const auto& r : results) {
        if (r.converged && r.iterations <= 100) ++by100;
        if (r.converged) ++by200;
        if (r.gap < -1e-12) return "negative certified gap";
      }
      const double f100 = static_cast<double>(by100) / results.size();
      const double f200 = static_cast<double>(by200) / results.size();
      std::ostringstream msg;
      if (f100 < 0.95 || f200 < 0.98) {
        msg << "convergence fractions too low: " << f100 << " by 100, " << f200 << " by 200";
        return msg.str();
      }
      return "";
    });

    cr.run("coordination-end-to-end", [&]() -> std::string {
      GenConfig cfg;
      cfg.n_evs = 300;
      cfg.n_feeders = 8;
      cfg.horizon = 96;
      cfg.seed = 99;
      const Scenario sc = generate_scenario(cfg);
      AdmmOptions opts;
      opts.max_iter = 150;
      opts.threads = threads;
      const auto rep = run(sc, opts);
      const Grid base = asap_plus(sc);
      const Grid base_load = aggregate_load(base, sc.location, sc.feeder_count(), sc.unit_scale);
      const double base_cost = grid_cost(base_load, sc.feeders.capacity);
      const double mac_cost = grid_cost(rep.state.hat_l, sc.feeders.capacity);
      if (!(mac_cost <= base_cost + 1e-9)) {
        return "coordination increased the grid cost";
      }
      if (rep.certificate.rel_gap.has_value() && *rep.certificate.rel_gap < -1e-10) {
        return "negative certified gap";
      }
      return "";
    });
  }

  if (cr.failures > 0) {
    log << cr.failures << " check(s) failed\n";
    return kExitSelftest;
  }
  log << "all checks passed (" << level << ")\n";
  return kExitOk;
}

}  // namespace evco::cli
