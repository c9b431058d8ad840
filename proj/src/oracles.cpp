#include "evco/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "evco/feeder_solver.hpp"

namespace evco {

S1OracleResult oracle_s1(const EvInstance& inst, double tol, long max_iterations) {
  if (!check_necessary(inst.bounds) || !is_feasible(inst.bounds)) {
    throw OracleFailure("oracle_s1: instance is infeasible");
  }
  const int t_len = inst.bounds.horizon();
  const double eta = 1.0 / lipschitz_constant(t_len, inst.variant, inst.reg);

  DualIterate u = DualIterate::zeros(t_len);
  S1OracleResult res;
  for (long k = 0;; ++k) {
    // Certificate check every few steps; its validity does not depend on
    // the iteration having converged.
    if (k % 10 == 0 || k == max_iterations) {
      const auto p_dag = closed_form_primal(u, inst);
      auto p_feas = project_feasible(p_dag, inst.bounds);
      const double gap = duality_gap(*p_feas, u, inst);
      if (gap <= tol) {
        res.p = std::move(*p_feas);
        res.objective = instance_objective(res.p, inst);
        res.gap = gap;
        res.dual = u;
        res.iterations = k;
        return res;
      }
      if (k >= max_iterations) {
        throw OracleFailure("oracle_s1: iteration cap exceeded at gap " + std::to_string(gap));
      }
    }
    const auto eval = dual_value_grad(u, inst);
    for (int t = 0; t < t_len; ++t) {
      u.u_lo[t] = std::max(u.u_lo[t] + eta * eval.grad[t], 0.0);
      u.u_hi[t] = std::max(u.u_hi[t] + eta * eval.grad[t_len + t], 0.0);
    }
    u.step_count = k + 1;
  }
}

double oracle_s2(std::span<const double> target, std::span<const double> cap, double rho_over_I,
                 double tol) {
  const size_t t_len = target.size();
  if (cap.size() != t_len) throw OracleFailure("oracle_s2: length mismatch");
  auto f = [&](double v) {
    double acc = v;
    for (size_t t = 0; t < t_len; ++t) {
      const double r = std::max(target[t] - cap[t] - v, 0.0);
      acc += 0.5 * rho_over_I * r * r;
    }
    return acc;
  };
  double hi = 0.0;
  for (size_t t = 0; t < t_len; ++t) hi = std::max(hi, target[t] - cap[t]);
  if (hi <= 0.0) return 0.0;

  // Golden-section search; f is strictly convex on [0, hi]. Value
  // comparisons cannot resolve the argmin below sqrt(eps / f''), so the
  // result is polished with a bisection on the (monotone, exactly
  // computable) derivative restricted to a small window.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > std::max(tol, 1e-12)) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  const double coarse = 0.5 * (a + b);

  auto df = [&](double v) {
    double xi = 0.0;
    for (size_t t = 0; t < t_len; ++t) xi += std::max(target[t] - cap[t] - v, 0.0);
    return 1.0 - rho_over_I * xi;  // increasing in v
  };
  double lo = std::max(0.0, coarse - 1e-6), bis_hi = std::min(hi, coarse + 1e-6);
  if (df(lo) > 0.0) return lo;      // minimum at (or below) the window edge
  if (df(bis_hi) < 0.0) return bis_hi;
  for (int it = 0; it < 200 && bis_hi - lo > 1e-15 * std::max(1.0, bis_hi); ++it) {
    const double mid = 0.5 * (lo + bis_hi);
    if (df(mid) < 0.0) {
      lo = mid;
    } else {
      bis_hi = mid;
    }
  }
  return 0.5 * (lo + bis_hi);
}

DenseAdmmTrace dense_admm_small(const Scenario& scenario, const AdmmOptions& opts, int iters) {
  const int n = scenario.ev_count();
  const int n_feeders = scenario.feeder_count();
  const int t_len = scenario.horizon();
  if (n > 4 || n_feeders > 2 || t_len > 4) {
    throw OracleFailure("dense_admm_small: instance exceeds the micro-size guard");
  }
  const double sigma = scenario.unit_scale;
  const double kappa = effective_kappa(opts, scenario);
  const double reg_s1 = opts.kappa_rho;  // kappa / (rho * sigma^2)

  // Materialized routing tensors A_i[s][t][t'] (scaled by sigma).
  std::vector<std::vector<std::vector<std::vector<double>>>> a(
      n, std::vector<std::vector<std::vector<double>>>(
             n_feeders, std::vector<std::vector<double>>(t_len, std::vector<double>(t_len, 0.0))));
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_len; ++t) {
      const int32_t s = scenario.location.at(i, t);
      if (s != LocationMap::kAway) a[i][s][t][t] = sigma;
    }
  }
  auto apply = [&](int i, std::span<const double> p) {
    Grid out(n_feeders, t_len, 0.0);
    for (int s = 0; s < n_feeders; ++s) {
      for (int t = 0; t < t_len; ++t) {
        for (int tp = 0; tp < t_len; ++tp) out(s, t) += a[i][s][t][tp] * p[tp];
      }
    }
    return out;
  };
  auto apply_adjoint = [&](int i, const Grid& m) {
    std::vector<double> out(t_len, 0.0);
    for (int t = 0; t < t_len; ++t) {
      for (int s = 0; s < n_feeders; ++s) {
        for (int tp = 0; tp < t_len; ++tp) out[t] += a[i][s][tp][t] * m(s, tp);
      }
    }
    return out;
  };

  std::vector<CumulativeBounds> bounds(n);
  std::vector<std::vector<double>> p(n);
  std::vector<Grid> z(n), mu(n, Grid(n_feeders, t_len, 0.0));
  const std::vector<double> zeros(t_len, 0.0);
  for (int i = 0; i < n; ++i) {
    bounds[i] = derive_bounds(scenario.profiles[i]);
    auto p0 = project_feasible(zeros, bounds[i]);
    if (!p0) throw OracleFailure("dense_admm_small: EV " + std::to_string(i) + " is infeasible");
    p[i] = std::move(*p0);
    z[i] = apply(i, p[i]);
  }

  DenseAdmmTrace trace;
  SolveBatchOptions inner = opts.s1;
  inner.warm_start = false;
  inner.threads = 1;

  for (int k = 0; k < iters; ++k) {
    // (S1) per-EV proximal solve toward b_i = z_i - mu_i, through the
    // materialized adjoint.
    std::vector<EvInstance> instances(n);
    for (int i = 0; i < n; ++i) {
      Grid b(n_feeders, t_len, 0.0);
      for (size_t c = 0; c < b.data.size(); ++c) b.data[c] = z[i].data[c] - mu[i].data[c];
      auto gathered = apply_adjoint(i, b);
      for (double& x : gathered) x /= sigma * sigma;  // anchor in kW
      instances[i].variant = EvVariant::S1;
      instances[i].reg = reg_s1;
      instances[i].anchor = std::move(gathered);
      instances[i].bounds = bounds[i];
    }
    auto results = solve_batch(instances, inner);
    for (int i = 0; i < n; ++i) p[i] = results[i].p;

    // (S2) via the sharing identity: z*_i = z_bar + d_i - d_bar.
    std::vector<Grid> d(n);
    Grid d_bar(n_feeders, t_len, 0.0);
    for (int i = 0; i < n; ++i) {
      d[i] = apply(i, p[i]);
      for (size_t c = 0; c < d[i].data.size(); ++c) {
        d[i].data[c] += mu[i].data[c];
        d_bar.data[c] += d[i].data[c];
      }
    }
    for (double& x : d_bar.data) x /= static_cast<double>(n);

    Grid z_bar(n_feeders, t_len, 0.0);
    std::vector<double> target(t_len);
    for (int s = 0; s < n_feeders; ++s) {
      for (int t = 0; t < t_len; ++t) target[t] = static_cast<double>(n) * d_bar(s, t);
      auto sol = solve_s2(target, scenario.feeders.capacity.row(s), opts.rho / n);
      for (int t = 0; t < t_len; ++t) z_bar(s, t) = sol.load[t] / static_cast<double>(n);
    }
    for (int i = 0; i < n; ++i) {
      for (size_t c = 0; c < z[i].data.size(); ++c) {
        z[i].data[c] = z_bar.data[c] + d[i].data[c] - d_bar.data[c];
      }
    }

    // (S3) one dual per EV.
    double spread = 0.0;
    for (int i = 0; i < n; ++i) {
      const Grid ap = apply(i, p[i]);
      for (size_t c = 0; c < mu[i].data.size(); ++c) {
        mu[i].data[c] += ap.data[c] - z[i].data[c];
      }
    }
    for (int i = 1; i < n; ++i) {
      for (size_t c = 0; c < mu[i].data.size(); ++c) {
        spread = std::max(spread, std::abs(mu[i].data[c] - mu[0].data[c]));
      }
    }

    Grid p_grid(n, t_len, 0.0);
    for (int i = 0; i < n; ++i) {
      auto row = p_grid.row(i);
      std::copy(p[i].begin(), p[i].end(), row.begin());
    }
    trace.p.push_back(std::move(p_grid));
    trace.z_bar.push_back(z_bar);
    trace.mu_i.push_back(mu);
    trace.mu_consensus_spread.push_back(spread);
  }
  return trace;
}

namespace {

uint64_t mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<LabeledInstance> labeled_feasibility_instances(uint64_t seed, int count, int t_min,
                                                           int t_max) {
  std::vector<LabeledInstance> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    std::mt19937_64 rng(mix(seed ^ mix(static_cast<uint64_t>(k))));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int family = k % 3;
    const int t_len =
        std::uniform_int_distribution<int>(family == 1 ? std::max(3, t_min) : t_min, t_max)(rng);

    LabeledInstance inst;
    if (family == 0 || family == 1) {
      // Witness-embedded feasible set: sample the box, a strictly interior
      // witness, and widen the cumulative band around its prefix sums.
      std::vector<double> p_lo(t_len), p_hi(t_len), w(t_len), s_lo(t_len), s_hi(t_len);
      double prefix = 0.0;
      for (int t = 0; t < t_len; ++t) {
        p_lo[t] = (unit(rng) < 0.3) ? 0.0 : -2.0 * unit(rng);
        p_hi[t] = p_lo[t] + 0.5 + 4.0 * unit(rng);
        const double margin = 0.05 * (p_hi[t] - p_lo[t]);
        w[t] = p_lo[t] + margin + (p_hi[t] - p_lo[t] - 2.0 * margin) * unit(rng);
        prefix += w[t];
        s_lo[t] = prefix - (0.01 + 2.0 * unit(rng));
        s_hi[t] = prefix + (0.01 + 2.0 * unit(rng));
      }
      if (family == 0) {
        inst.bounds = bounds_from_cumulative(p_lo, p_hi, s_lo, s_hi);
        inst.feasible = true;
        inst.witness = w;
      } else {
        // Energy-deficit window: cap the cumulative charge at slot a, then
        // require more at slot b than full power in (a, b] can deliver.
        for (int t = 0; t < t_len; ++t) {
          p_lo[t] = 0.0;
          p_hi[t] = 0.5 + 4.5 * unit(rng);
        }
        std::vector<double> c_hi(t_len);
        double acc = 0.0;
        for (int t = 0; t < t_len; ++t) {
          acc += p_hi[t];
          c_hi[t] = acc;
        }
        const int a = std::uniform_int_distribution<int>(0, t_len - 2)(rng);
        const int b = std::uniform_int_distribution<int>(a + 1, t_len - 1)(rng);
        const double gap = 0.05 + unit(rng);
        const double ceiling = std::max(0.0, c_hi[a] - gap - unit(rng));
        for (int t = 0; t < t_len; ++t) {
          s_lo[t] = 0.0;
          s_hi[t] = c_hi[t];
        }
        s_hi[a] = ceiling;
        for (int t = 0; t < a; ++t) s_hi[t] = std::min(s_hi[t], ceiling);
        s_lo[b] = ceiling + (c_hi[b] - c_hi[a]) + gap;
        for (int t = b; t < t_len; ++t) s_hi[t] = std::max(s_hi[t], s_lo[b]);
        inst.bounds = bounds_from_cumulative(p_lo, p_hi, s_lo, s_hi);
        inst.feasible = false;
      }
    } else {
      // Scaled copies of the pattern that passes the necessary chain but
      // has an empty set: P in [0, alpha], band forces zero charge early
      // and full-power charge overall.
      const double alpha = 0.25 + 4.0 * unit(rng);
      std::vector<double> p_lo(3, 0.0), p_hi(3, alpha);
      std::vector<double> s_lo = {0.0, 0.0, 3.0 * alpha};
      std::vector<double> s_hi = {0.0, 0.5 * alpha, 3.0 * alpha};
      inst.bounds = bounds_from_cumulative(p_lo, p_hi, s_lo, s_hi);
      inst.feasible = false;
    }
    out.push_back(std::move(inst));
  }
  return out;
}

bool lattice_feasible(const CumulativeBounds& b) {
  const int t_len = b.horizon();
  std::vector<long> lo(t_len), hi(t_len);
  long combos = 1;
  for (int t = 0; t < t_len; ++t) {
    lo[t] = std::lround(b.p_min[t]);
    hi[t] = std::lround(b.p_max[t]);
    if (hi[t] < lo[t]) return false;
    combos *= hi[t] - lo[t] + 1;
    if (combos > 2000000L) throw OracleFailure("lattice_feasible: search space too large");
  }
  std::vector<long> p(lo);
  while (true) {
    long prefix = 0;
    bool ok = true;
    for (int t = 0; t < t_len && ok; ++t) {
      prefix += p[t];
      if (prefix < std::lround(b.s_min[t]) || prefix > std::lround(b.s_max[t])) ok = false;
    }
    if (ok) return true;
    int t = 0;
    while (t < t_len && p[t] == hi[t]) {
      p[t] = lo[t];
      ++t;
    }
    if (t == t_len) return false;
    ++p[t];
  }
}

}  // namespace evco
