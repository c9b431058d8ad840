#include "evco/admm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evco/feeder_solver.hpp"

namespace evco {

namespace {

int threads_of(const AdmmOptions& opts, const SolveBatchOptions& inner) {
  return inner.threads > 0 ? inner.threads : opts.threads;
}

// Per-EV gather of a grid-side S x T field along the location map.
// AWAY slots gather zero.
void gather_row(const Grid& field, const LocationMap& loc, int i, std::vector<double>& out) {
  out.assign(loc.cols, 0.0);
  for (int t = 0; t < loc.cols; ++t) {
    const int32_t s = loc.at(i, t);
    if (s != LocationMap::kAway) out[t] = field(s, t);
  }
}

// D1 instances are solved in an exactly rescaled form: dividing the
// objective kappa/2 ||p||^2 + <c, p> by kappa gives reg = 1 and anchor
// c / kappa with the same minimizer, and dual values that map back as
// psi = kappa * psi'. The rescaling keeps the relative-gap stopping rule
// sensitive to the (tiny) disutility term that makes the best response
// unique; solved raw, any point of the optimal face would pass the
// tolerance and the response would be arbitrary.
std::vector<EvInstance> build_d1_instances(const Grid& lambda, const Scenario& scenario,
                                           const std::vector<CumulativeBounds>& bounds,
                                           double kappa) {
  const int n = scenario.ev_count();
  std::vector<EvInstance> instances(n);
  std::vector<double> buf;
  for (int i = 0; i < n; ++i) {
    gather_row(lambda, scenario.location, i, buf);
    // per-MW price -> per-kW, then divided by kappa for the rescaled form
    for (double& x : buf) x *= scenario.unit_scale / kappa;
    instances[i].variant = EvVariant::D1;
    instances[i].reg = 1.0;
    instances[i].anchor = buf;
    instances[i].bounds = bounds[i];
  }
  return instances;
}

std::vector<CumulativeBounds> derive_all_bounds(const Scenario& scenario) {
  std::vector<CumulativeBounds> bounds(scenario.ev_count());
  for (int i = 0; i < scenario.ev_count(); ++i) {
    bounds[i] = derive_bounds(scenario.profiles[i]);
    if (!check_necessary(bounds[i]) || !is_feasible(bounds[i])) {
      throw StructuralError("infeasible EV reached the solver: " + scenario.profiles[i].id +
                            " (scenario loading should have dropped it)");
    }
  }
  return bounds;
}

}  // namespace

double effective_kappa(const AdmmOptions& opts, const Scenario& scenario) {
  return opts.kappa_rho * opts.rho * scenario.unit_scale * scenario.unit_scale;
}

AdmmState init_state(const Scenario& scenario, const AdmmOptions& opts) {
  const int n = scenario.ev_count();
  const int t_len = scenario.horizon();
  const int n_feeders = scenario.feeder_count();

  AdmmState state;
  state.bounds = derive_all_bounds(scenario);
  state.p = Grid(n, t_len, 0.0);
  std::vector<double> zeros(t_len, 0.0);
  for (int i = 0; i < n; ++i) {
    auto p0 = project_feasible(zeros, state.bounds[i]);
    auto row = state.p.row(i);
    std::copy(p0->begin(), p0->end(), row.begin());
  }
  state.hat_l = aggregate_load(state.p, scenario.location, n_feeders, scenario.unit_scale);
  state.l = state.hat_l;
  state.mu = Grid(n_feeders, t_len, 0.0);
  state.occupancy = occupancy_counts(scenario.location, n_feeders);
  state.warm_duals.assign(n, DualIterate());
  for (int i = 0; i < n; ++i) state.warm_duals[i] = DualIterate::zeros(t_len);

  state.s1_instances.resize(n);
  for (int i = 0; i < n; ++i) {
    state.s1_instances[i].variant = EvVariant::S1;
    state.s1_instances[i].reg = opts.kappa_rho;
    state.s1_instances[i].anchor.assign(t_len, 0.0);
    state.s1_instances[i].bounds = state.bounds[i];
  }
  return state;
}

void step(AdmmState& state, const Scenario& scenario, const AdmmOptions& opts) {
  const int n = scenario.ev_count();
  const int t_len = scenario.horizon();
  const int n_feeders = scenario.feeder_count();
  const double inv_count = 1.0 / static_cast<double>(std::max(n, 1));
  const double sigma = scenario.unit_scale;

  if (static_cast<int>(state.s1_instances.size()) != n) {
    throw StructuralError("step: state was not initialized for this scenario");
  }

  const AdmmState prev = state;

  // (S1) anchors: b_i(t) = p_i(t) - w(loc(i,t), t) / (I * sigma).
  Grid w(n_feeders, t_len);
  for (size_t k = 0; k < w.data.size(); ++k) {
    w.data[k] = state.hat_l.data[k] - state.l.data[k] +
                static_cast<double>(n) * state.mu.data[k];
  }
  for (int i = 0; i < n; ++i) {
    auto& anchor = state.s1_instances[i].anchor;
    const auto p_row = state.p.row(i);
    for (int t = 0; t < t_len; ++t) {
      const int32_t s = scenario.location.at(i, t);
      anchor[t] = (s == LocationMap::kAway) ? 0.0 : p_row[t] - w(s, t) * inv_count / sigma;
    }
  }

  SolveBatchOptions s1 = opts.s1;
  s1.threads = threads_of(opts, opts.s1);
  auto results = solve_batch(state.s1_instances, s1, &state.warm_duals);
  for (int i = 0; i < n; ++i) {
    auto row = state.p.row(i);
    std::copy(results[i].p.begin(), results[i].p.end(), row.begin());
  }
  state.hat_l = aggregate_load(state.p, scenario.location, n_feeders, sigma);

  // (S2) per-feeder proximal violation solve at target hat_l + I*mu.
  const double rho_over_i = opts.rho * inv_count;
  std::vector<double> target(t_len);
  for (int s = 0; s < n_feeders; ++s) {
    for (int t = 0; t < t_len; ++t) {
      target[t] = state.hat_l(s, t) + static_cast<double>(n) * state.mu(s, t);
    }
    auto sol = solve_s2(target, scenario.feeders.capacity.row(s), rho_over_i);
    auto l_row = state.l.row(s);
    std::copy(sol.load.begin(), sol.load.end(), l_row.begin());
  }

  // (S3) consensus dual ascent.
  for (size_t k = 0; k < state.mu.data.size(); ++k) {
    state.mu.data[k] += (state.hat_l.data[k] - state.l.data[k]) * inv_count;
  }
  state.iter += 1;

  const ResidualReport rr = residuals(state, prev, scenario, opts);
  TraceRecord tr;
  tr.iter = state.iter;
  tr.grid_cost_hat = grid_cost(state.hat_l, scenario.feeders.capacity);
  tr.grid_cost_consensus = grid_cost(state.l, scenario.feeders.capacity);
  tr.primal_residual = rr.primal_norm;
  tr.dual_residual = rr.dual_norm;
  tr.residual_ok = rr.satisfied;
  state.trace.push_back(tr);
}

ResidualReport residuals(const AdmmState& state, const AdmmState& prev, const Scenario& scenario,
                         const AdmmOptions& opts) {
  const int n = scenario.ev_count();
  const int t_len = scenario.horizon();
  const double sigma = scenario.unit_scale;
  const double inv_count = 1.0 / static_cast<double>(std::max(n, 1));

  ResidualReport rep;

  // Primal residual: the consensus gap is identical for every EV, so the
  // stacked norm collapses to an occupancy-weighted Frobenius norm.
  Grid gap(state.l.rows, state.l.cols);
  Grid w_cur(state.l.rows, state.l.cols);
  Grid w_prev(state.l.rows, state.l.cols);
  for (size_t k = 0; k < gap.data.size(); ++k) {
    gap.data[k] = (state.hat_l.data[k] - state.l.data[k]) * inv_count;
    w_cur.data[k] = (state.l.data[k] - state.hat_l.data[k]) * inv_count;
    w_prev.data[k] = (prev.l.data[k] - prev.hat_l.data[k]) * inv_count;
  }
  rep.primal_norm = weighted_consensus_norm(gap, state.occupancy);

  // Dual residual: rho * A^T (z_k - z_{k-1}) stacked over EVs.
  double dual_ss = 0.0;
  double p_ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto cur_row = state.p.row(i);
    const auto prev_row = prev.p.row(i);
    for (int t = 0; t < t_len; ++t) {
      p_ss += cur_row[t] * cur_row[t];
      const int32_t s = scenario.location.at(i, t);
      if (s == LocationMap::kAway) continue;
      const double dz = sigma * (cur_row[t] - prev_row[t]) + (w_cur(s, t) - w_prev(s, t));
      dual_ss += dz * dz;
    }
  }
  rep.dual_norm = opts.rho * sigma * std::sqrt(dual_ss);

  // Tolerances (reduced dimension I*T).
  double w_ss = 0.0, wl_dot = 0.0;
  for (size_t k = 0; k < w_cur.data.size(); ++k) {
    w_ss += w_cur.data[k] * w_cur.data[k];
    wl_dot += w_cur.data[k] * state.hat_l.data[k];
  }
  const double ap_norm = sigma * std::sqrt(p_ss);
  const double z_norm =
      std::sqrt(std::max(0.0, static_cast<double>(n) * w_ss + 2.0 * wl_dot + ap_norm * ap_norm));
  const double dim = std::sqrt(static_cast<double>(n) * t_len);
  rep.eps_primal = dim * opts.eps_abs + opts.eps_rel * std::max(ap_norm, z_norm);
  rep.eps_dual = dim * opts.eps_abs +
                 opts.eps_rel * opts.rho * sigma * weighted_consensus_norm(state.mu, state.occupancy);
  rep.satisfied = rep.primal_norm <= rep.eps_primal && rep.dual_norm <= rep.eps_dual;
  return rep;
}

Certificate certificate(const AdmmState& state, const Scenario& scenario,
                        const AdmmOptions& opts) {
  const int n = scenario.ev_count();
  const int n_feeders = scenario.feeder_count();
  const int t_len = scenario.horizon();
  const double kappa = effective_kappa(opts, scenario);

  Certificate cert;
  cert.lambda = Grid(n_feeders, t_len, 0.0);
  for (size_t k = 0; k < cert.lambda.data.size(); ++k) {
    cert.lambda.data[k] = opts.rho * state.mu.data[k];
  }

  double primal = grid_cost(state.hat_l, scenario.feeders.capacity);
  for (int i = 0; i < n; ++i) primal += ev_cost(state.p.row(i), kappa);
  cert.primal = primal;

  // Grid-side dual term; fall back to a projected price if the raw price
  // leaves the D2 cone. Any price yields a valid bound, so the projection
  // only trades tightness for finiteness.
  double d2_total = 0.0;
  bool finite = true;
  for (int s = 0; s < n_feeders && finite; ++s) {
    const auto v = solve_d2(cert.lambda.row(s), scenario.feeders.capacity.row(s));
    if (!v.finite) {
      finite = false;
    } else {
      d2_total += v.value;
    }
  }
  if (!finite) {
    if (!opts.project_prices) return cert;  // dual unavailable
    cert.projected = true;
    d2_total = 0.0;
    for (int s = 0; s < n_feeders; ++s) {
      auto row = cert.lambda.row(s);
      double sum = 0.0;
      for (double& x : row) {
        x = std::max(x, 0.0);
        sum += x;
      }
      if (sum > 1.0) {
        const double scale = (1.0 - 1e-12) / sum;
        for (double& x : row) x *= scale;
      }
      const auto v = solve_d2(row, scenario.feeders.capacity.row(s));
      if (!v.finite) return cert;  // cannot happen after projection; stay safe
      d2_total += v.value;
    }
  }

  if (n == 0) {
    cert.dual = d2_total;
    cert.rel_gap = (cert.primal - d2_total) /
                   std::max({1.0, std::abs(cert.primal), std::abs(d2_total)});
    cert.decentralized_cost = 0.0;
    return cert;
  }

  auto instances = build_d1_instances(cert.lambda, scenario, state.bounds, kappa);
  SolveBatchOptions d1 = opts.d1;
  d1.threads = threads_of(opts, opts.d1);
  d1.warm_start = false;
  const auto results = solve_batch(instances, d1);

  double q_ev = 0.0;
  Grid response(n, t_len, 0.0);
  for (int i = 0; i < n; ++i) {
    q_ev += results[i].best_dual_value;
    auto row = response.row(i);
    std::copy(results[i].p.begin(), results[i].p.end(), row.begin());
  }
  const Grid induced =
      aggregate_load(response, scenario.location, n_feeders, scenario.unit_scale);
  cert.decentralized_cost = grid_cost(induced, scenario.feeders.capacity);

  const double dual = q_ev + d2_total;
  cert.dual = dual;
  cert.rel_gap = (cert.primal - dual) / std::max({1.0, std::abs(cert.primal), std::abs(dual)});
  return cert;
}

DecentralizedResponse decentralized_response(const Grid& lambda, const Scenario& scenario,
                                             const AdmmOptions& opts) {
  const double kappa = effective_kappa(opts, scenario);
  const auto bounds = derive_all_bounds(scenario);
  auto instances = build_d1_instances(lambda, scenario, bounds, kappa);
  SolveBatchOptions d1 = opts.d1;
  d1.threads = threads_of(opts, opts.d1);
  d1.warm_start = false;
  const auto results = solve_batch(instances, d1);

  DecentralizedResponse out;
  out.profiles = Grid(scenario.ev_count(), scenario.horizon(), 0.0);
  for (int i = 0; i < scenario.ev_count(); ++i) {
    auto row = out.profiles.row(i);
    std::copy(results[i].p.begin(), results[i].p.end(), row.begin());
  }
  out.load = aggregate_load(out.profiles, scenario.location, scenario.feeder_count(),
                            scenario.unit_scale);
  out.cost = grid_cost(out.load, scenario.feeders.capacity);
  return out;
}

RunReport run(const Scenario& scenario, const AdmmOptions& opts) {
  RunReport report;
  report.kappa_used = effective_kappa(opts, scenario);
  report.state = init_state(scenario, opts);
  AdmmState& state = report.state;

  std::string stop = "max_iter";
  Certificate last_cert;
  int last_cert_iter = -1;

  auto evaluate_certificate = [&]() {
    last_cert = certificate(state, scenario, opts);
    last_cert_iter = state.iter;
    if (!state.trace.empty() && state.trace.back().iter == state.iter) {
      TraceRecord& tr = state.trace.back();
      tr.primal_objective = last_cert.primal;
      tr.gap_projected = last_cert.projected;
      tr.decentralized_cost = last_cert.decentralized_cost;
      if (last_cert.dual.has_value()) {
        tr.dual_bound = *last_cert.dual;
        tr.rel_gap = *last_cert.rel_gap;
      }
    }
  };

  while (state.iter < opts.max_iter) {
    step(state, scenario, opts);
    const bool cert_due =
        opts.certificate_period > 0 && state.iter % opts.certificate_period == 0;
    if (cert_due || state.iter == opts.max_iter) {
      evaluate_certificate();
      if (last_cert.rel_gap.has_value() && *last_cert.rel_gap <= opts.gap_tol) {
        stop = "gap_tol";
        break;
      }
    }
    if (state.trace.back().residual_ok) {
      stop = "residual";
      break;
    }
  }
  if (last_cert_iter != state.iter) evaluate_certificate();

  report.certificate = last_cert;
  report.stop_reason = stop;
  report.grid_cost_final = grid_cost(state.hat_l, scenario.feeders.capacity);
  report.ev_cost_final = 0.0;
  for (int i = 0; i < scenario.ev_count(); ++i) {
    report.ev_cost_final += ev_cost(state.p.row(i), report.kappa_used);
  }
  report.primal_objective = report.grid_cost_final + report.ev_cost_final;
  report.per_feeder_violation.resize(scenario.feeder_count());
  for (int s = 0; s < scenario.feeder_count(); ++s) {
    report.per_feeder_violation[s] =
        feeder_violation(state.hat_l.row(s), scenario.feeders.capacity.row(s));
  }
  return report;
}

}  // namespace evco
