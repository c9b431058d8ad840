#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "evco/core.hpp"
#include "evco/ev_solver.hpp"

// Sharing-form ADMM outer loop. Per iteration:
//   (S1) every EV solves a proximal subproblem toward an anchor built from
//        the consensus gap (batched, certified, always feasible),
//   (S2) every feeder solves an exact proximal violation problem,
//   (S3) a single consensus dual (shared by all EVs) ascends on the
//        aggregate mismatch.
// Global optimality is certified by a primal value at the always-feasible
// iterate and a dual lower bound assembled from per-EV dual values plus
// exact per-feeder dual evaluations.
//
// Internally the consensus runs on grid units (MW). The per-EV anchor
// gather divides by unit_scale (load-like, MW -> kW) and the price gather
// multiplies by it (price-like, per-MW -> per-kW), so a subproblem
// regularizer kappa_rho corresponds to an EV disutility weight
// kappa = kappa_rho * rho * unit_scale^2 in kW units.

namespace evco {

struct AdmmOptions {
  double rho = 1.0;         // consensus penalty
  double kappa_rho = 1e-3;  // S1 regularizer kappa/rho (consistent units)
  int max_iter = 350;
  double gap_tol = 0.10;              // relative optimality gap stop
  double eps_abs = 1e-6;              // residual stopping, absolute
  double eps_rel = 1e-6;              // residual stopping, relative
  int certificate_period = 10;        // iterations between certificates
  bool project_prices = true;         // project lambda for D2 finiteness
  SolveBatchOptions s1;               // inner solver for the primal step
  SolveBatchOptions d1;               // inner solver for dual bounds
  uint64_t seed = 0;                  // recorded for reproducibility
  int threads = 0;

  AdmmOptions() {
    d1.max_iter = 400;
    d1.tol = 1e-4;
    d1.warm_start = false;
  }
};

/// EV disutility weight implied by (rho, kappa_rho) in kW units.
double effective_kappa(const AdmmOptions& opts, const Scenario& scenario);

struct TraceRecord {
  int iter = 0;
  double grid_cost_hat = 0.0;        // violations of the aggregate load
  double grid_cost_consensus = 0.0;  // violations of the consensus load
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool residual_ok = false;
  // Filled on certificate iterations; NaN otherwise.
  double rel_gap = std::numeric_limits<double>::quiet_NaN();
  double primal_objective = std::numeric_limits<double>::quiet_NaN();
  double dual_bound = std::numeric_limits<double>::quiet_NaN();
  bool gap_projected = false;
  double decentralized_cost = std::numeric_limits<double>::quiet_NaN();
};

struct AdmmState {
  Grid p;      // I x T, kW; every row feasible for its EV
  Grid l;      // S x T, MW (consensus load)
  Grid mu;     // S x T (scaled consensus dual)
  Grid hat_l;  // S x T, MW (aggregate of p)
  int iter = 0;
  std::vector<DualIterate> warm_duals;
  std::vector<TraceRecord> trace;

  // Caches built at init: cumulative bounds per EV, occupancy counts, and
  // reusable subproblem shells (anchors are patched in place per iteration).
  std::vector<CumulativeBounds> bounds;
  Grid occupancy;
  std::vector<EvInstance> s1_instances;
};

struct Certificate {
  double primal = 0.0;
  std::optional<double> dual;     // empty when D2 is unbounded unprojected
  std::optional<double> rel_gap;  // empty iff dual is
  Grid lambda;                    // price the bound was evaluated at
  bool projected = false;         // lambda was projected for D2 finiteness
  double decentralized_cost = std::numeric_limits<double>::quiet_NaN();
};

struct ResidualReport {
  double primal_norm = 0.0;
  double dual_norm = 0.0;
  double eps_primal = 0.0;
  double eps_dual = 0.0;
  bool satisfied = false;
};

AdmmState init_state(const Scenario& scenario, const AdmmOptions& opts);

/// One full (S1)-(S2)-(S3) iteration; appends a trace record with
/// objective and residual norms.
void step(AdmmState& state, const Scenario& scenario, const AdmmOptions& opts);

/// Appendix-style weighted residual norms between two consecutive states.
ResidualReport residuals(const AdmmState& state, const AdmmState& prev, const Scenario& scenario,
                         const AdmmOptions& opts);

/// Primal value and dual lower bound at the current iterate, with optional
/// price projection fallback when the raw price makes D2 unbounded.
Certificate certificate(const AdmmState& state, const Scenario& scenario,
                        const AdmmOptions& opts);

struct DecentralizedResponse {
  Grid profiles;  // I x T, kW (feasible best responses)
  Grid load;      // S x T, MW
  double cost = 0.0;
};

/// Per-EV best responses to a price field (batched D1 solves), their
/// induced aggregate load and its grid cost.
DecentralizedResponse decentralized_response(const Grid& lambda, const Scenario& scenario,
                                             const AdmmOptions& opts);

struct RunReport {
  AdmmState state;
  Certificate certificate;
  std::string stop_reason;  // "gap_tol", "residual" or "max_iter"
  double primal_objective = 0.0;
  double grid_cost_final = 0.0;
  double ev_cost_final = 0.0;
  std::vector<double> per_feeder_violation;
  double kappa_used = 0.0;
};

RunReport run(const Scenario& scenario, const AdmmOptions& opts);

}  // namespace evco
