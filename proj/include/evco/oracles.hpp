#pragma once

#include <cstdint>
#include <vector>

#include "evco/admm.hpp"
#include "evco/core.hpp"
#include "evco/ev_solver.hpp"

// Independent reference oracles used by tests and the acceptance suite.
// Never on the hot path. Oracle failures are test-infrastructure failures
// and throw, rather than degrading into product results.

namespace evco {

struct OracleFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct S1OracleResult {
  std::vector<double> p;    // certified primal solution
  double objective = 0.0;   // Phi at p
  double gap = 0.0;         // certified relative duality gap (<= tol)
  DualIterate dual;         // final dual iterate
  long iterations = 0;
};

/// Certified reference solve of one EV subproblem: projected gradient
/// ascent with the provably safe step 1/L_psi, run until the relative
/// duality gap certificate drops below tol. Independent of the Adam path.
S1OracleResult oracle_s1(const EvInstance& inst, double tol = 1e-6,
                         long max_iterations = 10000000);

/// Golden-section search for the feeder violation level minimizing
/// f(v) = v + rho_over_I/2 * sum_t([target-cap-v]^+)^2 over
/// [0, max_t[target-cap]^+].
double oracle_s2(std::span<const double> target, std::span<const double> cap, double rho_over_I,
                 double tol = 1e-10);

/// Iterate trace of the unreduced consensus ADMM with materialized routing
/// tensors and one dual per EV, for equivalence testing against the
/// reduced sharing-form loop. Restricted to micro instances.
struct DenseAdmmTrace {
  // Per iteration k (0-based after the k-th update):
  std::vector<Grid> p;                  // I x T, kW
  std::vector<Grid> z_bar;              // S x T (mean auxiliary variable)
  std::vector<std::vector<Grid>> mu_i;  // per-EV duals, S x T
  std::vector<double> mu_consensus_spread;  // max_i max-abs deviation from mu_0
};

DenseAdmmTrace dense_admm_small(const Scenario& scenario, const AdmmOptions& opts, int iters);

/// Ground-truth-labeled feasibility instances: witness-embedded feasible
/// sets, analytically infeasible energy-deficit sets and the
/// necessary-passes-but-empty pattern.
struct LabeledInstance {
  CumulativeBounds bounds;
  bool feasible = false;
  std::vector<double> witness;  // nonempty iff feasible
};

std::vector<LabeledInstance> labeled_feasibility_instances(uint64_t seed, int count,
                                                           int t_min = 1, int t_max = 12);

/// Exhaustive integer-lattice feasibility search for small instances with
/// integer bounds (completeness check for the envelope test).
bool lattice_feasible(const CumulativeBounds& bounds);

}  // namespace evco
