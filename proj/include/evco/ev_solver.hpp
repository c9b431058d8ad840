#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evco/core.hpp"

// Batched certified solver for the per-EV subproblems. Both variants are
// strongly convex quadratics over the box + cumulative-band polytope:
//
//   S1:  min  1/2 ||p - anchor||^2 + reg/2 ||p||^2      (reg = kappa/rho)
//   D1:  min  reg/2 ||p||^2 + <anchor, p>               (reg = kappa)
//
// subject to p in X. The band constraints are dualized; the inner
// box-constrained minimizer has a closed form, and the concave dual is
// maximized by projected Adam (default) or plain projected gradient
// ascent. Every returned profile is refined to exact feasibility and
// certified with a per-instance relative duality gap.

namespace evco {

enum class EvVariant : uint8_t { S1, D1 };
enum class Optimizer : uint8_t { Adam, PGA };

struct EvInstance {
  EvVariant variant = EvVariant::S1;
  std::vector<double> anchor;  // b-tilde for S1, price gather c for D1
  double reg = 1e-3;           // must be > 0 (strong convexity)
  CumulativeBounds bounds;
};

/// Dual iterate of one instance: multipliers of the lower/upper cumulative
/// band constraints plus Adam moments. Stays in the nonnegative orthant.
struct DualIterate {
  std::vector<double> u_lo, u_hi;      // length T each
  std::vector<double> adam_m, adam_v;  // length 2T, [lo | hi]
  long step_count = 0;

  static DualIterate zeros(int t_len) {
    DualIterate d;
    d.u_lo.assign(t_len, 0.0);
    d.u_hi.assign(t_len, 0.0);
    d.adam_m.assign(2 * t_len, 0.0);
    d.adam_v.assign(2 * t_len, 0.0);
    return d;
  }
};

struct AdamHyper {
  double eta = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct SubproblemResult {
  std::vector<double> p;         // feasible profile (post projection)
  double gap = 0.0;              // relative duality gap at termination
  double dual_value = 0.0;       // psi at the final iterate
  double best_dual_value = 0.0;  // max psi seen (valid lower bound)
  double primal_value = 0.0;     // objective at p
  int iterations = 0;
  bool converged = false;
};

struct SolveBatchOptions {
  Optimizer optimizer = Optimizer::Adam;
  AdamHyper adam;
  double pga_eta = 0.0;  // <= 0 means 1/L_psi per instance
  double tol = 1e-3;
  int max_iter = 200;
  int mask_period = 20;
  bool masking = true;
  bool warm_start = true;
  int threads = 0;  // 0 = hardware concurrency
};

/// Closed-form minimizer of the inner box-constrained Lagrangian at dual u.
std::vector<double> closed_form_primal(const DualIterate& u, const EvInstance& inst);

/// Dual function value psi(u) and its gradient [s_min - Hp; Hp - s_max],
/// both from a single closed-form primal evaluation.
struct DualEval {
  double psi = 0.0;
  std::vector<double> grad;  // length 2T, [lo | hi]
};
DualEval dual_value_grad(const DualIterate& u, const EvInstance& inst);

/// Objective of the instance at a (feasible) point.
double instance_objective(std::span<const double> p, const EvInstance& inst);

/// Relative duality gap (Phi(p) - psi(u)) / max{|Phi|, |psi|, 1}.
/// Throws if p_feas violates the instance's feasible set beyond 1e-9 kWh.
double duality_gap(std::span<const double> p_feas, const DualIterate& u, const EvInstance& inst);

/// Feasible-direction gradient at u: ([u + eps*g]^+ - u) / eps with
/// eps = 1e-8. Zeroes components that would push an active coordinate
/// below zero.
std::vector<double> projected_gradient(std::span<const double> u, std::span<const double> g);

/// One projected Adam step (moment updates, bias correction with
/// step_count+1, ascent, clamp to the nonnegative orthant).
DualIterate adam_update(const DualIterate& state, std::span<const double> g_proj,
                        const AdamHyper& hyper);

/// Smoothness constant of the dual: 2 ||H||^2 / (1 + reg) for S1 and
/// 2 ||H||^2 / reg for D1, with ||H||^2 = 1 / (4 sin^2(pi / (4T + 2))).
double lipschitz_constant(int t_len, EvVariant variant, double reg);

/// Largest eigenvalue of H H^T for the prefix-sum operator, by power
/// iteration. Reference check for lipschitz_constant.
double prefix_operator_norm_sq_power_iteration(int t_len, double rel_tol = 1e-9,
                                               int max_iter = 100000);

/// Solve a batch of instances. Data-parallel across instances with
/// structure-of-arrays packing and active-set compaction every
/// mask_period iterations; results are identical whether or not masking
/// is enabled (masking only skips work on frozen instances). If
/// warm_starts is non-null and sized like `instances`, dual iterates are
/// read from and written back to it (moments are reset per call).
std::vector<SubproblemResult> solve_batch(const std::vector<EvInstance>& instances,
                                          const SolveBatchOptions& opts,
                                          std::vector<DualIterate>* warm_starts = nullptr,
                                          long* total_inner_iterations = nullptr);

}  // namespace evco
