#pragma once

#include <span>
#include <vector>

// Exact per-feeder solvers for the grid-side consensus update and the
// grid-side term of the dual bound. Both exploit the max-violation
// structure: sort-and-scan for the proximal problem, a two-check
// closed form for the dual evaluation.

namespace evco {

/// Primal-dual solution of one feeder's proximal violation problem
///   min_{v >= 0, l}  v + (rho_over_I / 2) * ||l - target||^2
///   s.t.             l_t - cap_t <= v  for all t.
struct FeederSolution {
  double v = 0.0;           // max violation, MW
  std::vector<double> load; // l, MW
  double xi0 = 0.0;         // multiplier of v >= 0
  std::vector<double> xi;   // multipliers of l - cap <= v
};

FeederSolution solve_s2(std::span<const double> target, std::span<const double> cap,
                        double rho_over_I);

/// Optimal value of  min_{v >= 0, l: l - cap <= v}  v - <price, l>,
/// which is -<price, cap> when price is in the simplex-like cone
/// {price >= 0, sum(price) <= 1} and unbounded below otherwise.
/// The unbounded case is a tagged sentinel, not a floating -inf.
/// Boundary comparisons are exact; callers wanting tolerance must
/// project the price first.
struct D2Value {
  bool finite = false;
  double value = 0.0;
};

D2Value solve_d2(std::span<const double> price, std::span<const double> cap);

}  // namespace evco
