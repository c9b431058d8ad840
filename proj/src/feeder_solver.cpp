#include "evco/feeder_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "evco/core.hpp"

namespace evco {

FeederSolution solve_s2(std::span<const double> target, std::span<const double> cap,
                        double rho_over_I) {
  const size_t t_len = target.size();
  if (cap.size() != t_len) throw StructuralError("solve_s2: length mismatch");
  if (!(rho_over_I > 0.0)) throw StructuralError("solve_s2: rho_over_I must be > 0");

  std::vector<double> delta(t_len);
  for (size_t t = 0; t < t_len; ++t) delta[t] = target[t] - cap[t];

  // Stable descending sort of the surpluses.
  std::vector<double> sorted(delta);
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<double>());

  double pos_sum = 0.0;
  for (double d : sorted) {
    if (d > 0.0) pos_sum += d;
  }

  FeederSolution sol;
  if (rho_over_I * pos_sum <= 1.0) {
    sol.v = 0.0;
    sol.xi0 = 1.0 - rho_over_I * pos_sum;
  } else {
    // The stationarity curve Xi(v) = rho_over_I * sum_t [delta_t - v]^+ is
    // piecewise linear and strictly decreasing on [0, max delta]; scan the
    // sorted breakpoint intervals (half-open on the left, per the
    // uniqueness argument) for the one containing Xi(v) = 1.
    bool found = false;
    double run = 0.0;
    double best_v = 0.0, best_err = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < t_len; ++k) {
      run += sorted[k];
      const double hi = sorted[k];
      const double lo = (k + 1 < t_len) ? std::max(sorted[k + 1], 0.0) : 0.0;
      if (hi <= 0.0) break;
      const double cand = (run - 1.0 / rho_over_I) / static_cast<double>(k + 1);
      if (cand > lo && cand <= hi) {
        sol.v = cand;
        found = true;
        break;
      }
      // Track the nearest clamped candidate in case rounding makes every
      // membership test miss at a breakpoint tie.
      const double clamped = std::min(std::max(cand, lo), hi);
      double xi_at = 0.0;
      for (double d : delta) xi_at += std::max(d - clamped, 0.0);
      const double err = std::abs(rho_over_I * xi_at - 1.0);
      if (err < best_err) {
        best_err = err;
        best_v = clamped;
      }
    }
    if (!found) sol.v = best_v;
    sol.xi0 = 0.0;
  }

  sol.load.resize(t_len);
  sol.xi.resize(t_len);
  for (size_t t = 0; t < t_len; ++t) {
    sol.load[t] = std::min(cap[t] + sol.v, target[t]);
    sol.xi[t] = rho_over_I * std::max(delta[t] - sol.v, 0.0);
  }
  return sol;
}

D2Value solve_d2(std::span<const double> price, std::span<const double> cap) {
  if (cap.size() != price.size()) throw StructuralError("solve_d2: length mismatch");
  double sum = 0.0;
  double min_p = 0.0;
  for (double x : price) {
    sum += x;
    min_p = std::min(min_p, x);
  }
  if (sum > 1.0 || min_p < 0.0) return {false, 0.0};
  double dot = 0.0;
  for (size_t t = 0; t < price.size(); ++t) dot += price[t] * cap[t];
  return {true, -dot};
}

}  // namespace evco
