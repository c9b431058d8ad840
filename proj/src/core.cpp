#include "evco/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace evco {

CumulativeBounds bounds_from_cumulative(std::vector<double> p_min, std::vector<double> p_max,
                                        std::vector<double> s_min, std::vector<double> s_max) {
  const size_t t_len = p_min.size();
  if (t_len == 0) throw StructuralError("bounds horizon must be >= 1");
  if (p_max.size() != t_len || s_min.size() != t_len || s_max.size() != t_len) {
    throw StructuralError("bounds vectors must all have length T");
  }
  CumulativeBounds b;
  b.p_min = std::move(p_min);
  b.p_max = std::move(p_max);
  b.s_min = std::move(s_min);
  b.s_max = std::move(s_max);
  b.c_min.resize(t_len);
  b.c_max.resize(t_len);
  b.b_min.resize(t_len);
  b.b_max.resize(t_len);

  double c_lo = 0.0, c_hi = 0.0;
  for (size_t t = 0; t < t_len; ++t) {
    c_lo += b.p_min[t];
    c_hi += b.p_max[t];
    b.c_min[t] = c_lo;
    b.c_max[t] = c_hi;
    // Normalize the band into the power prefix cone. prefix(p) always lies
    // in [c_min, c_max], so this tightening leaves the feasible set
    // unchanged and makes the four-chain comparison an exact necessity
    // test.
    b.s_min[t] = std::max(b.s_min[t], c_lo);
    b.s_max[t] = std::min(b.s_max[t], c_hi);
  }

  // Backward pass: envelopes b_min = c_max + max_{tau>=t}(s_min - c_max),
  // b_max = c_min + min_{tau>=t}(s_max - c_min).
  double g_lo = -std::numeric_limits<double>::infinity();
  double g_hi = std::numeric_limits<double>::infinity();
  for (size_t rt = t_len; rt-- > 0;) {
    g_lo = std::max(g_lo, b.s_min[rt] - b.c_max[rt]);
    g_hi = std::min(g_hi, b.s_max[rt] - b.c_min[rt]);
    b.b_min[rt] = b.c_max[rt] + g_lo;
    b.b_max[rt] = b.c_min[rt] + g_hi;
  }
  return b;
}

CumulativeBounds derive_bounds(const EvProfile& profile) {
  const size_t t_len = profile.p_min.size();
  if (t_len == 0) throw StructuralError("profile horizon must be >= 1");
  if (profile.p_max.size() != t_len || profile.e_min.size() != t_len ||
      profile.e_max.size() != t_len || profile.demand.size() != t_len) {
    throw StructuralError("profile vectors must all have length T (ev " + profile.id + ")");
  }

  std::vector<double> s_min(t_len), s_max(t_len);
  double cum_demand = 0.0;
  for (size_t t = 0; t < t_len; ++t) {
    cum_demand += profile.demand[t];
    s_min[t] = profile.e_min[t] - profile.e_init + cum_demand;
    s_max[t] = profile.e_max[t] - profile.e_init + cum_demand;
  }
  return bounds_from_cumulative(profile.p_min, profile.p_max, std::move(s_min), std::move(s_max));
}

bool check_necessary(const CumulativeBounds& b) {
  for (size_t t = 0; t < b.p_min.size(); ++t) {
    if (b.p_min[t] > b.p_max[t]) return false;
    if (b.c_min[t] > b.s_min[t]) return false;
    if (b.s_min[t] > b.s_max[t]) return false;
    if (b.s_max[t] > b.c_max[t]) return false;
  }
  return true;
}

bool is_feasible(const CumulativeBounds& b) {
  for (size_t t = 0; t < b.b_min.size(); ++t) {
    if (b.b_min[t] > b.b_max[t]) return false;
  }
  return true;
}

std::optional<std::vector<double>> project_feasible(std::span<const double> target,
                                                    const CumulativeBounds& b) {
  const size_t t_len = b.p_min.size();
  if (target.size() != t_len) throw StructuralError("projection target has wrong length");
  if (!check_necessary(b) || !is_feasible(b)) return std::nullopt;

  std::vector<double> p(t_len);
  double s = 0.0;  // running cumulative sum of the output
  for (size_t t = 0; t < t_len; ++t) {
    const double beta_lo = std::max(b.b_min[t], s + b.p_min[t]);
    const double beta_hi = std::min(b.b_max[t], s + b.p_max[t]);
    const double raw = s + target[t];
    if (raw >= beta_lo && raw <= beta_hi) {
      p[t] = target[t];  // pass through untouched so feasible targets round-trip exactly
    } else {
      // Canonical clip order (upper bound wins) so that re-projecting the
      // output reproduces it bit for bit even when rounding leaves the
      // band a few ulps wide or inverted.
      const double s_next = std::min(std::max(raw, beta_lo), beta_hi);
      p[t] = s_next - s;
    }
    s += p[t];
  }
  return p;
}

bool satisfies_constraints(std::span<const double> p, const CumulativeBounds& b, double tol) {
  if (p.size() != b.p_min.size()) return false;
  double s = 0.0;
  for (size_t t = 0; t < p.size(); ++t) {
    if (p[t] < b.p_min[t] - tol || p[t] > b.p_max[t] + tol) return false;
    s += p[t];
    if (s < b.s_min[t] - tol || s > b.s_max[t] + tol) return false;
  }
  return true;
}

double ev_cost(std::span<const double> p, double kappa) {
  double ss = 0.0;
  for (double x : p) ss += x * x;
  return 0.5 * kappa * ss;
}

double feeder_violation(std::span<const double> load, std::span<const double> cap) {
  if (load.size() != cap.size()) throw StructuralError("feeder_violation: length mismatch");
  double v = 0.0;
  for (size_t t = 0; t < load.size(); ++t) v = std::max(v, load[t] - cap[t]);
  return v;
}

double grid_cost(const Grid& loads, const Grid& caps) {
  if (loads.rows != caps.rows || loads.cols != caps.cols) {
    throw StructuralError("grid_cost: shape mismatch");
  }
  double total = 0.0;
  for (int s = 0; s < loads.rows; ++s) total += feeder_violation(loads.row(s), caps.row(s));
  return total;
}

Grid aggregate_load(const Grid& profiles_kw, const LocationMap& location, int n_feeders,
                    double unit_scale) {
  if (profiles_kw.rows != location.rows || profiles_kw.cols != location.cols) {
    throw StructuralError("aggregate_load: profile/location shape mismatch");
  }
  Grid out(n_feeders, location.cols, 0.0);
  for (int i = 0; i < location.rows; ++i) {
    for (int t = 0; t < location.cols; ++t) {
      const int32_t s = location.at(i, t);
      if (s == LocationMap::kAway) continue;
      out(s, t) += unit_scale * profiles_kw(i, t);
    }
  }
  return out;
}

Grid occupancy_counts(const LocationMap& location, int n_feeders) {
  Grid n(n_feeders, location.cols, 0.0);
  for (int i = 0; i < location.rows; ++i) {
    for (int t = 0; t < location.cols; ++t) {
      const int32_t s = location.at(i, t);
      if (s != LocationMap::kAway) n(s, t) += 1.0;
    }
  }
  return n;
}

double weighted_consensus_norm(const Grid& m, const Grid& n) {
  if (m.rows != n.rows || m.cols != n.cols) {
    throw StructuralError("weighted_consensus_norm: shape mismatch");
  }
  double ss = 0.0;
  for (size_t k = 0; k < m.data.size(); ++k) ss += n.data[k] * m.data[k] * m.data[k];
  return std::sqrt(ss);
}

}  // namespace evco
