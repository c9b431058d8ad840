#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain model for coordinated EV charging: per-EV feasible sets in
// cumulative-energy form, an O(T) feasibility oracle, a greedy projection
// onto the feasible polytope, and the grid/EV objective pieces.
//
// Unit conventions: one slot = one hour, so kW and kWh/slot are numerically
// interchangeable. EV-side quantities are kW/kWh; grid-side quantities are
// MW/MWh. The kW->MW conversion happens in aggregate_load (and nowhere else
// on the aggregation path).

namespace evco {

// Dense row-major matrix of doubles. Small utility; no linear algebra.
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Grid() = default;
  Grid(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  std::span<double> row(int r) {
    return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
};

/// Per-EV charging flexibility over the horizon: power box, battery energy
/// band, initial energy and driving consumption. All vectors have length T.
struct EvProfile {
  std::string id;
  std::vector<double> p_min;   // kW
  std::vector<double> p_max;   // kW
  std::vector<double> e_min;   // kWh
  std::vector<double> e_max;   // kWh
  std::vector<double> demand;  // kWh consumed while driving, per slot
  double e_init = 0.0;         // kWh at the start of the horizon

  int horizon() const { return static_cast<int>(p_min.size()); }
};

/// Cumulative-sum rewrite of an EvProfile's feasible set:
///   X = { p : p_min <= p <= p_max, s_min <= prefix(p) <= s_max }
/// plus the backward envelopes b_min/b_max used by the feasibility oracle
/// and the greedy projection.
struct CumulativeBounds {
  std::vector<double> p_min, p_max;  // power box (kW)
  std::vector<double> s_min, s_max;  // cumulative-charge band (kWh)
  std::vector<double> c_min, c_max;  // prefix sums of the power box
  std::vector<double> b_min, b_max;  // backward envelopes

  int horizon() const { return static_cast<int>(p_min.size()); }
};

/// EV-to-feeder assignment per slot. kAway marks slots where the EV is in
/// transit (or outside the modeled region) and must not charge.
struct LocationMap {
  static constexpr int32_t kAway = -1;

  int rows = 0;  // EVs
  int cols = 0;  // slots
  std::vector<int32_t> entry;

  LocationMap() = default;
  LocationMap(int r, int c, int32_t fill = kAway)
      : rows(r), cols(c), entry(static_cast<size_t>(r) * c, fill) {}

  int32_t& at(int i, int t) { return entry[static_cast<size_t>(i) * cols + t]; }
  int32_t at(int i, int t) const { return entry[static_cast<size_t>(i) * cols + t]; }
};

/// Time-varying hosting capacity per feeder (MW).
struct FeederSeries {
  Grid capacity;  // S x T, MW
  std::vector<std::string> ids;

  int count() const { return capacity.rows; }
  int horizon() const { return capacity.cols; }
};

/// A full problem instance: EV population, location map, feeder capacities
/// and cost parameters.
struct Scenario {
  std::vector<EvProfile> profiles;
  LocationMap location;
  FeederSeries feeders;
  double kappa = 1e-9;       // EV disutility weight, cost per kW^2
  double unit_scale = 1e-3;  // kW -> MW

  int ev_count() const { return static_cast<int>(profiles.size()); }
  int feeder_count() const { return feeders.count(); }
  int horizon() const { return feeders.horizon(); }
};

/// Thrown on malformed inputs (dimension mismatches, schema violations).
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Derive the cumulative form of a profile's feasible set. One forward
/// prefix-sum pass and one backward min/max pass, O(T).
CumulativeBounds derive_bounds(const EvProfile& profile);

/// Assemble bounds from an explicit power box and cumulative band
/// (computes the prefix sums and backward envelopes).
CumulativeBounds bounds_from_cumulative(std::vector<double> p_min, std::vector<double> p_max,
                                        std::vector<double> s_min, std::vector<double> s_max);

/// Necessary condition for X to be nonempty:
/// p_min <= p_max and c_min <= s_min <= s_max <= c_max, elementwise.
bool check_necessary(const CumulativeBounds& bounds);

/// Envelope test b_min <= b_max. Together with check_necessary this is an
/// exact emptiness test for X. Callers must gate on check_necessary.
bool is_feasible(const CumulativeBounds& bounds);

/// Greedy projection of `target` onto X: clips the running cumulative sum
/// into the envelope band slot by slot. Returns nullopt iff X is empty.
/// If target is already strictly feasible the output equals it bit-exactly,
/// and the projection is idempotent.
std::optional<std::vector<double>> project_feasible(std::span<const double> target,
                                                    const CumulativeBounds& bounds);

/// True if p satisfies every constraint of the feasible set within `tol`
/// (absolute, kWh). Used by contract checks and tests.
bool satisfies_constraints(std::span<const double> p, const CumulativeBounds& bounds,
                           double tol = 1e-9);

/// EV disutility kappa/2 * ||p||^2.
double ev_cost(std::span<const double> p, double kappa);

/// Peak overload of one feeder: max_t [load_t - cap_t]^+, MW.
double feeder_violation(std::span<const double> load, std::span<const double> cap);

/// Total max-violation over feeders (the grid objective), MW.
double grid_cost(const Grid& loads, const Grid& caps);

/// Aggregate per-EV charging (I x T, kW) onto feeders (S x T, MW).
/// Per-cell summation runs in ascending EV order so results are
/// bit-reproducible for a fixed scenario.
Grid aggregate_load(const Grid& profiles_kw, const LocationMap& location, int n_feeders,
                    double unit_scale);

/// Per-slot occupancy counts N[s][t] = |{i : location(i,t) == s}|.
Grid occupancy_counts(const LocationMap& location, int n_feeders);

/// ||M .* sqrt(N)||_F, the weighted consensus norm used by the residual
/// stopping criterion.
double weighted_consensus_norm(const Grid& m, const Grid& n);

}  // namespace evco
