#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evco/core.hpp"

// Synthetic scenario generation with feasibility guaranteed by
// construction, CSV ingestion/serialization, the unmanaged rule-based
// charging baseline, and reporting metrics.

namespace evco {

/// Generator knobs. Every EV gets its own RNG stream derived from
/// (seed, ev index), so generation is reproducible and order-independent.
struct GenConfig {
  int n_evs = 1000;
  int n_feeders = 20;
  int horizon = 168;        // hourly slots
  double charger_kw = 10.0; // charger power at every stay

  double battery_kwh_min = 40.0;
  double battery_kwh_max = 100.0;
  double soc_init_min = 0.5;  // fraction of battery at t = 0
  double soc_init_max = 0.9;

  // Trip model: weekday commutes plus occasional errand/weekend trips.
  double commuter_prob = 0.7;
  double extra_trip_prob = 0.35;    // per weekday, an extra evening errand
  double weekend_trip_prob = 0.6;   // per weekend day
  double night_owl_prob = 0.12;     // commuters returning late at night
  double trip_energy_kwh_min = 2.0;
  double trip_energy_kwh_max = 14.0;
  int trip_slots_min = 1;
  int trip_slots_max = 3;
  double work_weight_alpha = 0.8;  // work feeders concentrate on low indices
  double home_weight_alpha = 0.0;  // 0 = uniform

  // Capacity model: two-level diurnal shape with multiplicative
  // feeder heterogeneity.
  double capacity_base_mw = 0.10;
  double capacity_day_factor = 0.55;   // 08:00-20:00
  double capacity_night_factor = 1.0;  // otherwise
  double feeder_spread = 2.0;          // heterogeneity in [1/spread, spread]

  uint64_t seed = 1;
};

/// Key=value lines in a fixed order; hashed into manifests and reports.
std::vector<std::string> describe_config(const GenConfig& config);

/// Throws StructuralError naming the offending parameter.
void validate_config(const GenConfig& config);

Scenario generate_scenario(const GenConfig& config);

struct LoadResult {
  Scenario scenario;
  std::vector<std::string> warnings;  // dropped-EV notices
};

/// Write evs.csv, trajectory.csv and feeders.csv into `dir`.
void save_scenario(const Scenario& scenario, const std::filesystem::path& dir);

/// Read a scenario from `dir`. Structural problems throw; EVs with an
/// empty feasible set are dropped with a warning.
LoadResult load_scenario(const std::filesystem::path& dir);

/// Unmanaged charging baseline: on arrival with SOC below 50% of capacity,
/// charge at full power until 100%; otherwise charge at the minimum power
/// that keeps the remaining trajectory feasible. Output is I x T (kW) and
/// always mobility-feasible.
Grid asap_plus(const Scenario& scenario);

struct MetricsReport {
  double total_max_violation = 0.0;  // MW
  std::vector<double> per_feeder_violation;
  int feeders_over_threshold = 0;
  double threshold = 0.1;
  std::optional<double> pvr_load;      // peak/valley of aggregate load
  std::optional<double> pvr_overload;  // peak/valley of aggregate overload
};

MetricsReport metrics(const Grid& loads, const Grid& caps, double threshold = 0.1);

}  // namespace evco
