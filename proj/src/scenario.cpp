#include "evco/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace evco {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream_for(uint64_t seed, uint64_t salt, uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(salt * 0x9e3779b97f4a7c15ULL + index)));
}

int weighted_pick(std::mt19937_64& rng, int count, double alpha) {
  if (alpha <= 0.0) return static_cast<int>(std::uniform_int_distribution<int>(0, count - 1)(rng));
  std::vector<double> w(count);
  double total = 0.0;
  for (int s = 0; s < count; ++s) {
    w[s] = std::pow(static_cast<double>(s + 1), -alpha);
    total += w[s];
  }
  double r = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (int s = 0; s < count; ++s) {
    r -= w[s];
    if (r <= 0.0) return s;
  }
  return count - 1;
}

struct Trip {
  int start = 0;  // first AWAY slot
  int slots = 1;
  double energy = 0.0;
  int dest;  // feeder index after the trip, or -2 for "return to origin"
};

}  // namespace

std::vector<std::string> describe_config(const GenConfig& c) {
  std::vector<std::string> out;
  auto add = [&out](const std::string& k, const std::string& v) { out.push_back(k + "=" + v); };
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  add("n_evs", std::to_string(c.n_evs));
  add("n_feeders", std::to_string(c.n_feeders));
  add("horizon", std::to_string(c.horizon));
  add("charger_kw", num(c.charger_kw));
  add("battery_kwh_min", num(c.battery_kwh_min));
  add("battery_kwh_max", num(c.battery_kwh_max));
  add("soc_init_min", num(c.soc_init_min));
  add("soc_init_max", num(c.soc_init_max));
  add("commuter_prob", num(c.commuter_prob));
  add("extra_trip_prob", num(c.extra_trip_prob));
  add("weekend_trip_prob", num(c.weekend_trip_prob));
  add("night_owl_prob", num(c.night_owl_prob));
  add("trip_energy_kwh_min", num(c.trip_energy_kwh_min));
  add("trip_energy_kwh_max", num(c.trip_energy_kwh_max));
  add("trip_slots_min", std::to_string(c.trip_slots_min));
  add("trip_slots_max", std::to_string(c.trip_slots_max));
  add("work_weight_alpha", num(c.work_weight_alpha));
  add("home_weight_alpha", num(c.home_weight_alpha));
  add("capacity_base_mw", num(c.capacity_base_mw));
  add("capacity_day_factor", num(c.capacity_day_factor));
  add("capacity_night_factor", num(c.capacity_night_factor));
  add("feeder_spread", num(c.feeder_spread));
  add("seed", std::to_string(c.seed));
  return out;
}

void validate_config(const GenConfig& c) {
  auto fail = [](const std::string& msg) { throw StructuralError("generator config: " + msg); };
  if (c.n_evs < 1) fail("n_evs must be >= 1");
  if (c.n_feeders < 1) fail("n_feeders must be >= 1");
  if (c.horizon < 1) fail("horizon must be >= 1");
  if (!(c.charger_kw > 0.0)) fail("charger_kw must be > 0");
  if (!(c.battery_kwh_min > 0.0)) fail("battery_kwh_min must be > 0");
  if (c.battery_kwh_max < c.battery_kwh_min) fail("battery_kwh_max must be >= battery_kwh_min");
  if (c.soc_init_min < 0.0 || c.soc_init_max > 1.0 || c.soc_init_max < c.soc_init_min) {
    fail("soc_init_min/soc_init_max must satisfy 0 <= min <= max <= 1");
  }
  if (c.trip_energy_kwh_min < 0.0) fail("trip_energy_kwh_min must be >= 0");
  if (c.trip_energy_kwh_max < c.trip_energy_kwh_min) {
    fail("trip_energy_kwh_max must be >= trip_energy_kwh_min");
  }
  if (c.trip_energy_kwh_max > c.battery_kwh_min) {
    fail("trip_energy_kwh_max exceeds battery_kwh_min; single trips must fit the smallest battery");
  }
  if (c.trip_slots_min < 1 || c.trip_slots_max < c.trip_slots_min) {
    fail("trip_slots_min/trip_slots_max must satisfy 1 <= min <= max");
  }
  for (double p : {c.commuter_prob, c.extra_trip_prob, c.weekend_trip_prob, c.night_owl_prob}) {
    if (p < 0.0 || p > 1.0) fail("trip probabilities must lie in [0, 1]");
  }
  if (!(c.capacity_base_mw > 0.0)) fail("capacity_base_mw must be > 0");
  if (!(c.capacity_day_factor > 0.0)) fail("capacity_day_factor must be > 0");
  if (!(c.capacity_night_factor > 0.0)) fail("capacity_night_factor must be > 0");
  if (!(c.feeder_spread >= 1.0)) fail("feeder_spread must be >= 1");
}

Scenario generate_scenario(const GenConfig& config) {
  validate_config(config);
  const int t_len = config.horizon;
  const int days = t_len / 24;

  Scenario sc;
  sc.location = LocationMap(config.n_evs, t_len, LocationMap::kAway);
  sc.profiles.resize(config.n_evs);

  for (int i = 0; i < config.n_evs; ++i) {
    auto rng = stream_for(config.seed, 1, static_cast<uint64_t>(i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int home = weighted_pick(rng, config.n_feeders, config.home_weight_alpha);
    const int work = weighted_pick(rng, config.n_feeders, config.work_weight_alpha);
    const bool commuter = unit(rng) < config.commuter_prob;

    std::vector<int> loc(t_len, home);
    std::vector<double> demand(t_len, 0.0);

    auto trip_len = [&rng, &config]() {
      return std::uniform_int_distribution<int>(config.trip_slots_min, config.trip_slots_max)(rng);
    };
    auto trip_energy = [&rng, &config]() {
      return std::uniform_real_distribution<double>(config.trip_energy_kwh_min,
                                                    config.trip_energy_kwh_max)(rng);
    };
    // Marks [start, start+slots) AWAY and the remainder of the day at
    // `dest`; skips trips that would overlap an existing one.
    auto place_trip = [&](int start, int slots, double energy, int dest, int day_end) {
      if (start < 0 || start + slots > day_end) return;
      for (int t = start; t < start + slots; ++t) {
        if (loc[t] == LocationMap::kAway) return;
      }
      for (int t = start; t < start + slots; ++t) {
        loc[t] = LocationMap::kAway;
        demand[t] += energy / slots;
      }
      for (int t = start + slots; t < day_end; ++t) {
        if (loc[t] != LocationMap::kAway) loc[t] = dest;
      }
    };

    for (int d = 0; d < days; ++d) {
      const int day0 = 24 * d;
      const bool weekend = (d % 7 == 5) || (d % 7 == 6);
      if (commuter && !weekend) {
        std::normal_distribution<double> morning(8.0, 1.2);
        const int go = day0 + std::clamp(static_cast<int>(std::lround(morning(rng))), 5, 11);
        place_trip(go, trip_len(), trip_energy(), work, t_len);
        const bool night_owl = unit(rng) < config.night_owl_prob;
        std::normal_distribution<double> evening(night_owl ? 23.0 : 17.5, 1.5);
        const int back = day0 + std::clamp(static_cast<int>(std::lround(evening(rng))), 14, 26);
        place_trip(back, trip_len(), trip_energy(), home, t_len);
      }
      if (!weekend && unit(rng) < config.extra_trip_prob) {
        const int start = day0 + std::uniform_int_distribution<int>(9, 21)(rng);
        place_trip(start, trip_len(), trip_energy(), loc[std::min(start, t_len - 1)], t_len);
      }
      if (weekend && unit(rng) < config.weekend_trip_prob) {
        const int start = day0 + std::uniform_int_distribution<int>(8, 20)(rng);
        place_trip(start, trip_len(), trip_energy(), home, t_len);
      }
    }

    const double battery = std::uniform_real_distribution<double>(config.battery_kwh_min,
                                                                  config.battery_kwh_max)(rng);
    const double e_init =
        battery *
        std::uniform_real_distribution<double>(config.soc_init_min, config.soc_init_max)(rng);

    EvProfile& ev = sc.profiles[i];
    ev.id = "ev" + std::to_string(i);
    ev.e_init = e_init;
    ev.p_min.assign(t_len, 0.0);
    ev.p_max.resize(t_len);
    ev.e_min.assign(t_len, 0.0);
    ev.e_max.assign(t_len, battery);
    ev.demand = demand;
    for (int t = 0; t < t_len; ++t) {
      ev.p_max[t] = (loc[t] == LocationMap::kAway) ? 0.0 : config.charger_kw;
    }
    ev.e_min[t_len - 1] = e_init;  // terminal energy balance

    // Feasibility witness: the maximum-charge trajectory majorizes every
    // feasible plan, so shrinking demand until it stays within bounds
    // guarantees a nonempty feasible set.
    for (int attempt = 0; attempt < 200; ++attempt) {
      double e = e_init;
      bool ok = true;
      for (int t = 0; t < t_len && ok; ++t) {
        const double p = std::min(ev.p_max[t], battery - e + ev.demand[t]);
        e += p - ev.demand[t];
        if (e < -1e-12) ok = false;
      }
      if (ok && e >= e_init - 1e-12) break;
      for (double& d : ev.demand) d *= 0.92;
    }

    for (int t = 0; t < t_len; ++t) sc.location.at(i, t) = loc[t];
  }

  sc.feeders.capacity = Grid(config.n_feeders, t_len, 0.0);
  sc.feeders.ids.resize(config.n_feeders);
  for (int s = 0; s < config.n_feeders; ++s) {
    sc.feeders.ids[s] = std::to_string(s);
    auto rng = stream_for(config.seed, 2, static_cast<uint64_t>(s));
    const double lo = std::log(1.0 / config.feeder_spread);
    const double hi = std::log(config.feeder_spread);
    const double het = std::exp(std::uniform_real_distribution<double>(lo, hi)(rng));
    for (int t = 0; t < t_len; ++t) {
      const int hour = t % 24;
      const double factor =
          (hour >= 8 && hour < 20) ? config.capacity_day_factor : config.capacity_night_factor;
      sc.feeders.capacity(s, t) = config.capacity_base_mw * het * factor;
    }
  }
  return sc;
}

// ---------------------------------------------------------------------------
// CSV serialization

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& file, size_t line_no,
                    const std::string& col) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw StructuralError(file + ":" + std::to_string(line_no) + ": column '" + col +
                          "' is not a finite number: '" + s + "'");
  }
  return v;
}

long parse_long(const std::string& s, const std::string& file, size_t line_no,
                const std::string& col) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw StructuralError(file + ":" + std::to_string(line_no) + ": column '" + col +
                          "' is not an integer: '" + s + "'");
  }
  return v;
}

struct CsvReader {
  std::string file;
  std::ifstream in;
  size_t line_no = 0;

  CsvReader(const std::filesystem::path& path, const std::string& expected_header)
      : file(path.filename().string()), in(path) {
    if (!in) throw StructuralError("cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw StructuralError(file + ": empty file");
    ++line_no;
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != expected_header) {
      throw StructuralError(file + ": expected header '" + expected_header + "', got '" + header +
                            "'");
    }
  }

  bool next(std::vector<std::string>& fields, size_t expected) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      fields = split_line(line);
      if (fields.size() != expected) {
        throw StructuralError(file + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(expected) + " columns, got " +
                              std::to_string(fields.size()));
      }
      return true;
    }
    return false;
  }
};

}  // namespace

void save_scenario(const Scenario& sc, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const int t_len = sc.horizon();

  {
    std::ofstream out(dir / "evs.csv");
    if (!out) throw StructuralError("cannot write " + (dir / "evs.csv").string());
    out << "ev_id,battery_kwh,e_init_kwh\n";
    for (const auto& ev : sc.profiles) {
      const double battery = *std::max_element(ev.e_max.begin(), ev.e_max.end());
      out << ev.id << ',' << fmt(battery) << ',' << fmt(ev.e_init) << '\n';
    }
  }
  {
    std::ofstream out(dir / "trajectory.csv");
    if (!out) throw StructuralError("cannot write " + (dir / "trajectory.csv").string());
    out << "ev_id,slot,feeder_id,demand_kwh,p_min_kw,p_max_kw,e_min_kwh,e_max_kwh\n";
    for (int i = 0; i < sc.ev_count(); ++i) {
      const auto& ev = sc.profiles[i];
      for (int t = 0; t < t_len; ++t) {
        const int32_t s = sc.location.at(i, t);
        out << ev.id << ',' << t << ',';
        if (s == LocationMap::kAway) {
          out << "AWAY";
        } else {
          out << sc.feeders.ids[s];
        }
        out << ',' << fmt(ev.demand[t]) << ',' << fmt(ev.p_min[t]) << ',' << fmt(ev.p_max[t])
            << ',' << fmt(ev.e_min[t]) << ',' << fmt(ev.e_max[t]) << '\n';
      }
    }
  }
  {
    std::ofstream out(dir / "feeders.csv");
    if (!out) throw StructuralError("cannot write " + (dir / "feeders.csv").string());
    out << "feeder_id,slot,capacity_mw\n";
    for (int s = 0; s < sc.feeder_count(); ++s) {
      for (int t = 0; t < t_len; ++t) {
        out << sc.feeders.ids[s] << ',' << t << ',' << fmt(sc.feeders.capacity(s, t)) << '\n';
      }
    }
  }
}

LoadResult load_scenario(const std::filesystem::path& dir) {
  LoadResult result;
  Scenario& sc = result.scenario;

  // feeders.csv establishes S and T.
  std::map<std::string, int> feeder_index;
  std::vector<std::vector<std::pair<int, double>>> feeder_caps;
  {
    CsvReader reader(dir / "feeders.csv", "feeder_id,slot,capacity_mw");
    std::vector<std::string> f;
    while (reader.next(f, 3)) {
      auto [it, inserted] = feeder_index.try_emplace(f[0], static_cast<int>(feeder_index.size()));
      if (inserted) {
        sc.feeders.ids.push_back(f[0]);
        feeder_caps.emplace_back();
      }
      const long slot = parse_long(f[1], reader.file, reader.line_no, "slot");
      const double cap = parse_double(f[2], reader.file, reader.line_no, "capacity_mw");
      if (slot < 0) throw StructuralError(reader.file + ": negative slot");
      if (cap < 0.0) {
        throw StructuralError(reader.file + ":" + std::to_string(reader.line_no) +
                              ": capacity_mw must be >= 0");
      }
      feeder_caps[it->second].emplace_back(static_cast<int>(slot), cap);
    }
  }
  if (feeder_caps.empty()) throw StructuralError("feeders.csv: no feeders");
  const int t_len = static_cast<int>(feeder_caps.front().size());
  sc.feeders.capacity = Grid(static_cast<int>(feeder_caps.size()), t_len, 0.0);
  for (size_t s = 0; s < feeder_caps.size(); ++s) {
    if (static_cast<int>(feeder_caps[s].size()) != t_len) {
      throw StructuralError("feeders.csv: feeder '" + sc.feeders.ids[s] + "' has " +
                            std::to_string(feeder_caps[s].size()) + " slots, expected " +
                            std::to_string(t_len));
    }
    std::vector<bool> seen(t_len, false);
    for (auto [slot, cap] : feeder_caps[s]) {
      if (slot >= t_len || seen[slot]) {
        throw StructuralError("feeders.csv: feeder '" + sc.feeders.ids[s] +
                              "' has duplicate or out-of-range slot " + std::to_string(slot));
      }
      seen[slot] = true;
      sc.feeders.capacity(static_cast<int>(s), slot) = cap;
    }
  }

  // evs.csv fixes the EV ordering.
  std::map<std::string, int> ev_index;
  std::vector<std::string> ev_ids;
  std::vector<double> ev_init;
  {
    CsvReader reader(dir / "evs.csv", "ev_id,battery_kwh,e_init_kwh");
    std::vector<std::string> f;
    while (reader.next(f, 3)) {
      if (!ev_index.try_emplace(f[0], static_cast<int>(ev_ids.size())).second) {
        throw StructuralError("evs.csv: duplicate ev_id '" + f[0] + "'");
      }
      ev_ids.push_back(f[0]);
      parse_double(f[1], reader.file, reader.line_no, "battery_kwh");
      ev_init.push_back(parse_double(f[2], reader.file, reader.line_no, "e_init_kwh"));
    }
  }

  const int n = static_cast<int>(ev_ids.size());
  std::vector<EvProfile> profiles(n);
  LocationMap location(n, t_len, LocationMap::kAway);
  std::vector<std::vector<bool>> seen(n, std::vector<bool>(t_len, false));
  for (int i = 0; i < n; ++i) {
    EvProfile& ev = profiles[i];
    ev.id = ev_ids[i];
    ev.e_init = ev_init[i];
    ev.p_min.assign(t_len, 0.0);
    ev.p_max.assign(t_len, 0.0);
    ev.e_min.assign(t_len, 0.0);
    ev.e_max.assign(t_len, 0.0);
    ev.demand.assign(t_len, 0.0);
  }

  {
    CsvReader reader(dir / "trajectory.csv",
                     "ev_id,slot,feeder_id,demand_kwh,p_min_kw,p_max_kw,e_min_kwh,e_max_kwh");
    std::vector<std::string> f;
    while (reader.next(f, 8)) {
      auto it = ev_index.find(f[0]);
      if (it == ev_index.end()) {
        throw StructuralError("trajectory.csv:" + std::to_string(reader.line_no) +
                              ": unknown ev_id '" + f[0] + "'");
      }
      const int i = it->second;
      const long slot = parse_long(f[1], reader.file, reader.line_no, "slot");
      if (slot < 0 || slot >= t_len) {
        throw StructuralError("trajectory.csv:" + std::to_string(reader.line_no) +
                              ": slot out of range");
      }
      if (seen[i][slot]) {
        throw StructuralError("trajectory.csv:" + std::to_string(reader.line_no) +
                              ": duplicate (ev_id, slot)");
      }
      seen[i][slot] = true;
      EvProfile& ev = profiles[i];
      const int t = static_cast<int>(slot);
      ev.demand[t] = parse_double(f[3], reader.file, reader.line_no, "demand_kwh");
      ev.p_min[t] = parse_double(f[4], reader.file, reader.line_no, "p_min_kw");
      ev.p_max[t] = parse_double(f[5], reader.file, reader.line_no, "p_max_kw");
      ev.e_min[t] = parse_double(f[6], reader.file, reader.line_no, "e_min_kwh");
      ev.e_max[t] = parse_double(f[7], reader.file, reader.line_no, "e_max_kwh");
      if (ev.demand[t] < 0.0) {
        throw StructuralError("trajectory.csv:" + std::to_string(reader.line_no) +
                              ": demand_kwh must be >= 0");
      }
      if (f[2] == "AWAY") {
        if (ev.p_max[t] != 0.0) {
          throw StructuralError("trajectory.csv:" + std::to_string(reader.line_no) +
                                ": AWAY slot must have p_max_kw = 0 (ev '" + f[0] + "')");
        }
        location.at(i, t) = LocationMap::kAway;
      } else {
        auto fit = feeder_index.find(f[2]);
        if (fit == feeder_index.end()) {
          throw StructuralError("trajectory.csv:" + std::to_string(reader.line_no) +
                                ": unknown feeder_id '" + f[2] + "'");
        }
        location.at(i, t) = fit->second;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_len; ++t) {
      if (!seen[i][t]) {
        throw StructuralError("trajectory.csv: ev '" + ev_ids[i] + "' is missing slot " +
                              std::to_string(t));
      }
    }
    const EvProfile& ev = profiles[i];
    if (ev.e_init < 0.0 || ev.e_init > ev.e_max[0] + ev.demand[0]) {
      throw StructuralError("evs.csv: e_init_kwh of '" + ev.id + "' is outside [0, e_max+demand]");
    }
  }

  // Keep only EVs with a provably nonempty feasible set.
  std::vector<int> kept;
  kept.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto bounds = derive_bounds(profiles[i]);
    if (check_necessary(bounds) && is_feasible(bounds)) {
      kept.push_back(i);
    } else {
      result.warnings.push_back("dropped infeasible EV '" + profiles[i].id + "'");
    }
  }
  sc.profiles.reserve(kept.size());
  sc.location = LocationMap(static_cast<int>(kept.size()), t_len, LocationMap::kAway);
  for (size_t k = 0; k < kept.size(); ++k) {
    sc.profiles.push_back(std::move(profiles[kept[k]]));
    for (int t = 0; t < t_len; ++t) {
      sc.location.at(static_cast<int>(k), t) = location.at(kept[k], t);
    }
  }
  return result;
}

Grid asap_plus(const Scenario& sc) {
  const int t_len = sc.horizon();
  Grid out(sc.ev_count(), t_len, 0.0);
  for (int i = 0; i < sc.ev_count(); ++i) {
    const EvProfile& ev = sc.profiles[i];
    const auto bounds = derive_bounds(ev);
    if (!check_necessary(bounds) || !is_feasible(bounds)) {
      throw StructuralError("asap_plus: EV '" + ev.id + "' has an empty feasible set");
    }
    auto row = out.row(i);
    double s_cum = 0.0;
    double e = ev.e_init;
    bool charging = false;
    for (int t = 0; t < t_len; ++t) {
      const int32_t here = sc.location.at(i, t);
      const bool at_stay = here != LocationMap::kAway;
      const bool arrival =
          at_stay && (t == 0 || sc.location.at(i, t - 1) != here);
      if (arrival) charging = e < 0.5 * ev.e_max[t];
      if (charging && e >= ev.e_max[t] - 1e-9) charging = false;
      const double target = charging ? ev.p_max[t] : 0.0;
      const double beta_lo = std::max(bounds.b_min[t], s_cum + bounds.p_min[t]);
      const double beta_hi = std::min(bounds.b_max[t], s_cum + bounds.p_max[t]);
      const double raw = s_cum + target;
      double p;
      if (raw < beta_lo) {
        p = beta_lo - s_cum;
      } else if (raw > beta_hi) {
        p = beta_hi - s_cum;
      } else {
        p = target;
      }
      row[t] = p;
      s_cum += p;
      e += p - ev.demand[t];
    }
  }
  return out;
}

MetricsReport metrics(const Grid& loads, const Grid& caps, double threshold) {
  if (loads.rows != caps.rows || loads.cols != caps.cols) {
    throw StructuralError("metrics: shape mismatch");
  }
  MetricsReport rep;
  rep.threshold = threshold;
  rep.per_feeder_violation.resize(loads.rows);
  for (int s = 0; s < loads.rows; ++s) {
    const double v = feeder_violation(loads.row(s), caps.row(s));
    rep.per_feeder_violation[s] = v;
    rep.total_max_violation += v;
    if (v > threshold) ++rep.feeders_over_threshold;
  }
  auto pvr = [](const std::vector<double>& series) -> std::optional<double> {
    if (series.empty()) return std::nullopt;
    const double mx = *std::max_element(series.begin(), series.end());
    const double mn = *std::min_element(series.begin(), series.end());
    if (mn <= 0.0) return std::nullopt;
    return mx / mn;
  };
  std::vector<double> agg_load(loads.cols, 0.0), agg_over(loads.cols, 0.0);
  for (int s = 0; s < loads.rows; ++s) {
    for (int t = 0; t < loads.cols; ++t) {
      agg_load[t] += loads(s, t);
      agg_over[t] += std::max(loads(s, t) - caps(s, t), 0.0);
    }
  }
  rep.pvr_load = pvr(agg_load);
  rep.pvr_overload = pvr(agg_over);
  return rep;
}

}  // namespace evco
