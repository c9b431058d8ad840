#include <doctest.h>

#include <cmath>
#include <random>

#include "evco/core.hpp"

using namespace evco;

namespace {

EvProfile simple_profile(std::vector<double> p_min, std::vector<double> p_max,
                         std::vector<double> e_min, std::vector<double> e_max, double e_init,
                         std::vector<double> demand) {
  EvProfile ev;
  ev.id = "test";
  ev.p_min = std::move(p_min);
  ev.p_max = std::move(p_max);
  ev.e_min = std::move(e_min);
  ev.e_max = std::move(e_max);
  ev.demand = std::move(demand);
  ev.e_init = e_init;
  return ev;
}

// The instance that satisfies the necessary chain but has an empty set:
// no charging allowed in slot 1 yet full-power charging required overall.
CumulativeBounds necessary_but_empty() {
  return bounds_from_cumulative({0, 0, 0}, {1, 1, 1}, {0, 0, 3}, {0, 0.5, 3});
}

}  // namespace

TEST_CASE("derive_bounds single-slot identity") {
  const auto ev = simple_profile({0}, {5}, {0}, {5}, 0.0, {0});
  const auto b = derive_bounds(ev);
  CHECK(b.s_min[0] == 0.0);
  CHECK(b.s_max[0] == 5.0);
  CHECK(b.c_min[0] == 0.0);
  CHECK(b.c_max[0] == 5.0);
  CHECK(b.b_min[0] == 0.0);
  CHECK(b.b_max[0] == 5.0);
  CHECK(check_necessary(b));
  CHECK(is_feasible(b));
}

TEST_CASE("derive_bounds backward envelopes on the three-slot pattern") {
  const auto b = necessary_but_empty();
  CHECK(b.b_min == std::vector<double>{1, 2, 3});
  CHECK(b.b_max == std::vector<double>{0, 0.5, 3});
  // Hand backward scan cross-check: max over suffixes of s_min - c_max.
  for (int t = 0; t < 3; ++t) {
    double g_lo = -1e300, g_hi = 1e300;
    for (int tau = t; tau < 3; ++tau) {
      g_lo = std::max(g_lo, b.s_min[tau] - b.c_max[tau]);
      g_hi = std::min(g_hi, b.s_max[tau] - b.c_min[tau]);
    }
    CHECK(b.b_min[t] == doctest::Approx(b.c_max[t] + g_lo));
    CHECK(b.b_max[t] == doctest::Approx(b.c_min[t] + g_hi));
  }
  CHECK(check_necessary(b));   // necessary passes
  CHECK_FALSE(is_feasible(b)); // yet the set is empty
}

TEST_CASE("derive_bounds prefix-sum endpoints") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 4.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int t_len = 1 + static_cast<int>(rng() % 9);
    std::vector<double> p_max(t_len), zero(t_len, 0.0), e_max(t_len, 100.0);
    double total = 0.0;
    for (double& x : p_max) {
      x = unif(rng);
      total += x;
    }
    const auto b = derive_bounds(simple_profile(zero, p_max, zero, e_max, 0.0, zero));
    CHECK(b.c_max[t_len - 1] == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("derive_bounds rejects inconsistent vector lengths") {
  auto ev = simple_profile({0, 0}, {5}, {0, 0}, {5, 5}, 0.0, {0, 0});
  CHECK_THROWS_AS(derive_bounds(ev), StructuralError);
}

TEST_CASE("check_necessary energy deficit") {
  // T=1, p_max = 1 so c_max = 1, but s_min = 2.
  const auto b = bounds_from_cumulative({0}, {1}, {2}, {3});
  CHECK_FALSE(check_necessary(b));
}

TEST_CASE("project_feasible hand-traced clipping") {
  const auto b = bounds_from_cumulative({0, 0}, {2, 2}, {0, 3}, {2, 4});
  CHECK(b.b_min == std::vector<double>{1, 3});
  CHECK(b.b_max == std::vector<double>{2, 4});
  const std::vector<double> target{0, 0};
  const auto p = project_feasible(target, b);
  REQUIRE(p.has_value());
  CHECK((*p)[0] == 1.0);
  CHECK((*p)[1] == 2.0);
  CHECK(satisfies_constraints(*p, b));
}

TEST_CASE("project_feasible is exact on interior targets") {
  const auto b = bounds_from_cumulative({0, 0, 0}, {3, 3, 3}, {-10, -10, -10}, {10, 10, 10});
  const std::vector<double> target{0.1, 2.7, 1.3};
  const auto p = project_feasible(target, b);
  REQUIRE(p.has_value());
  CHECK(*p == target);
}

TEST_CASE("project_feasible returns nothing on an empty set") {
  const auto b = necessary_but_empty();
  const std::vector<double> target{1, 1, 1};
  CHECK_FALSE(project_feasible(target, b).has_value());
}

TEST_CASE("project_feasible idempotence on random targets") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unif(-4.0, 4.0);
  for (int rep = 0; rep < 200; ++rep) {
    const int t_len = 1 + static_cast<int>(rng() % 10);
    std::vector<double> p_lo(t_len), p_hi(t_len), s_lo(t_len), s_hi(t_len);
    double acc = 0.0;
    for (int t = 0; t < t_len; ++t) {
      p_lo[t] = -1.0 + 0.5 * unif(rng);
      p_hi[t] = p_lo[t] + 3.0 + std::abs(unif(rng));
      acc += 0.5 * (p_lo[t] + p_hi[t]);
      s_lo[t] = acc - 2.0 - std::abs(unif(rng));
      s_hi[t] = acc + 2.0 + std::abs(unif(rng));
    }
    const auto b = bounds_from_cumulative(p_lo, p_hi, s_lo, s_hi);
    if (!check_necessary(b) || !is_feasible(b)) continue;
    std::vector<double> target(t_len);
    for (double& x : target) x = unif(rng);
    const auto once = project_feasible(target, b);
    REQUIRE(once.has_value());
    CHECK(satisfies_constraints(*once, b));
    const auto twice = project_feasible(*once, b);
    REQUIRE(twice.has_value());
    CHECK(*once == *twice);  // exact, not approximate
  }
}

TEST_CASE("ev_cost basics") {
  const std::vector<double> zero{0, 0, 0};
  CHECK(ev_cost(zero, 3.0) == 0.0);
  const std::vector<double> p{3, 4};
  CHECK(ev_cost(p, 2.0) == doctest::Approx(25.0));
  CHECK(ev_cost(p, 0.0) == 0.0);
}

TEST_CASE("feeder_violation and grid_cost") {
  const std::vector<double> load{3, 2};
  const std::vector<double> cap{1, 1};
  CHECK(feeder_violation(load, cap) == doctest::Approx(2.0));
  const std::vector<double> under{0.5, 0.9};
  CHECK(feeder_violation(under, cap) == 0.0);
  const std::vector<double> zero_cap{0, 0};
  CHECK(feeder_violation(load, zero_cap) == doctest::Approx(3.0));

  Grid loads(2, 2), caps(2, 2, 1.0);
  loads(0, 0) = 3;
  loads(0, 1) = 2;
  loads(1, 0) = 0.5;
  loads(1, 1) = 2.5;
  CHECK(grid_cost(loads, caps) == doctest::Approx(2.0 + 1.5));
}

TEST_CASE("aggregate_load scatter semantics") {
  // One EV parked at feeder 0 the whole horizon.
  Grid p(1, 3, 0.0);
  p(0, 0) = 1.0;
  p(0, 1) = 2.0;
  p(0, 2) = 3.0;
  LocationMap loc(1, 3, 0);
  const Grid l = aggregate_load(p, loc, 2, 1e-3);
  CHECK(l(0, 0) == doctest::Approx(0.001));
  CHECK(l(0, 2) == doctest::Approx(0.003));
  CHECK(l(1, 0) == 0.0);

  // Two co-located EVs at 1 kW each.
  Grid p2(2, 1, 1.0);
  LocationMap loc2(2, 1, 0);
  const Grid l2 = aggregate_load(p2, loc2, 1, 1e-3);
  CHECK(l2(0, 0) == doctest::Approx(0.002));
}

TEST_CASE("aggregate_load equals the dense routing-tensor contraction") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-2.0, 5.0);
  const int n = 5, t_len = 4, n_feeders = 2;
  Grid p(n, t_len);
  LocationMap loc(n, t_len, LocationMap::kAway);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_len; ++t) {
      p(i, t) = unif(rng);
      if (rng() % 4 != 0) loc.at(i, t) = static_cast<int32_t>(rng() % n_feeders);
    }
  }
  const double sigma = 1e-3;
  const Grid fast = aggregate_load(p, loc, n_feeders, sigma);
  // Dense: materialize A_i in {0,1}^{S x T x T} and contract.
  Grid dense(n_feeders, t_len, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < n_feeders; ++s) {
      for (int t = 0; t < t_len; ++t) {
        for (int tp = 0; tp < t_len; ++tp) {
          const double a = (t == tp && loc.at(i, t) == s) ? 1.0 : 0.0;
          dense(s, t) += sigma * a * p(i, tp);
        }
      }
    }
  }
  for (size_t k = 0; k < fast.data.size(); ++k) {
    CHECK(fast.data[k] == doctest::Approx(dense.data[k]).epsilon(1e-12));
  }
}

TEST_CASE("aggregate_load is linear") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int n = 6, t_len = 5, n_feeders = 3;
  Grid p(n, t_len), q(n, t_len), mix(n, t_len);
  LocationMap loc(n, t_len, LocationMap::kAway);
  const double alpha = 1.7, beta = -0.4;
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_len; ++t) {
      p(i, t) = unif(rng);
      q(i, t) = unif(rng);
      mix(i, t) = alpha * p(i, t) + beta * q(i, t);
      if (rng() % 5 != 0) loc.at(i, t) = static_cast<int32_t>(rng() % n_feeders);
    }
  }
  const Grid lp = aggregate_load(p, loc, n_feeders, 1e-3);
  const Grid lq = aggregate_load(q, loc, n_feeders, 1e-3);
  const Grid lm = aggregate_load(mix, loc, n_feeders, 1e-3);
  for (size_t k = 0; k < lm.data.size(); ++k) {
    const double want = alpha * lp.data[k] + beta * lq.data[k];
    CHECK(lm.data[k] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("weighted_consensus_norm matches the stacked gather norm") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  const int n = 7, t_len = 4, n_feeders = 3;
  LocationMap loc(n, t_len, LocationMap::kAway);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_len; ++t) {
      if (rng() % 4 != 0) loc.at(i, t) = static_cast<int32_t>(rng() % n_feeders);
    }
  }
  Grid m(n_feeders, t_len);
  for (double& x : m.data) x = unif(rng);
  const Grid counts = occupancy_counts(loc, n_feeders);
  // Definition-level sum over EVs of ||A_i^T M||^2.
  double stacked = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < t_len; ++t) {
      const int32_t s = loc.at(i, t);
      if (s != LocationMap::kAway) stacked += m(s, t) * m(s, t);
    }
  }
  CHECK(weighted_consensus_norm(m, counts) == doctest::Approx(std::sqrt(stacked)).epsilon(1e-12));

  // All-ones occupancy reduces to the plain Frobenius norm.
  Grid ones(n_feeders, t_len, 1.0);
  double frob = 0.0;
  for (double x : m.data) frob += x * x;
  CHECK(weighted_consensus_norm(m, ones) == doctest::Approx(std::sqrt(frob)).epsilon(1e-12));
}
