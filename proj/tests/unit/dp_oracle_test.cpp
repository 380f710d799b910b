#include "doctest.h"
#include "ecodrive/dp_oracle.hpp"
#include "fixtures.hpp"
#include "reference_model.hpp"

using namespace ecodrive;
using fixtures::kmh;

namespace {
const TruckParameters P = default_truck_parameters();
const CostWeights W{};
}  // namespace

TEST_CASE("velocity grid keeps pinned values") {
  const double pins[] = {kmh(36), kmh(50)};
  const auto g = make_velocity_grid(kmh(8), kmh(80), 0.1, pins);
  CHECK(g.front() == kmh(8));
  CHECK(g.back() == kmh(80));
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(std::find(g.begin(), g.end(), kmh(36)) != g.end());
  CHECK(std::find(g.begin(), g.end(), kmh(50)) != g.end());
  CHECK_THROWS_AS(make_velocity_grid(1, 2, 0.0), std::invalid_argument);
}

TEST_CASE("flat 200 m at the limit is all cruising") {
  const double v = kmh(70);
  const RouteSegment seg = make_uniform_segment(200, 0.0, v, v, v);
  SolverConfig cfg;
  cfg.step_length = 20;
  const double pins[] = {v};
  const auto grid = make_velocity_grid(cfg.velocity_floor(P), v, 0.1, pins);
  const auto dp = dp_oracle(seg, W, cfg, P, grid);
  REQUIRE(dp.has_value());
  REQUIRE(dp->optimal_path.size() == 10);
  // Cheapest cruise gear at this speed, evaluated by the reference model.
  double best = 0.0;
  bool any = false;
  for (int gear = 1; gear <= kGearCount; ++gear) {
    const ModePoint q{Mode::Cruising, gear};
    if (!ref::feasible(q, v, 0, P)) continue;
    const double g = ref::cost(q, v, 0, W.fuel_weight, W.time_weight, P);
    if (!any || g < best) best = g;
    any = true;
  }
  REQUIRE(any);
  for (const auto& q : dp->optimal_path) CHECK(q.mode == Mode::Cruising);
  CHECK(dp->optimal_cost == doctest::Approx(10 * best * 20).epsilon(1e-12));
  for (double x : dp->velocities) CHECK(x == v);

  const auto pmp = shoot(seg, W, cfg, P);
  CHECK(pmp.discrete_cost == doctest::Approx(dp->optimal_cost).epsilon(0.05));
}

TEST_CASE("budget guard") {
  const RouteSegment seg = make_uniform_segment(1000, 0.0, kmh(80), kmh(50), kmh(70));
  SolverConfig cfg;
  cfg.step_length = 1;
  const auto grid = make_velocity_grid(cfg.velocity_floor(P), kmh(80), 0.01);
  CHECK_THROWS_AS(dp_oracle(seg, W, cfg, P, grid, 1000), BudgetExceeded);
}

TEST_CASE("unreachable entry velocity") {
  // 20 m is far too short to brake from 80 to 8 km/h within the band.
  const RouteSegment seg = make_uniform_segment(20, 0.0, kmh(80), kmh(80), kmh(8));
  SolverConfig cfg;
  cfg.step_length = 20;
  const double pins[] = {kmh(80), kmh(8)};
  const auto grid = make_velocity_grid(kmh(8), kmh(80), 0.1, pins);
  CHECK_FALSE(dp_oracle(seg, W, cfg, P, grid).has_value());
}
