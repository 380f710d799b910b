#include <cmath>

#include "doctest.h"
#include "ecodrive/plan_io.hpp"
#include "ecodrive/trip_planner.hpp"
#include "fixtures.hpp"
#include "reference_model.hpp"

using namespace ecodrive;
using fixtures::kmh;

namespace {
const TruckParameters P = default_truck_parameters();

const TripPlan& valley_plan() {
  static const TripPlan plan = plan_trip(load_route(fixtures::route_path("valley.csv")), kmh(8), {}, P);
  return plan;
}

bool same_steps(const SegmentSolution& a, const SegmentSolution& b) {
  if (a.steps.size() != b.steps.size() || a.terminal_costate != b.terminal_costate) return false;
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    const auto &x = a.steps[k], &y = b.steps[k];
    if (x.velocity != y.velocity || x.costate != y.costate || !(x.choice == y.choice)) return false;
  }
  return true;
}

std::size_t first_red_light(const TripPlan& plan) {
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    if (plan.segments[i].segment.terminating_event == BoundaryKind::RedLight) return i;
  }
  return plan.segments.size();
}
}  // namespace

TEST_CASE("one flat segment at the limit") {
  const Route r = parse_route_csv(
      "position_m,elevation_m,speed_limit_kmh,event,event_param\n0,0,60,,\n1000,0,60,limit_change,\n"
      "1001,0,60,,\n1100,0,60,destination,\n");
  const TripPlan plan = plan_trip(r, kmh(60), {}, P);
  REQUIRE(plan.segments.size() == 2);
  const auto& first = plan.segments[0];
  CHECK(first.status == SegmentStatus::Advised);
  for (std::size_t k = 1; k < first.solution.steps.size(); ++k) CHECK(first.solution.steps[k].choice.mode == Mode::Cruising);
  CHECK(first.solution.duration == doctest::Approx(1000 / kmh(60)).epsilon(1e-12));
}

TEST_CASE("valley plan") {
  const TripPlan& plan = valley_plan();
  CHECK(plan.complete);
  double fuel = 0, duration = 0, refuel = 0;
  for (const auto& ps : plan.segments) {
    CHECK(ps.status == SegmentStatus::Advised);
    fuel += ps.solution.fuel_used;
    duration += ps.solution.duration;
    const auto& st = ps.solution.steps;
    for (std::size_t k = 1; k < st.size(); ++k) {
      const double slope = ps.segment.slope_at(st[k].position);
      refuel += ref::eval(st[k].choice, st[k].velocity, slope, P).fuel_gps / 1000 / st[k].velocity *
                ps.solution.step_length;
    }
    if (ps.segment.terminating_event == BoundaryKind::RedLight) {
      CHECK(ps.segment.exit_velocity == doctest::Approx(kmh(8)).epsilon(1e-15));
      CHECK(st.back().velocity == ps.segment.exit_velocity);
    }
  }
  CHECK(plan.total_fuel == doctest::Approx(fuel).epsilon(1e-14));
  CHECK(plan.total_duration == doctest::Approx(duration).epsilon(1e-14));
  CHECK(plan.total_fuel == doctest::Approx(refuel).epsilon(1e-9));
  for (std::size_t i = 0; i + 1 < plan.segments.size(); ++i) {
    const double joint = plan.segments[i + 1].solution.steps.front().velocity - plan.segments[i].solution.steps.back().velocity;
    CHECK(std::abs(joint) <= kmh(1.0) + 1e-12);
  }
}

TEST_CASE("override at the planned velocity is a fixed point") {
  const TripPlan& plan = valley_plan();
  const TripPlan again = recompute_from(plan, 0, plan.segments[0].segment.exit_velocity);
  CHECK(again.segments[0].status == SegmentStatus::Overridden);
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    CHECK(same_steps(plan.segments[i].solution, again.segments[i].solution));
  }
  CHECK(again.total_fuel == plan.total_fuel);
}

TEST_CASE("green light at 50 km/h") {
  const TripPlan& plan = valley_plan();
  const std::size_t i = first_red_light(plan);
  REQUIRE(i + 1 < plan.segments.size());
  const TripPlan green = recompute_from(plan, i, kmh(50));
  for (std::size_t j = 0; j <= i; ++j) CHECK(same_steps(plan.segments[j].solution, green.segments[j].solution));
  CHECK(green.segments[i].status == SegmentStatus::Overridden);
  CHECK(green.segments[i + 1].segment.entry_velocity == kmh(50));
  CHECK_FALSE(same_steps(plan.segments[i + 1].solution, green.segments[i + 1].solution));
  CHECK(std::abs(green.segments[i + 1].solution.achieved_initial_velocity - kmh(50)) <= kmh(1.0));
}

TEST_CASE("override on the last segment only changes its status") {
  const TripPlan& plan = valley_plan();
  const std::size_t last = plan.segments.size() - 1;
  const TripPlan o = recompute_from(plan, last, kmh(8));
  CHECK(o.segments[last].status == SegmentStatus::Overridden);
  for (std::size_t j = 0; j <= last; ++j) CHECK(same_steps(plan.segments[j].solution, o.segments[j].solution));
}

TEST_CASE("override validation") {
  const TripPlan& plan = valley_plan();
  CHECK(override_error(plan, 0, kmh(30)) == std::nullopt);
  CHECK(override_error(plan, plan.segments.size(), kmh(30)).has_value());
  CHECK(override_error(plan, 0, kmh(500)).has_value());
  CHECK(override_error(plan, 0, kmh(2)).has_value());
  CHECK_THROWS_AS(recompute_from(plan, plan.segments.size(), kmh(30)), std::out_of_range);
  CHECK_THROWS_AS(recompute_from(plan, 0, kmh(500)), std::invalid_argument);
}

TEST_CASE("determinism and parallel solve") {
  const Route r = load_route(fixtures::route_path("long-haul.csv"));
  const TripPlan a = plan_trip(r, kmh(8), {}, P);
  const TripPlan b = plan_trip(r, kmh(8), {}, P);
  PlannerConfig par;
  par.parallel = true;
  const TripPlan c = plan_trip(r, kmh(8), par, P);
  CHECK(plan_to_csv(a) == plan_to_csv(b));
  CHECK(plan_to_csv(a) == plan_to_csv(c));
  CHECK(plan_to_json(a) == plan_to_json(c));
}
