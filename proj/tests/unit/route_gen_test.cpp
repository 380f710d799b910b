#include "doctest.h"
#include "ecodrive/route_model.hpp"
#include "fixtures.hpp"
#include "synthetic_routes.hpp"

using namespace ecodrive;

TEST_CASE("generator reproduces the bundled routes") {
  CHECK(route_to_csv(synth::make_route(synth::RouteKind::Valley)) == fixtures::read_file(fixtures::route_path("valley.csv")));
  CHECK(route_to_csv(synth::make_route(synth::RouteKind::LongHaul)) ==
        fixtures::read_file(fixtures::route_path("long-haul.csv")));
  CHECK(route_to_json(synth::make_route(synth::RouteKind::LongHaul)) + "\n" ==
        fixtures::read_file(fixtures::route_path("long-haul.json")));
}

TEST_CASE("seeded noise is reproducible and small") {
  const Route a = synth::make_route(synth::RouteKind::Valley, 42);
  const Route b = synth::make_route(synth::RouteKind::Valley, 42);
  const Route exact = synth::make_route(synth::RouteKind::Valley);
  CHECK(route_to_csv(a) == route_to_csv(b));
  CHECK(route_to_csv(a) != route_to_csv(exact));
  REQUIRE(a.points.size() == exact.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(std::abs(a.points[i].elevation - exact.points[i].elevation) <= 0.02);
  CHECK(synth::route_kind_from_string("long-haul") == synth::RouteKind::LongHaul);
  CHECK_FALSE(synth::route_kind_from_string("moon").has_value());
}
