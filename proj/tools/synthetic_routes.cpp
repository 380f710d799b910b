#include "synthetic_routes.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace ecodrive::synth {
namespace {

constexpr double kSpacing = 25.0;
constexpr double kJitter = 0.02;  // m

struct Leg {
  double end;           // m
  double grade_pct;     // rise over run, percent
  double limit_kmh;
};

struct Marker {
  double position;
  EventType type;
  double advised_kmh = 0.0;
};

struct Layout {
  const char* name;
  std::vector<Leg> legs;
  std::vector<Marker> events;
};

Layout valley() {
  return {"valley",
          {{2000, 0.0, 80}, {3000, 0.0, 80}, {5000, -2.5, 80}, {7000, 2.0, 80}, {8000, 0.0, 80}, {9975, 0.0, 80}},
          {{2000, EventType::RedLight}, {8000, EventType::RedLight}, {9975, EventType::Destination}}};
}

Layout long_haul() {
  return {"long-haul",
          {{600, 0.0, 50},
           {1100, 0.0, 50},
           {2100, 1.5, 80},
           {2500, 0.0, 80},
           {3300, -3.0, 80},
           {3900, 0.0, 80},
           {4500, 0.0, 80},
           {5500, 0.0, 80},
           {6000, 1.5, 80},
           {6500, -2.0, 80},
           {7000, 0.0, 80},
           {7500, -2.0, 60},
           {8000, 0.0, 60},
           {9000, 0.0, 80},
           {9800, 0.0, 50}},
          {{600, EventType::RedLight},
           {3900, EventType::RedLight},
           {4500, EventType::StopSign},
           {8000, EventType::Turn, 36.0},
           {9800, EventType::Destination}}};
}

// Uniform in [-1, 1] straight from the engine so the sequence is identical
// across standard libraries.
double jitter(std::mt19937& rng) {
  return 2.0 * static_cast<double>(rng()) / static_cast<double>(std::mt19937::max()) - 1.0;
}

}  // namespace

std::optional<RouteKind> route_kind_from_string(std::string_view name) {
  if (name == "valley") return RouteKind::Valley;
  if (name == "long-haul") return RouteKind::LongHaul;
  return std::nullopt;
}

Route make_route(RouteKind kind, std::uint32_t seed) {
  const Layout layout = kind == RouteKind::Valley ? valley() : long_haul();

  std::mt19937 rng(seed);
  Route route;
  route.name = layout.name;
  route.datum = "synthetic, elevation relative to start";

  const double end = layout.legs.back().end;
  const auto n = static_cast<std::size_t>(std::lround(end / kSpacing));
  double elevation = 0.0;
  std::size_t leg = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = kSpacing * static_cast<double>(i);
    while (leg + 1 < layout.legs.size() && s >= layout.legs[leg].end) ++leg;
    if (i > 0) {
      // Grade of the interval just covered.
      const double prev = s - kSpacing;
      std::size_t k = 0;
      while (k + 1 < layout.legs.size() && prev >= layout.legs[k].end) ++k;
      elevation += layout.legs[k].grade_pct / 100.0 * kSpacing;
    }
    RoutePoint pt;
    pt.position = s;
    const double noise = (seed == 0 || i == 0 || i == n) ? 0.0 : kJitter * jitter(rng);
    pt.elevation = std::round((elevation + noise) * 1000.0) / 1000.0;
    pt.speed_limit_kmh = layout.legs[leg].limit_kmh;
    if (i > 0 && pt.speed_limit_kmh != route.points.back().speed_limit_kmh) {
      pt.event = RouteEvent{EventType::SpeedLimitChange};
    }
    for (const Marker& m : layout.events) {
      if (std::abs(m.position - s) < 1e-9) pt.event = RouteEvent{m.type, m.advised_kmh};
    }
    route.points.push_back(pt);
  }
  return route;
}

}  // namespace ecodrive::synth
