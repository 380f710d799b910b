#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecodrive/pmp_solver.hpp"
#include "ecodrive/route_model.hpp"

namespace ecodrive {

enum class SegmentStatus : std::uint8_t { Advised, Overridden, NoAdvice, Pending };
std::string_view to_string(SegmentStatus s);

struct PlannedSegment {
  RouteSegment segment;
  SegmentSolution solution;  // steps empty for no-advice segments
  SegmentStatus status = SegmentStatus::Pending;
  /// Even the strongest decelerating mode cannot bring the truck down to
  /// the exit velocity; service brakes would be needed.
  bool needs_service_brakes = false;
};

struct PlannerConfig {
  CostWeights weights;
  SolverConfig solver;
  SegmentationConfig segmentation;
  /// Solve segments concurrently. Entry velocities are fixed by the
  /// segmentation, so the result is identical to the sequential solve.
  bool parallel = false;
};

/// Immutable snapshot of a full-route solution.
struct TripPlan {
  std::shared_ptr<const Route> route;
  PlannerConfig config;
  TruckParameters params;
  std::vector<PlannedSegment> segments;
  double total_fuel = 0.0;      // kg, advised segments only
  double total_duration = 0.0;  // s, advised segments only
  double total_cost = 0.0;      // N m
  bool complete = true;         // false when any segment has no advice
};

/// Per-segment wall-clock seconds, reported separately from the plan so the
/// plan itself stays deterministic.
using SegmentTimings = std::vector<double>;

TripPlan plan_trip(const Route& route, double initial_velocity, const PlannerConfig& cfg, const TruckParameters& p,
                   SegmentTimings* timings = nullptr);

/// Why recompute_from would reject these arguments; empty when it would not.
std::optional<std::string> override_error(const TripPlan& plan, std::size_t segment_index, double actual_velocity);

/// The driver finished segment `segment_index` at `actual_velocity` instead
/// of the planned exit velocity. Marks it overridden and re-solves what
/// follows; earlier segments are copied unchanged.
TripPlan recompute_from(const TripPlan& plan, std::size_t segment_index, double actual_velocity,
                        SegmentTimings* timings = nullptr);

/// Forward check with the most decelerating feasible mode at every step.
bool needs_service_brakes(const RouteSegment& segment, const SolverConfig& cfg, const TruckParameters& p);

void recompute_totals(TripPlan& plan);

}  // namespace ecodrive
