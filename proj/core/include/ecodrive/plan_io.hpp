#pragma once

#include <string>

#include "ecodrive/trip_planner.hpp"

namespace ecodrive {

/// Step table: segment, position_m, velocity_kmh, gear, mode,
/// engine_speed_rpm, engine_torque_nm, brake_torque_nm, fuel_rate_gps,
/// followed by `# total_*` footer lines.
std::string plan_to_csv(const TripPlan& plan);
std::string solution_to_csv(const SegmentSolution& solution, int segment_number);

/// Structured documents; velocities in km/h, positions in m, fuel in kg.
std::string plan_to_json(const TripPlan& plan, long long revision = 0);
std::string solution_to_json(const SegmentSolution& solution, int segment_number);

/// One row per segment: wall-clock solve time next to convergence status.
std::string timing_table(const TripPlan& plan, const SegmentTimings& timings);

}  // namespace ecodrive
