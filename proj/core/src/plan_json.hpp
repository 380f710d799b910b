#pragma once

// Internal: JSON views shared by plan_io and the advisory service.

#include "ecodrive/trip_planner.hpp"
#include "json.hpp"

namespace ecodrive::detail {

nlohmann::json step_json(const StepRecord& r);
nlohmann::json solution_json(const SegmentSolution& s, bool with_steps);
nlohmann::json segment_json(const PlannedSegment& ps, std::size_t index, bool with_steps);
nlohmann::json plan_json(const TripPlan& plan, long long revision, bool with_steps);

}  // namespace ecodrive::detail
