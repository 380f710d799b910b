#include "ecodrive/plan_io.hpp"

#include <cstdio>
#include <sstream>

#include "ecodrive/units.hpp"
#include "plan_json.hpp"

namespace ecodrive {
namespace detail {

using nlohmann::json;

json step_json(const StepRecord& r) {
  return {{"position_m", r.position},
          {"velocity_kmh", units::ms_to_kmh(r.velocity)},
          {"costate", r.costate},
          {"mode", std::string(to_string(r.choice.mode))},
          {"gear", r.choice.gear},
          {"engine_speed_rpm", r.op_point.engine_speed},
          {"engine_torque_nm", r.op_point.engine_torque},
          {"brake_torque_nm", r.op_point.brake_torque},
          {"fuel_rate_gps", r.op_point.fuel_rate},
          {"hamiltonian", r.hamiltonian},
          {"running_cost", r.running_cost},
          {"fallback", r.fallback}};
}

json solution_json(const SegmentSolution& s, bool with_steps) {
  json j = {{"converged", std::string(to_string(s.converged))},
            {"bracket_failed", s.bracket_failed},
            {"iterations", s.iterations},
            {"terminal_costate", s.terminal_costate},
            {"achieved_initial_velocity_kmh", units::ms_to_kmh(s.achieved_initial_velocity)},
            {"step_length_m", s.step_length},
            {"discrete_cost", s.discrete_cost},
            {"fuel_kg", s.fuel_used},
            {"duration_s", s.duration}};
  if (with_steps) {
    json steps = json::array();
    for (const auto& r : s.steps) steps.push_back(step_json(r));
    j["steps"] = std::move(steps);
  }
  return j;
}

json segment_json(const PlannedSegment& ps, std::size_t index, bool with_steps) {
  const RouteSegment& seg = ps.segment;
  return {{"index", index},
          {"start_m", seg.start_position},
          {"end_m", seg.end_position},
          {"speed_limit_kmh", units::ms_to_kmh(seg.speed_limit)},
          {"entry_velocity_kmh", units::ms_to_kmh(seg.entry_velocity)},
          {"exit_velocity_kmh", units::ms_to_kmh(seg.exit_velocity)},
          {"slope_class", std::string(to_string(seg.slope_class))},
          {"terminating_event", std::string(to_string(seg.terminating_event))},
          {"status", std::string(to_string(ps.status))},
          {"needs_service_brakes", ps.needs_service_brakes},
          {"solution", solution_json(ps.solution, with_steps)}};
}

json plan_json(const TripPlan& plan, long long revision, bool with_steps) {
  json segs = json::array();
  for (std::size_t i = 0; i < plan.segments.size(); ++i) segs.push_back(segment_json(plan.segments[i], i, with_steps));
  json j = {{"revision", revision},
            {"complete", plan.complete},
            {"total_fuel_kg", plan.total_fuel},
            {"total_duration_s", plan.total_duration},
            {"total_cost", plan.total_cost},
            {"segments", std::move(segs)}};
  if (plan.route) {
    j["route"] = {{"name", plan.route->name}, {"length_m", plan.route->length()}};
  }
  return j;
}

}  // namespace detail

namespace {

constexpr const char* kHeader =
    "segment,position_m,velocity_kmh,gear,mode,engine_speed_rpm,engine_torque_nm,brake_torque_nm,fuel_rate_gps\n";

void write_rows(std::ostream& os, const SegmentSolution& s, int segment_number) {
  char buf[256];
  for (const auto& r : s.steps) {
    std::snprintf(buf, sizeof buf, "%d,%.3f,%.4f,%d,%s,%.2f,%.2f,%.2f,%.5f\n", segment_number, r.position,
                  units::ms_to_kmh(r.velocity), r.choice.gear, std::string(to_string(r.choice.mode)).c_str(),
                  r.op_point.engine_speed, r.op_point.engine_torque, r.op_point.brake_torque, r.op_point.fuel_rate);
    os << buf;
  }
}

std::string footer(double fuel, double duration, double cost) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "# total_fuel_kg,%.6f\n# total_duration_s,%.3f\n# total_cost,%.6f\n", fuel, duration,
                cost);
  return buf;
}

}  // namespace

std::string plan_to_csv(const TripPlan& plan) {
  std::ostringstream os;
  os << kHeader;
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    write_rows(os, plan.segments[i].solution, static_cast<int>(i + 1));
  }
  os << footer(plan.total_fuel, plan.total_duration, plan.total_cost);
  if (!plan.complete) os << "# incomplete,no-advice segments excluded from totals\n";
  return os.str();
}

std::string solution_to_csv(const SegmentSolution& solution, int segment_number) {
  std::ostringstream os;
  os << kHeader;
  write_rows(os, solution, segment_number);
  os << footer(solution.fuel_used, solution.duration, solution.discrete_cost);
  return os.str();
}

std::string plan_to_json(const TripPlan& plan, long long revision) {
  return detail::plan_json(plan, revision, true).dump(2);
}

std::string solution_to_json(const SegmentSolution& solution, int segment_number) {
  auto j = detail::solution_json(solution, true);
  j["segment"] = segment_number;
  return j.dump(2);
}

std::string timing_table(const TripPlan& plan, const SegmentTimings& timings) {
  std::ostringstream os;
  os << "segment,length_m,status,converged,iterations,time_s\n";
  char buf[160];
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    const auto& ps = plan.segments[i];
    std::snprintf(buf, sizeof buf, "%zu,%.1f,%s,%s,%d,%.3f\n", i + 1, ps.segment.length(),
                  std::string(to_string(ps.status)).c_str(), std::string(to_string(ps.solution.converged)).c_str(),
                  ps.solution.iterations, i < timings.size() ? timings[i] : 0.0);
    os << buf;
  }
  return os.str();
}

}  // namespace ecodrive
