#include "ecodrive/trip_planner.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <stdexcept>

#include "ecodrive/units.hpp"

namespace ecodrive {
namespace {

PlannedSegment solve_one(const RouteSegment& seg, const PlannerConfig& cfg, const TruckParameters& p,
                         double* seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  PlannedSegment out;
  out.segment = seg;
  out.solution = shoot(seg, cfg.weights, cfg.solver, p);
  if (out.solution.ok()) {
    out.status = SegmentStatus::Advised;
  } else {
    out.status = SegmentStatus::NoAdvice;
    out.solution.steps.clear();
    out.solution.discrete_cost = out.solution.fuel_used = out.solution.duration = 0.0;
  }
  out.needs_service_brakes = needs_service_brakes(seg, cfg.solver, p);
  if (seconds) *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

std::string_view to_string(SegmentStatus s) {
  switch (s) {
    case SegmentStatus::Advised: return "advised";
    case SegmentStatus::Overridden: return "overridden";
    case SegmentStatus::NoAdvice: return "no-advice";
    case SegmentStatus::Pending: return "pending";
  }
  return "";
}

bool needs_service_brakes(const RouteSegment& segment, const SolverConfig& cfg, const TruckParameters& p) {
  if (!(segment.exit_velocity < segment.entry_velocity)) return false;
  const int n = sample_count(segment, cfg);
  if (n == 0) return true;
  const double h = segment.length() / n;
  const double v_floor = cfg.velocity_floor(p);
  const double loose = units::kmh_to_ms(cfg.loose_velocity_tol_kmh);
  double v = segment.entry_velocity;
  for (int k = 0; k < n && v > segment.exit_velocity; ++k) {
    const double s = segment.start_position + h * k;
    const double slope = segment.slope_at(s);
    double strongest = 0.0;
    for (const ModePoint& q : mode_universe()) {
      if (q.mode != Mode::EcoRoll && q.mode != Mode::Coasting && q.mode != Mode::EngineBraking) continue;
      // Decelerations beyond the comfort band are allowed here: the question
      // is whether the truck can shed the speed at all.
      const ModeResponse r = mode_response(q, v, slope, p);
      const FeasibilityCheck c = check_feasibility(q, v, r, p);
      if (c != FeasibilityCheck::Ok && c != FeasibilityCheck::Acceleration) continue;
      strongest = std::min(strongest, std::max(r.dv_ds, p.accel_min / v));
    }
    if (strongest >= 0.0) return true;
    v = std::max(v_floor, v + h * strongest);
  }
  return v > segment.exit_velocity + loose;
}

void recompute_totals(TripPlan& plan) {
  plan.total_fuel = plan.total_duration = plan.total_cost = 0.0;
  plan.complete = true;
  for (const auto& ps : plan.segments) {
    if (ps.status == SegmentStatus::NoAdvice || ps.solution.steps.empty()) {
      if (ps.status == SegmentStatus::NoAdvice) plan.complete = false;
      continue;
    }
    plan.total_fuel += ps.solution.fuel_used;
    plan.total_duration += ps.solution.duration;
    plan.total_cost += ps.solution.discrete_cost;
  }
}

TripPlan plan_trip(const Route& route, double initial_velocity, const PlannerConfig& cfg, const TruckParameters& p,
                   SegmentTimings* timings) {
  cfg.weights.validate();
  cfg.solver.validate();
  TripPlan plan;
  plan.route = std::make_shared<const Route>(route);
  plan.config = cfg;
  plan.params = p;
  SegmentationConfig seg_cfg = cfg.segmentation;
  seg_cfg.velocity_min_kmh = units::ms_to_kmh(cfg.solver.velocity_floor(p));
  const auto segments = segment_route(route, initial_velocity, seg_cfg);

  plan.segments.resize(segments.size());
  std::vector<double> seconds(segments.size(), 0.0);
  if (cfg.parallel) {
    std::vector<std::future<PlannedSegment>> jobs;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      jobs.push_back(std::async(std::launch::async, solve_one, std::cref(segments[i]), std::cref(cfg), std::cref(p),
                                &seconds[i]));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) plan.segments[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < segments.size(); ++i) plan.segments[i] = solve_one(segments[i], cfg, p, &seconds[i]);
  }
  recompute_totals(plan);
  if (timings) *timings = std::move(seconds);
  return plan;
}

std::optional<std::string> override_error(const TripPlan& plan, std::size_t segment_index, double actual_velocity) {
  if (segment_index >= plan.segments.size()) return "segment index out of range";
  const double v_floor = plan.config.solver.velocity_floor(plan.params);
  double v_cap = plan.segments[segment_index].segment.speed_limit;
  if (segment_index + 1 < plan.segments.size()) {
    v_cap = std::min(v_cap, plan.segments[segment_index + 1].segment.speed_limit);
  }
  if (!(actual_velocity >= v_floor - 1e-12 && actual_velocity <= v_cap + 1e-12)) {
    return "actual velocity outside [v_min, v_lim]";
  }
  return std::nullopt;
}

TripPlan recompute_from(const TripPlan& plan, std::size_t segment_index, double actual_velocity,
                        SegmentTimings* timings) {
  if (segment_index >= plan.segments.size()) throw std::out_of_range("recompute_from: segment index out of range");
  if (auto why = override_error(plan, segment_index, actual_velocity)) {
    throw std::invalid_argument("recompute_from: " + *why);
  }

  TripPlan out = plan;
  out.segments[segment_index].status = SegmentStatus::Overridden;
  if (timings) timings->assign(plan.segments.size(), 0.0);

  double entry = actual_velocity;
  for (std::size_t i = segment_index + 1; i < out.segments.size(); ++i) {
    PlannedSegment& ps = out.segments[i];
    if (ps.segment.entry_velocity == entry && ps.status != SegmentStatus::Pending) {
      // Same boundary problem as before: the deterministic solve would
      // reproduce it, and every later segment is unaffected too.
      break;
    }
    RouteSegment seg = ps.segment;
    seg.entry_velocity = entry;
    double secs = 0.0;
    ps = solve_one(seg, out.config, out.params, &secs);
    if (timings) (*timings)[i] = secs;
    entry = ps.segment.exit_velocity;
  }
  recompute_totals(out);
  return out;
}

}  // namespace ecodrive
