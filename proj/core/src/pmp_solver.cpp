#include "ecodrive/pmp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecodrive/units.hpp"

namespace ecodrive {
namespace {

struct Derivative {
  double dv = 0.0;
  double dlambda = 0.0;
};

double cost_of(const ModeResponse& r, double v, const CostWeights& w) {
  return (w.fuel_weight * units::gps_to_kgps(r.fuel_rate) + w.time_weight) / v;
}

double cost_slope(const ModeResponse& r, double v, const CostWeights& w) {
  const double fuel = units::gps_to_kgps(r.fuel_rate);
  const double dfuel = units::gps_to_kgps(r.dfuel_rate_dv);
  return w.fuel_weight * dfuel / v - (w.fuel_weight * fuel + w.time_weight) / (v * v);
}

Derivative derivative(const ModePoint& q, double v, double lambda, double slope, const CostWeights& w,
                      const TruckParameters& p) {
  const ModeResponse r = mode_response(q, v, slope, p);
  return {r.dv_ds, -(cost_slope(r, v, w) + lambda * r.ddv_ds_dv)};
}

void require_velocity(double v, const char* fn) {
  if (!(v > kSingularityGuard)) throw std::invalid_argument(std::string(fn) + ": velocity at or below singularity guard");
}

int signum(double x) { return x < 0.0 ? -1 : 1; }

// A step that moves against the sign of dv/ds at both of its ends has no
// solution behind it (typically the velocity would have to pass through zero
// inside the step); RK4 still returns a number, so reject it here.
bool consistent_step(double dv_ds_hi, double dv_ds_lo, double v_hi, double v_lo) {
  if (dv_ds_hi > 0.0 && dv_ds_lo > 0.0) return v_hi > v_lo;
  if (dv_ds_hi < 0.0 && dv_ds_lo < 0.0) return v_hi < v_lo;
  return true;
}

}  // namespace

std::string_view to_string(Convergence c) {
  switch (c) {
    case Convergence::Tight: return "tight";
    case Convergence::StalledLoose: return "stalled-loose";
    case Convergence::Failed: return "failed";
  }
  return "";
}

void CostWeights::validate() const {
  if (!(fuel_weight >= 0.0) || !(time_weight >= 0.0)) throw std::invalid_argument("cost weights must be nonnegative");
  if (fuel_weight == 0.0 && time_weight == 0.0) throw std::invalid_argument("cost weights must not both be zero");
}

void SolverConfig::validate() const {
  if (!(step_length > 0.0) || !std::isfinite(step_length)) throw std::invalid_argument("step_length must be positive");
  if (!(tight_velocity_tol_kmh > 0.0) || !(tight_velocity_tol_kmh < loose_velocity_tol_kmh)) {
    throw std::invalid_argument("velocity tolerances must satisfy 0 < tight < loose");
  }
  if (!(costate_stall_tol >= 0.0)) throw std::invalid_argument("costate_stall_tol must be nonnegative");
  if (max_shooting_iterations < 1) throw std::invalid_argument("max_shooting_iterations must be at least 1");
  if (!(costate_bracket_seed.low < costate_bracket_seed.high)) {
    throw std::invalid_argument("costate bracket seed must satisfy low < high");
  }
  if (velocity_floor_kmh && !(*velocity_floor_kmh > units::ms_to_kmh(kSingularityGuard))) {
    throw std::invalid_argument("velocity floor must exceed the singularity guard");
  }
}

double SolverConfig::velocity_floor(const TruckParameters& p) const {
  return units::kmh_to_ms(velocity_floor_kmh.value_or(p.velocity_min_kmh));
}

double running_cost(const ModePoint& q, double v, double slope, const CostWeights& w, const TruckParameters& p) {
  require_velocity(v, "running_cost");
  return cost_of(mode_response(q, v, slope, p), v, w);
}

double hamiltonian(const ModePoint& q, double v, double lambda, double slope, const CostWeights& w,
                   const TruckParameters& p) {
  require_velocity(v, "hamiltonian");
  const ModeResponse r = mode_response(q, v, slope, p);
  return cost_of(r, v, w) + lambda * r.dv_ds;
}

double hamiltonian_slope(const ModePoint& q, double v, double lambda, double slope, const CostWeights& w,
                         const TruckParameters& p) {
  require_velocity(v, "hamiltonian_slope");
  const ModeResponse r = mode_response(q, v, slope, p);
  return cost_slope(r, v, w) + lambda * r.ddv_ds_dv;
}

double costate_derivative(const ModePoint& q, double v, double lambda, double slope, const CostWeights& w,
                          const TruckParameters& p) {
  return -hamiltonian_slope(q, v, lambda, slope, w, p);
}

std::optional<CostateState> rk4_step_back(const ModePoint& q, const CostateState& at, double h,
                                          const std::array<double, 3>& slopes, const CostWeights& w,
                                          const TruckParameters& p) {
  auto stage = [&](double v, double lambda, double slope) -> std::optional<Derivative> {
    if (!(v > kSingularityGuard) || !std::isfinite(v)) return std::nullopt;
    return derivative(q, v, lambda, slope, w, p);
  };
  const auto k1 = stage(at.v, at.lambda, slopes[0]);
  if (!k1) return std::nullopt;
  const auto k2 = stage(at.v - 0.5 * h * k1->dv, at.lambda - 0.5 * h * k1->dlambda, slopes[1]);
  if (!k2) return std::nullopt;
  const auto k3 = stage(at.v - 0.5 * h * k2->dv, at.lambda - 0.5 * h * k2->dlambda, slopes[1]);
  if (!k3) return std::nullopt;
  const auto k4 = stage(at.v - h * k3->dv, at.lambda - h * k3->dlambda, slopes[2]);
  if (!k4) return std::nullopt;
  CostateState out{at.v - h / 6.0 * (k1->dv + 2.0 * k2->dv + 2.0 * k3->dv + k4->dv),
                   at.lambda - h / 6.0 * (k1->dlambda + 2.0 * k2->dlambda + 2.0 * k3->dlambda + k4->dlambda)};
  if (!(out.v > kSingularityGuard) || !std::isfinite(out.v) || !std::isfinite(out.lambda)) return std::nullopt;
  return out;
}

int sample_count(const RouteSegment& segment, const SolverConfig& cfg) {
  return static_cast<int>(std::lround(segment.length() / cfg.step_length));
}

TrajectoryTotals accumulate_totals(const std::vector<StepRecord>& steps, double step_length) {
  TrajectoryTotals t;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    const StepRecord& r = steps[k];
    t.discrete_cost += r.running_cost * step_length;
    t.fuel_used += units::gps_to_kgps(r.op_point.fuel_rate) / r.velocity * step_length;
    t.duration += step_length / r.velocity;
  }
  return t;
}

SweepResult backward_sweep(double terminal_costate, const RouteSegment& segment, const CostWeights& w,
                           const SolverConfig& cfg, const TruckParameters& p) {
  const int n = sample_count(segment, cfg);
  const double s0 = segment.start_position;
  const double sf = segment.end_position;
  const double h = n > 0 ? segment.length() / n : 0.0;
  const double v_floor = cfg.velocity_floor(p);
  const double v_lim = segment.speed_limit;
  auto position = [&](int k) { return k == n ? sf : s0 + h * k; };

  SweepResult out;
  out.trajectory.resize(static_cast<std::size_t>(n) + 1);
  CostateState state{segment.exit_velocity, terminal_costate};
  std::optional<ModePoint> previous;

  std::vector<Candidate> candidates;
  candidates.reserve(mode_universe().size());
  std::vector<double> ham;
  std::vector<std::size_t> order;

  auto fill_record = [&](StepRecord& rec, int k, const ModePoint& q, const ModeResponse& r, double v, double lambda) {
    rec.position = position(k);
    rec.velocity = v;
    rec.costate = lambda;
    rec.choice = q;
    rec.op_point = r.op;
    rec.running_cost = cost_of(r, v, w);
    rec.hamiltonian = rec.running_cost + lambda * r.dv_ds;
  };

  auto forced_gear = [&](double v) -> std::optional<int> {
    std::optional<int> best;
    double best_gap = 0.0;
    for (int y = 1; y <= kGearCount; ++y) {
      const double omega = engine_speed(v, y, p);
      if (omega < p.engine_speed_min_rpm || omega > p.engine_speed_max_rpm) continue;
      const double gap = std::abs(omega - cfg.fallback_reference_rpm);
      if (!best || gap < best_gap) {
        best = y;
        best_gap = gap;
      }
    }
    return best;
  };

  for (int k = n; k >= 1; --k) {
    const double s_hi = position(k);
    const double s_lo = position(k - 1);
    const std::array<double, 3> slopes{segment.slope_at(s_hi), segment.slope_at(0.5 * (s_hi + s_lo)),
                                       segment.slope_at(s_lo)};
    collect_candidates({state.v, slopes[0], v_lim, previous}, p, cfg.catalog, candidates);

    ham.resize(candidates.size());
    order.resize(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      ham[i] = cost_of(candidates[i].response, state.v, w) + state.lambda * candidates[i].response.dv_ds;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ham[a] < ham[b]; });

    auto survive = [&](std::size_t idx, bool preferred) -> std::optional<CostateState> {
      const ModePoint& q = candidates[idx].q;
      auto stepped = rk4_step_back(q, state, h, slopes, w, p);
      if (!stepped) return std::nullopt;
      const ModeResponse at_lo = mode_response(q, stepped->v, slopes[2], p);
      if (check_feasibility(q, stepped->v, at_lo, p) != FeasibilityCheck::Ok) return std::nullopt;
      if (!consistent_step(candidates[idx].response.dv_ds, at_lo.dv_ds, state.v, stepped->v)) return std::nullopt;
      if (stepped->v < v_floor || stepped->v > v_lim) {
        if (preferred && k == 1) (stepped->v > v_lim ? out.hit_limit : out.hit_floor) = true;
        return std::nullopt;
      }
      return stepped;
    };

    // The first candidate in Hamiltonian order whose step respects the path
    // constraints is the minimiser over the surviving set. Values equal up
    // to rounding count as a tie and go to the earlier candidate.
    std::optional<std::size_t> chosen;
    std::optional<CostateState> next;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      if (auto stepped = survive(order[pos], true)) {
        chosen = order[pos];
        next = stepped;
        const double tie =
            kHamiltonianTieTolerance * (std::abs(ham[*chosen]) + cost_of(candidates[*chosen].response, state.v, w));
        for (std::size_t rest = pos + 1; rest < order.size() && ham[order[rest]] <= ham[*chosen] + tie; ++rest) {
          if (order[rest] > *chosen) continue;
          if (auto tied = survive(order[rest], false)) {
            chosen = order[rest];
            next = tied;
          }
        }
        break;
      }
    }

    StepRecord& rec = out.trajectory[static_cast<std::size_t>(k)];
    if (chosen) {
      fill_record(rec, k, candidates[*chosen].q, candidates[*chosen].response, state.v, state.lambda);
    } else {
      const double target = segment.entry_velocity + (segment.exit_velocity - segment.entry_velocity) *
                                                         (s_lo - s0) / std::max(segment.length(), 1e-12);
      const Mode mode = state.v < target ? Mode::MaxAcceleration : Mode::Cruising;
      const auto gear = forced_gear(state.v);
      if (gear) next = rk4_step_back({mode, *gear}, state, h, slopes, w, p);
      if (!gear || !next) {
        out.failed = true;
        out.achieved_initial_velocity = state.v;
        out.trajectory.erase(out.trajectory.begin(), out.trajectory.begin() + k + 1);
        return out;
      }
      const ModePoint q{mode, *gear};
      fill_record(rec, k, q, mode_response(q, state.v, slopes[0], p), state.v, state.lambda);
      rec.fallback = true;
      out.used_fallback = true;
    }
    previous = rec.choice;
    state = *next;
  }

  StepRecord& first = out.trajectory.front();
  if (n == 0) {
    const double slope = segment.slope_at(s0);
    collect_candidates({state.v, slope, v_lim, std::nullopt}, p, cfg.catalog, candidates);
    std::optional<Candidate> best;
    double best_h = 0.0;
    for (const auto& c : candidates) {
      const double hq = cost_of(c.response, state.v, w) + state.lambda * c.response.dv_ds;
      if (!best || hq < best_h) {
        best = c;
        best_h = hq;
      }
    }
    if (!best) {
      const ModePoint q{Mode::Cruising, forced_gear(state.v).value_or(kGearCount)};
      best = Candidate{q, mode_response(q, state.v, slope, p)};
    }
    fill_record(first, 0, best->q, best->response, state.v, state.lambda);
  } else {
    const ModePoint q = out.trajectory[1].choice;
    fill_record(first, 0, q, mode_response(q, state.v, segment.slope_at(s0), p), state.v, state.lambda);
    first.fallback = out.trajectory[1].fallback;
  }
  out.achieved_initial_velocity = state.v;
  return out;
}

SegmentSolution shoot(const RouteSegment& segment, const CostWeights& w, const SolverConfig& cfg,
                      const TruckParameters& p) {
  w.validate();
  cfg.validate();
  const double v_floor = cfg.velocity_floor(p);
  const double eps = 1e-9;
  for (double v : {segment.entry_velocity, segment.exit_velocity}) {
    if (!(v >= v_floor - eps && v <= segment.speed_limit + eps)) {
      throw std::invalid_argument("shoot: boundary velocity outside [v_min, v_lim]");
    }
  }
  const double tight = units::kmh_to_ms(cfg.tight_velocity_tol_kmh);
  const double loose = units::kmh_to_ms(cfg.loose_velocity_tol_kmh);
  const double h = sample_count(segment, cfg) > 0 ? segment.length() / sample_count(segment, cfg) : 0.0;

  struct Eval {
    double lambda = 0.0;
    double error = 0.0;  // v_0 - v_0*
    int side = 1;
    bool clean = false;
    SweepResult sweep;
  };

  // An entry velocity on a band edge can only be approached from inside the
  // band, so the raw error never changes sign there. A sweep that pressed
  // against that edge is counted as having reached it.
  const bool entry_at_limit = segment.entry_velocity >= segment.speed_limit - eps;
  const bool entry_at_floor = segment.entry_velocity <= v_floor + eps;

  SegmentSolution sol;
  sol.step_length = h;
  std::optional<Eval> best;

  auto evaluate = [&](double lambda) {
    Eval e;
    e.lambda = lambda;
    e.sweep = backward_sweep(lambda, segment, w, cfg, p);
    e.error = segment.entry_velocity - e.sweep.achieved_initial_velocity;
    e.clean = !e.sweep.failed && !e.sweep.used_fallback;
    e.side = signum(e.error);
    if (entry_at_limit && e.sweep.hit_limit) e.side = -1;
    if (entry_at_floor && e.sweep.hit_floor) e.side = 1;
    ++sol.iterations;
    if (e.clean && (!best || std::abs(e.error) < std::abs(best->error))) best = e;
    return e;
  };
  auto finish = [&](const Eval& e, Convergence c) {
    sol.converged = c;
    sol.terminal_costate = e.lambda;
    sol.achieved_initial_velocity = e.sweep.achieved_initial_velocity;
    sol.steps = e.sweep.trajectory;
    const TrajectoryTotals t = accumulate_totals(sol.steps, h);
    sol.discrete_cost = t.discrete_cost;
    sol.fuel_used = t.fuel_used;
    sol.duration = t.duration;
    return sol;
  };
  auto is_tight = [&](const Eval& e) { return e.clean && std::abs(e.error) <= tight; };
  auto give_up = [&](const Eval& last) {
    if (best) return finish(*best, Convergence::Failed);
    return finish(last, Convergence::Failed);
  };

  // Bisects a sign change. Empty when the bracket collapses onto a jump in
  // v_0*(lambda) that is wider than the loose tolerance, or the iteration
  // budget runs out.
  int budget = cfg.max_shooting_iterations;
  std::optional<Eval> last_mid;
  auto bisect = [&](Eval lo, Eval hi) -> std::optional<std::pair<Eval, Convergence>> {
    double last_lambda = hi.lambda;
    while (budget > 0) {
      const double lambda = 0.5 * (lo.lambda + hi.lambda);
      if (lambda == lo.lambda || lambda == hi.lambda) break;
      --budget;
      Eval mid = evaluate(lambda);
      if (is_tight(mid)) return std::pair{std::move(mid), Convergence::Tight};
      if (mid.clean && std::abs(lambda - last_lambda) <= cfg.costate_stall_tol && std::abs(mid.error) <= loose) {
        return std::pair{std::move(mid), Convergence::StalledLoose};
      }
      last_lambda = lambda;
      if (mid.side == lo.side) {
        lo = std::move(mid);
      } else {
        hi = std::move(mid);
      }
    }
    last_mid = hi;
    return std::nullopt;
  };
  auto give_up_after = [&](const Eval& fallback) {
    if (best && is_tight(*best)) return finish(*best, Convergence::Tight);
    return give_up(last_mid ? *last_mid : fallback);
  };

  // Seed endpoints only bound the search; at extreme costates an
  // edge-hugging trajectory can meet v_0 trivially.
  Eval lo = evaluate(cfg.costate_bracket_seed.low);
  Eval hi = evaluate(cfg.costate_bracket_seed.high);

  // v_0*(lambda) is piecewise constant and need not be monotone, so a sign
  // change can sit on a jump that no costate resolves. Brackets are taken
  // from a geometric ladder around the centre, innermost first, and the
  // ladder climbs on whenever one of them collapses.
  bool tried = false;
  {
    const double centre = 0.5 * (lo.lambda + hi.lambda);
    const double reach = 0.5 * (hi.lambda - lo.lambda);
    Eval up = evaluate(centre);
    Eval down = up;
    for (double step = 1.0;; step *= 2.0) {
      const bool last = step >= reach;
      Eval next_up = last ? hi : evaluate(centre + step);
      if (next_up.side != up.side) {
        tried = true;
        if (auto r = bisect(up, next_up)) return finish(r->first, r->second);
        if (budget <= 0) return give_up_after(hi);
      }
      Eval next_down = last ? lo : evaluate(centre - step);
      if (next_down.side != down.side) {
        tried = true;
        if (auto r = bisect(next_down, down)) return finish(r->first, r->second);
        if (budget <= 0) return give_up_after(hi);
      }
      if (last) break;
      up = std::move(next_up);
      down = std::move(next_down);
    }
  }
  if (tried) return give_up_after(hi);

  // No sign change anywhere inside the seeds: widen them.
  for (int expansions = 0; lo.side == hi.side; ++expansions) {
    if (expansions >= cfg.max_bracket_expansions) {
      sol.bracket_failed = true;
      return give_up_after(hi);
    }
    const double half_width = 0.5 * (hi.lambda - lo.lambda);
    lo = evaluate(lo.lambda - half_width);
    hi = evaluate(hi.lambda + half_width);
  }
  if (auto r = bisect(lo, hi)) return finish(r->first, r->second);
  return give_up_after(hi);
}

}  // namespace ecodrive
