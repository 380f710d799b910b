#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ecodrive/mode_catalog.hpp"
#include "ecodrive/route_model.hpp"
#include "ecodrive/vehicle_model.hpp"

namespace ecodrive {

/// Weights of the fuel and trip-time terms. fuel_weight is in m^2/s^2 and
/// time_weight in kg m^2/s^3, so the running cost comes out in newtons and
/// their ratio in kg/s.
struct CostWeights {
  double fuel_weight = 1000.0;
  double time_weight = 30.0;

  void validate() const;
};

struct CostateBracket {
  double low = -1e6;
  double high = 1e6;
};

struct SolverConfig {
  double step_length = 1.0;  // m
  double tight_velocity_tol_kmh = 0.01;
  double loose_velocity_tol_kmh = 1.0;
  double costate_stall_tol = 0.0002;
  int max_shooting_iterations = 100;
  CostateBracket costate_bracket_seed;
  int max_bracket_expansions = 60;
  /// Unset: use the truck's velocity_min.
  std::optional<double> velocity_floor_kmh;
  /// Gear selection reference for the forced fallback mode.
  double fallback_reference_rpm = 1200.0;
  CatalogOptions catalog;

  void validate() const;
  double velocity_floor(const TruckParameters& p) const;
};

/// Hamiltonians closer than this, relative to the chosen candidate's
/// magnitude, are treated as equal and resolved by candidate order.
inline constexpr double kHamiltonianTieTolerance = 1e-12;

/// One distance sample of a solved segment.
///
/// Record k >= 1 carries the mode driven over (s_{k-1}, s_k], chosen by
/// minimising the Hamiltonian at (v_k, lambda_k); op_point, hamiltonian and
/// running_cost are evaluated there. Record 0 is the initial state and
/// repeats the first interval's mode evaluated at v_0; it does not enter the
/// totals.
struct StepRecord {
  double position = 0.0;  // m
  double velocity = 0.0;  // m/s
  double costate = 0.0;
  ModePoint choice;
  EngineOperatingPoint op_point;
  double hamiltonian = 0.0;   // N
  double running_cost = 0.0;  // N
  bool fallback = false;      // forced mode, no candidate survived
};

enum class Convergence : std::uint8_t { Tight, StalledLoose, Failed };
std::string_view to_string(Convergence c);

struct SegmentSolution {
  std::vector<StepRecord> steps;
  double step_length = 0.0;  // actual spacing (segment length / N)
  double terminal_costate = 0.0;
  double achieved_initial_velocity = 0.0;  // m/s
  Convergence converged = Convergence::Failed;
  bool bracket_failed = false;
  int iterations = 0;
  double discrete_cost = 0.0;  // N m
  double fuel_used = 0.0;      // kg
  double duration = 0.0;       // s

  bool ok() const { return converged != Convergence::Failed; }
};

// Cost, Hamiltonian and costate dynamics. v in m/s, slope in rad.
double running_cost(const ModePoint& q, double v, double slope, const CostWeights& w, const TruckParameters& p);
double hamiltonian(const ModePoint& q, double v, double lambda, double slope, const CostWeights& w,
                   const TruckParameters& p);
/// Analytic dH/dv; the fuel term goes through the chain rule of the active
/// engine operating point.
double hamiltonian_slope(const ModePoint& q, double v, double lambda, double slope, const CostWeights& w,
                         const TruckParameters& p);
/// d(lambda)/ds = -dH/dv.
double costate_derivative(const ModePoint& q, double v, double lambda, double slope, const CostWeights& w,
                          const TruckParameters& p);

struct CostateState {
  double v = 0.0;
  double lambda = 0.0;
};

/// Classical four-stage Runge-Kutta step from s to s - h with q held fixed.
/// `slopes` are the grades at s, s - h/2 and s - h. Empty when a stage
/// velocity drops to the singularity guard.
std::optional<CostateState> rk4_step_back(const ModePoint& q, const CostateState& at, double h,
                                          const std::array<double, 3>& slopes, const CostWeights& w,
                                          const TruckParameters& p);

/// N = round(length / step_length).
int sample_count(const RouteSegment& segment, const SolverConfig& cfg);

struct SweepResult {
  std::vector<StepRecord> trajectory;  // ordered by position; partial on failure
  double achieved_initial_velocity = 0.0;
  bool failed = false;        // no dynamics could be produced at some sample
  bool used_fallback = false;
  // On the last step into s_0 a preferred candidate was dropped because it
  // would have left the band through the speed limit (or the floor).
  bool hit_limit = false;
  bool hit_floor = false;
};

/// Backward integration from (v_f, terminal_costate) at the segment end,
/// choosing the Hamiltonian minimiser among surviving candidates at every
/// sample. On failure achieved_initial_velocity holds the last velocity
/// reached, which still tells the shooting loop which side it is on.
SweepResult backward_sweep(double terminal_costate, const RouteSegment& segment, const CostWeights& w,
                           const SolverConfig& cfg, const TruckParameters& p);

/// Bisection shooting on the terminal costate until the achieved initial
/// velocity meets the segment entry velocity.
SegmentSolution shoot(const RouteSegment& segment, const CostWeights& w, const SolverConfig& cfg,
                      const TruckParameters& p);

/// Totals over records 1..N; exposed so callers can re-derive them.
struct TrajectoryTotals {
  double discrete_cost = 0.0;
  double fuel_used = 0.0;
  double duration = 0.0;
};
TrajectoryTotals accumulate_totals(const std::vector<StepRecord>& steps, double step_length);

}  // namespace ecodrive
