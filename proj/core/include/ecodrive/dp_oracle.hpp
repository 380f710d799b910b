#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecodrive/pmp_solver.hpp"

namespace ecodrive {

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform grid on [v_min, v_max] with the given spacing; `pinned` values
/// (boundary velocities, the limit itself) are inserted exactly.
std::vector<double> make_velocity_grid(double v_min, double v_max, double step, std::span<const double> pinned = {});

struct DpResult {
  double optimal_cost = 0.0;            // N m, same discretisation as the PMP cost
  std::vector<ModePoint> optimal_path;  // mode of interval k, k = 0..N-1
  std::vector<double> velocities;       // grid velocity at sample k, k = 0..N
};

inline constexpr std::size_t kDefaultTransitionBudget = 50'000'000;

/// Exhaustive backward dynamic programming over (sample, grid velocity).
/// Transitions are single velocity-only RK4 steps of each feasible mode point,
/// snapped to the nearest grid velocity. Eco-roll suppression is not
/// applied (the state carries no mode history). Empty when the entry
/// velocity is unreachable. Throws BudgetExceeded when
/// N * |grid| * 61 exceeds `transition_budget`.
std::optional<DpResult> dp_oracle(const RouteSegment& segment, const CostWeights& w, const SolverConfig& cfg,
                                  const TruckParameters& p, std::span<const double> velocity_grid,
                                  std::size_t transition_budget = kDefaultTransitionBudget);

}  // namespace ecodrive
