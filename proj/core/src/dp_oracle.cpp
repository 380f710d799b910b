#include "ecodrive/dp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecodrive/units.hpp"

namespace ecodrive {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Velocity-only RK4 from s to s - h; deliberately separate from the costate
// integrator it is used to check.
std::optional<double> velocity_step_back(const ModePoint& q, double v, double h, const double (&slopes)[3],
                                         const TruckParameters& p) {
  auto f = [&](double vv, double slope) -> std::optional<double> {
    if (!(vv > kSingularityGuard)) return std::nullopt;
    return mode_response(q, vv, slope, p).dv_ds;
  };
  const auto k1 = f(v, slopes[0]);
  if (!k1) return std::nullopt;
  const auto k2 = f(v - 0.5 * h * *k1, slopes[1]);
  if (!k2) return std::nullopt;
  const auto k3 = f(v - 0.5 * h * *k2, slopes[1]);
  if (!k3) return std::nullopt;
  const auto k4 = f(v - h * *k3, slopes[2]);
  if (!k4) return std::nullopt;
  return v - h / 6.0 * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
}

std::size_t nearest(const std::vector<double>& grid, double v) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), v);
  if (it == grid.begin()) return 0;
  if (it == grid.end()) return grid.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  return (v - grid[hi - 1] <= grid[hi] - v) ? hi - 1 : hi;
}

}  // namespace

std::vector<double> make_velocity_grid(double v_min, double v_max, double step, std::span<const double> pinned) {
  if (!(step > 0.0) || !(v_max >= v_min)) throw std::invalid_argument("make_velocity_grid: invalid range or step");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((v_max - v_min) / step + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) grid.push_back(v_min + step * static_cast<double>(i));
  grid.push_back(v_max);
  grid.insert(grid.end(), pinned.begin(), pinned.end());
  std::sort(grid.begin(), grid.end());
  // Drop near-duplicates, keeping pinned/exact endpoints.
  std::vector<double> out;
  for (double v : grid) {
    if (!out.empty() && v - out.back() < 1e-9) {
      continue;
    }
    out.push_back(v);
  }
  return out;
}

std::optional<DpResult> dp_oracle(const RouteSegment& segment, const CostWeights& w, const SolverConfig& cfg,
                                  const TruckParameters& p, std::span<const double> velocity_grid,
                                  std::size_t transition_budget) {
  w.validate();
  cfg.validate();
  std::vector<double> grid(velocity_grid.begin(), velocity_grid.end());
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("dp_oracle: velocity grid must be non-empty and sorted");
  }
  const int n = sample_count(segment, cfg);
  const std::size_t g = grid.size();
  const double transitions = static_cast<double>(n) * static_cast<double>(g) * static_cast<double>(mode_universe().size());
  if (transitions > static_cast<double>(transition_budget)) {
    throw BudgetExceeded("dp_oracle: " + std::to_string(static_cast<long long>(transitions)) +
                         " transitions exceed the budget of " + std::to_string(transition_budget));
  }
  const double h = n > 0 ? segment.length() / n : 0.0;
  const double v_floor = cfg.velocity_floor(p);
  const double v_lim = segment.speed_limit;
  auto position = [&](int k) { return k == n ? segment.end_position : segment.start_position + h * k; };

  // cost[k][j]: cheapest cost of reaching the segment end from grid point j at sample k.
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(n) + 1, std::vector<double>(g, kInf));
  std::vector<std::vector<std::size_t>> next(static_cast<std::size_t>(n) + 1, std::vector<std::size_t>(g, 0));
  std::vector<std::vector<ModePoint>> mode(static_cast<std::size_t>(n) + 1, std::vector<ModePoint>(g));
  cost[static_cast<std::size_t>(n)][nearest(grid, segment.exit_velocity)] = 0.0;

  for (int k = n; k >= 1; --k) {
    const double s_hi = position(k);
    const double s_lo = position(k - 1);
    const double slopes[3] = {segment.slope_at(s_hi), segment.slope_at(0.5 * (s_hi + s_lo)), segment.slope_at(s_lo)};
    auto& here = cost[static_cast<std::size_t>(k)];
    auto& there = cost[static_cast<std::size_t>(k - 1)];
    for (std::size_t j = 0; j < g; ++j) {
      if (here[j] == kInf) continue;
      const double v = grid[j];
      if (!(v > kSingularityGuard)) continue;
      for (const ModePoint& q : mode_universe()) {
        const ModeResponse r = mode_response(q, v, slopes[0], p);
        if (check_feasibility(q, v, r, p) != FeasibilityCheck::Ok) continue;
        const auto v_prev = velocity_step_back(q, v, h, slopes, p);
        if (!v_prev || *v_prev < v_floor || *v_prev > v_lim) continue;
        const ModeResponse r_prev = mode_response(q, *v_prev, slopes[2], p);
        if (check_feasibility(q, *v_prev, r_prev, p) != FeasibilityCheck::Ok) continue;
        // Same-signed dynamics at both ends but a step the other way: no real
        // trajectory behind it.
        if (r.dv_ds * r_prev.dv_ds > 0.0 && (v - *v_prev) * r.dv_ds <= 0.0) continue;
        const double stage = (w.fuel_weight * units::gps_to_kgps(r.fuel_rate) + w.time_weight) / v * h;
        const std::size_t i = nearest(grid, *v_prev);
        const double total = here[j] + stage;
        if (total < there[i]) {
          there[i] = total;
          next[static_cast<std::size_t>(k - 1)][i] = j;
          mode[static_cast<std::size_t>(k - 1)][i] = q;
        }
      }
    }
  }

  const std::size_t start = nearest(grid, segment.entry_velocity);
  if (cost[0][start] == kInf) return std::nullopt;
  DpResult out;
  out.optimal_cost = cost[0][start];
  std::size_t j = start;
  out.velocities.push_back(grid[j]);
  for (int k = 0; k < n; ++k) {
    out.optimal_path.push_back(mode[static_cast<std::size_t>(k)][j]);
    j = next[static_cast<std::size_t>(k)][j];
    out.velocities.push_back(grid[j]);
  }
  return out;
}

}  // namespace ecodrive
