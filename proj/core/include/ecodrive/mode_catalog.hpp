#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ecodrive/vehicle_model.hpp"

namespace ecodrive {

/// All 61 structurally valid (mode, gear) pairs in candidate order:
/// mode enum order, then ascending gear.
std::span<const ModePoint> mode_universe();

struct SampleContext {
  double v = 0.0;            // m/s
  double slope = 0.0;        // rad
  double speed_limit = 0.0;  // m/s
  std::optional<ModePoint> previously_selected;
};

struct CatalogOptions {
  /// Eco-roll is dropped near the speed limit when the previous mode was not
  /// eco-roll, which stops roll/coast chattering on descents.
  bool suppress_eco_roll = true;
  double suppression_margin_kmh = 1.5;
  /// Largest allowed gear change relative to previously_selected; unset
  /// means unconstrained.
  std::optional<int> max_gear_step;
};

/// True when the eco-roll suppression rule removes EcoRoll at this sample.
bool eco_roll_suppressed(const SampleContext& ctx, const TruckParameters& p, const CatalogOptions& opts = {});

struct Candidate {
  ModePoint q;
  ModeResponse response;
};

/// Fills `out` with every feasible candidate and its evaluated response.
/// Reuses the buffer; intended for per-sample use in the solvers.
void collect_candidates(const SampleContext& ctx, const TruckParameters& p, const CatalogOptions& opts,
                        std::vector<Candidate>& out);

std::vector<ModePoint> enumerate_candidates(const SampleContext& ctx, const TruckParameters& p,
                                            const CatalogOptions& opts = {});

}  // namespace ecodrive
