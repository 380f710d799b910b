#include "ecodrive/mode_catalog.hpp"

#include <array>
#include <cstdlib>
#include <stdexcept>

#include "ecodrive/units.hpp"

namespace ecodrive {
namespace {

constexpr int kUniverseSize = 5 * kGearCount + 1;

constexpr std::array<ModePoint, kUniverseSize> build_universe() {
  std::array<ModePoint, kUniverseSize> out{};
  std::size_t i = 0;
  for (Mode m : kAllModes) {
    if (m == Mode::EcoRoll) {
      out[i++] = {m, 0};
      continue;
    }
    for (int y = 1; y <= kGearCount; ++y) out[i++] = {m, y};
  }
  return out;
}

constexpr auto kUniverse = build_universe();

int sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

std::span<const ModePoint> mode_universe() { return kUniverse; }

bool eco_roll_suppressed(const SampleContext& ctx, const TruckParameters& p, const CatalogOptions& opts) {
  if (!opts.suppress_eco_roll) return false;
  if (!ctx.previously_selected || ctx.previously_selected->mode == Mode::EcoRoll) return false;
  if (!(ctx.speed_limit - ctx.v < units::kmh_to_ms(opts.suppression_margin_kmh))) return false;
  const ModeResponse eco = mode_response({Mode::EcoRoll, 0}, ctx.v, ctx.slope, p);
  return sign(eco.resistance) == -sign(eco.dv_ds) && sign(eco.resistance) != 0;
}

void collect_candidates(const SampleContext& ctx, const TruckParameters& p, const CatalogOptions& opts,
                        std::vector<Candidate>& out) {
  if (!(ctx.v > kSingularityGuard) || !(ctx.speed_limit > 0.0)) {
    throw std::invalid_argument("collect_candidates: invalid sample context");
  }
  out.clear();
  const bool drop_eco = eco_roll_suppressed(ctx, p, opts);
  const int prev_gear = ctx.previously_selected ? ctx.previously_selected->gear : 0;
  for (const ModePoint& q : kUniverse) {
    if (q.mode == Mode::EcoRoll && drop_eco) continue;
    if (opts.max_gear_step && prev_gear > 0 && q.gear > 0 && std::abs(q.gear - prev_gear) > *opts.max_gear_step) {
      continue;
    }
    ModeResponse r = mode_response(q, ctx.v, ctx.slope, p);
    if (check_feasibility(q, ctx.v, r, p) != FeasibilityCheck::Ok) continue;
    out.push_back({q, r});
  }
}

std::vector<ModePoint> enumerate_candidates(const SampleContext& ctx, const TruckParameters& p,
                                            const CatalogOptions& opts) {
  std::vector<Candidate> buffer;
  collect_candidates(ctx, p, opts, buffer);
  std::vector<ModePoint> out;
  out.reserve(buffer.size());
  for (const auto& c : buffer) out.push_back(c.q);
  return out;
}

}  // namespace ecodrive
