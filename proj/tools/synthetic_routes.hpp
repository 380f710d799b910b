#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "ecodrive/route_model.hpp"

namespace ecodrive::synth {

enum class RouteKind : std::uint8_t { Valley, LongHaul };

std::optional<RouteKind> route_kind_from_string(std::string_view name);

/// Piecewise-constant-grade route sampled every 25 m. A nonzero seed adds up
/// to 2 cm of elevation noise at interior points; seed 0 is exact.
Route make_route(RouteKind kind, std::uint32_t seed = 0);

}  // namespace ecodrive::synth
