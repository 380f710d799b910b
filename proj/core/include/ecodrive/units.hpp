#pragma once

#include <numbers>

namespace ecodrive::units {

constexpr double kKmhPerMs = 3.6;

constexpr double kmh_to_ms(double kmh) { return kmh / kKmhPerMs; }
constexpr double ms_to_kmh(double ms) { return ms * kKmhPerMs; }
constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }
constexpr double gps_to_kgps(double gps) { return gps * 1e-3; }

}  // namespace ecodrive::units
