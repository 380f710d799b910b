#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ecodrive/truck_parameters.hpp"

namespace ecodrive {

/// Driving modes in candidate order. Every mode fixes the continuous inputs
/// (engine and retarder torque) so that only the (mode, gear) pair remains
/// a decision.
enum class Mode : std::uint8_t {
  Cruising,
  EcoRoll,
  Coasting,
  EngineBraking,
  Downhill,
  MaxAcceleration,
};

inline constexpr std::array<Mode, 6> kAllModes{Mode::Cruising,      Mode::EcoRoll,  Mode::Coasting,
                                               Mode::EngineBraking, Mode::Downhill, Mode::MaxAcceleration};

std::string_view to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view name);

/// A (driving mode, gear) pair. Gear 0 is neutral and belongs to EcoRoll only.
struct ModePoint {
  Mode mode = Mode::Cruising;
  int gear = 1;

  constexpr bool structurally_valid() const {
    if (gear < 0 || gear > kGearCount) return false;
    return (mode == Mode::EcoRoll) == (gear == 0);
  }
  friend constexpr bool operator==(const ModePoint&, const ModePoint&) = default;
};

std::string to_string(const ModePoint& q);

struct EngineOperatingPoint {
  double engine_speed = 0.0;  // rpm
  double engine_torque = 0.0;  // Nm
  double brake_torque = 0.0;  // Nm
  double fuel_rate = 0.0;  // g/s
};

/// Velocity below which every mode is undefined (all dynamics divide by v).
inline constexpr double kSingularityGuard = 0.1;  // m/s

// Engine maps. Engine speeds in rpm, torques in Nm.
double engine_speed(double v, int gear, const TruckParameters& p);
double fuel_rate(double omega, double torque, const TruckParameters& p);
double max_engine_torque(double omega, const TruckParameters& p);
double friction_torque(double omega, const TruckParameters& p);
/// Throws std::domain_error for omega <= 0.
double max_brake_torque(double omega, const TruckParameters& p);

/// Rolling + gravitational + aerodynamic resistance [N]; slope in rad.
double resistance_force(double v, double slope, const TruckParameters& p);

/// Equivalent translational mass m + J_pt(y)/r_w^2. Neutral uses the base
/// inertia only.
double effective_mass(int gear, const TruckParameters& p);

struct ModeDynamics {
  double dv_ds = 0.0;  // 1/s
  EngineOperatingPoint op;
};

/// Evaluates the mode unconditionally; feasibility is a separate question.
/// Throws std::invalid_argument for a structurally invalid q or
/// v <= kSingularityGuard.
ModeDynamics mode_dynamics(const ModePoint& q, double v, double slope, const TruckParameters& p);

/// Mode dynamics together with the velocity sensitivities the costate needs.
struct ModeResponse {
  double dv_ds = 0.0;
  double ddv_ds_dv = 0.0;    // d(dv/ds)/dv
  double fuel_rate = 0.0;    // g/s
  double dfuel_rate_dv = 0.0;  // (g/s) per (m/s)
  double resistance = 0.0;   // N
  EngineOperatingPoint op;
};

/// Same evaluation as mode_dynamics without argument checks. Caller
/// guarantees a valid q and v > kSingularityGuard.
ModeResponse mode_response(const ModePoint& q, double v, double slope, const TruckParameters& p);

enum class FeasibilityCheck : std::uint8_t {
  Ok,
  Structure,
  EngineSpeed,
  EngineTorque,
  BrakeTorque,
  ResistanceSign,
  Acceleration,
};

std::string_view to_string(FeasibilityCheck check);

struct Feasibility {
  FeasibilityCheck failed = FeasibilityCheck::Ok;
  std::string detail;

  bool ok() const { return failed == FeasibilityCheck::Ok; }
  explicit operator bool() const { return ok(); }
};

Feasibility feasible(const ModePoint& q, double v, double slope, const TruckParameters& p);

/// Allocation-free form used on the solver's hot path. Returns the first
/// failed check for an already evaluated response.
FeasibilityCheck check_feasibility(const ModePoint& q, double v, const ModeResponse& r, const TruckParameters& p);

}  // namespace ecodrive
