#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ecodrive {

inline constexpr int kGearCount = 12;

/// Second-order polynomial c0 + c1*x + c2*x^2.
struct Quadratic {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Bivariate second-order fuel map in (engine speed [rpm], torque [Nm]) -> g/s.
struct FuelMapCoefficients {
  double b00 = 0.0;
  double b10 = 0.0;
  double b20 = 0.0;
  double b01 = 0.0;
  double b02 = 0.0;
  double b11 = 0.0;
};

/// Retarder maximum torque t0/omega + t1 + t2*omega.
struct BrakeTorqueCoefficients {
  double t0 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
};

/// Physical and powertrain constants of the truck. SI units unless the
/// field name says otherwise (rpm for engine speed, km/h for velocity_min).
/// Immutable after loading; every consumer takes it by const reference.
struct TruckParameters {
  double mass_total = 30e3;          // kg
  double rolling_coeff = 0.009;
  double drag_area = 6.24;           // m^2
  double wheel_radius = 0.492;       // m
  double rear_axle_ratio = 2.6875;
  std::array<double, kGearCount> gear_ratios{15.86, 12.33, 9.57, 7.44, 5.87, 4.57,
                                             3.47,  2.7,   2.1,  1.63, 1.29, 1.0};
  double driveline_inertia_base = 83.8;   // kg m^2
  double driveline_inertia_gain = 19.56;  // kg m^2
  double gravity = 9.806;
  double air_density = 1.205;
  double efficiency = 0.98;
  double idle_speed_rpm = 550.0;
  double idle_torque = 150.0;      // Nm
  double idle_fuel_rate = 0.27;    // g/s
  Quadratic max_torque{-1298.0, 5.144, -1.941e-3};
  BrakeTorqueCoefficients brake_torque{-4.198e6, 6961.432, -1.581};
  Quadratic friction{112.5, -0.0314, 3.36e-5};
  FuelMapCoefficients fuel_map{0.0192, 1.654e-4, 2.31e-7, -2.367e-3, 1.446e-6, 5.0e-6};
  double engine_speed_min_rpm = 550.0;
  double engine_speed_max_rpm = 2200.0;
  double velocity_min_kmh = 8.0;
  double accel_max = 2.0;   // m/s^2
  double accel_min = -2.0;  // m/s^2

  double gear_ratio(int gear) const { return gear_ratios.at(static_cast<std::size_t>(gear - 1)); }
};

/// Raised by the loader; `key()` names the offending field.
class ParameterError : public std::runtime_error {
 public:
  ParameterError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

inline constexpr int kParameterSchemaVersion = 1;

/// Table-default truck with the shipped synthetic fuel map.
TruckParameters default_truck_parameters();

/// Checks every invariant; throws ParameterError on the first violation.
void validate(const TruckParameters& p);

TruckParameters parse_truck_parameters(std::string_view json_document);
TruckParameters load_truck_parameters(const std::filesystem::path& path);
std::string to_json(const TruckParameters& p);

}  // namespace ecodrive
