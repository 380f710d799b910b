#include "ecodrive/truck_parameters.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ecodrive {
namespace {

using nlohmann::json;

double raw_fuel_map(const FuelMapCoefficients& b, double w, double t) {
  return b.b00 + b.b10 * w + b.b20 * w * w + b.b01 * t + b.b02 * t * t + b.b11 * w * t;
}

void require_positive(double value, const char* key) {
  if (!(value > 0.0) || !std::isfinite(value)) throw ParameterError(key, "must be finite and strictly positive");
}

const json& field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ParameterError(key, "missing required field");
  return *it;
}

double number(const json& doc, const char* key) {
  const json& v = field(doc, key);
  if (!v.is_number()) throw ParameterError(key, "expected a number");
  return v.get<double>();
}

template <std::size_t N>
std::array<double, N> number_array(const json& doc, const char* key) {
  const json& v = field(doc, key);
  if (!v.is_array() || v.size() != N) {
    throw ParameterError(key, "expected an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) throw ParameterError(key, "expected an array of numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

}  // namespace

TruckParameters default_truck_parameters() { return TruckParameters{}; }

void validate(const TruckParameters& p) {
  require_positive(p.mass_total, "mass_total_kg");
  require_positive(p.rolling_coeff, "rolling_coeff");
  require_positive(p.drag_area, "drag_area_m2");
  require_positive(p.wheel_radius, "wheel_radius_m");
  require_positive(p.rear_axle_ratio, "rear_axle_ratio");
  for (int y = 1; y <= kGearCount; ++y) {
    require_positive(p.gear_ratio(y), "gear_ratios");
    if (y > 1 && !(p.gear_ratio(y) < p.gear_ratio(y - 1))) {
      throw ParameterError("gear_ratios", "must be strictly decreasing (gear " + std::to_string(y) + ")");
    }
  }
  require_positive(p.driveline_inertia_base, "driveline_inertia_base_kgm2");
  if (!(p.driveline_inertia_gain >= 0.0)) throw ParameterError("driveline_inertia_gain_kgm2", "must be nonnegative");
  require_positive(p.gravity, "gravity_ms2");
  require_positive(p.air_density, "air_density_kgm3");
  require_positive(p.efficiency, "efficiency");
  if (p.efficiency > 1.0) throw ParameterError("efficiency", "must not exceed 1");
  require_positive(p.idle_speed_rpm, "idle_speed_rpm");
  if (!(p.idle_torque >= 0.0)) throw ParameterError("idle_torque_nm", "must be nonnegative");
  if (!(p.idle_fuel_rate >= 0.0)) throw ParameterError("idle_fuel_rate_gps", "must be nonnegative");
  require_positive(p.engine_speed_min_rpm, "engine_speed_min_rpm");
  if (!(p.engine_speed_max_rpm > p.engine_speed_min_rpm)) {
    throw ParameterError("engine_speed_max_rpm", "must exceed engine_speed_min_rpm");
  }
  require_positive(p.velocity_min_kmh, "velocity_min_kmh");
  if (!(p.accel_max > 0.0)) throw ParameterError("accel_max_ms2", "must be positive");
  if (!(p.accel_min < 0.0)) throw ParameterError("accel_min_ms2", "must be negative");

  if (raw_fuel_map(p.fuel_map, p.idle_speed_rpm, p.idle_torque) < 0.0) {
    throw ParameterError("fuel_map_coeffs", "negative fuel rate at the idle operating point");
  }
  constexpr int kGrid = 64;
  for (int i = 0; i <= kGrid; ++i) {
    const double w = p.engine_speed_min_rpm + (p.engine_speed_max_rpm - p.engine_speed_min_rpm) * i / kGrid;
    const double t_max = std::max(0.0, p.max_torque.c0 + p.max_torque.c1 * w + p.max_torque.c2 * w * w);
    for (int j = 0; j <= kGrid; ++j) {
      const double t = t_max * j / kGrid;
      if (raw_fuel_map(p.fuel_map, w, t) < 0.0) {
        std::ostringstream msg;
        msg << "negative fuel rate at omega=" << w << " rpm, torque=" << t << " Nm";
        throw ParameterError("fuel_map_coeffs", msg.str());
      }
    }
  }
}

TruckParameters parse_truck_parameters(std::string_view json_document) {
  json doc;
  try {
    doc = json::parse(json_document);
  } catch (const json::parse_error& e) {
    throw ParameterError("<document>", e.what());
  }
  if (!doc.is_object()) throw ParameterError("<document>", "expected an object");
  const json& version = field(doc, "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kParameterSchemaVersion) {
    throw ParameterError("schema_version", "unsupported version (expected " + std::to_string(kParameterSchemaVersion) + ")");
  }

  TruckParameters p;
  p.mass_total = number(doc, "mass_total_kg");
  p.rolling_coeff = number(doc, "rolling_coeff");
  p.drag_area = number(doc, "drag_area_m2");
  p.wheel_radius = number(doc, "wheel_radius_m");
  p.rear_axle_ratio = number(doc, "rear_axle_ratio");
  p.gear_ratios = number_array<kGearCount>(doc, "gear_ratios");
  p.driveline_inertia_base = number(doc, "driveline_inertia_base_kgm2");
  p.driveline_inertia_gain = number(doc, "driveline_inertia_gain_kgm2");
  p.gravity = number(doc, "gravity_ms2");
  p.air_density = number(doc, "air_density_kgm3");
  p.efficiency = number(doc, "efficiency");
  p.idle_speed_rpm = number(doc, "idle_speed_rpm");
  p.idle_torque = number(doc, "idle_torque_nm");
  p.idle_fuel_rate = number(doc, "idle_fuel_rate_gps");
  const auto te = number_array<3>(doc, "max_torque_coeffs");
  p.max_torque = {te[0], te[1], te[2]};
  const auto tb = number_array<3>(doc, "brake_torque_coeffs");
  p.brake_torque = {tb[0], tb[1], tb[2]};
  const auto fr = number_array<3>(doc, "friction_coeffs");
  p.friction = {fr[0], fr[1], fr[2]};
  const auto fm = number_array<6>(doc, "fuel_map_coeffs");
  p.fuel_map = {fm[0], fm[1], fm[2], fm[3], fm[4], fm[5]};
  p.engine_speed_min_rpm = number(doc, "engine_speed_min_rpm");
  p.engine_speed_max_rpm = number(doc, "engine_speed_max_rpm");
  p.velocity_min_kmh = number(doc, "velocity_min_kmh");
  p.accel_max = number(doc, "accel_max_ms2");
  p.accel_min = number(doc, "accel_min_ms2");
  validate(p);
  return p;
}

TruckParameters load_truck_parameters(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("<file>", "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_truck_parameters(buffer.str());
}

std::string to_json(const TruckParameters& p) {
  json doc = {
      {"schema_version", kParameterSchemaVersion},
      {"mass_total_kg", p.mass_total},
      {"rolling_coeff", p.rolling_coeff},
      {"drag_area_m2", p.drag_area},
      {"wheel_radius_m", p.wheel_radius},
      {"rear_axle_ratio", p.rear_axle_ratio},
      {"gear_ratios", p.gear_ratios},
      {"driveline_inertia_base_kgm2", p.driveline_inertia_base},
      {"driveline_inertia_gain_kgm2", p.driveline_inertia_gain},
      {"gravity_ms2", p.gravity},
      {"air_density_kgm3", p.air_density},
      {"efficiency", p.efficiency},
      {"idle_speed_rpm", p.idle_speed_rpm},
      {"idle_torque_nm", p.idle_torque},
      {"idle_fuel_rate_gps", p.idle_fuel_rate},
      {"max_torque_coeffs", {p.max_torque.c0, p.max_torque.c1, p.max_torque.c2}},
      {"brake_torque_coeffs", {p.brake_torque.t0, p.brake_torque.t1, p.brake_torque.t2}},
      {"friction_coeffs", {p.friction.c0, p.friction.c1, p.friction.c2}},
      {"fuel_map_coeffs",
       {p.fuel_map.b00, p.fuel_map.b10, p.fuel_map.b20, p.fuel_map.b01, p.fuel_map.b02, p.fuel_map.b11}},
      {"engine_speed_min_rpm", p.engine_speed_min_rpm},
      {"engine_speed_max_rpm", p.engine_speed_max_rpm},
      {"velocity_min_kmh", p.velocity_min_kmh},
      {"accel_max_ms2", p.accel_max},
      {"accel_min_ms2", p.accel_min},
  };
  return doc.dump(2);
}

}  // namespace ecodrive
