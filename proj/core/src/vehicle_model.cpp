#include "ecodrive/vehicle_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace ecodrive {
namespace {

double eval(const Quadratic& c, double x) { return c.c0 + (c.c1 + c.c2 * x) * x; }
double slope_of(const Quadratic& c, double x) { return c.c1 + 2.0 * c.c2 * x; }

double brake_limit(double omega, const TruckParameters& p) {
  return p.brake_torque.t0 / omega + p.brake_torque.t1 + p.brake_torque.t2 * omega;
}
double brake_limit_slope(double omega, const TruckParameters& p) {
  return -p.brake_torque.t0 / (omega * omega) + p.brake_torque.t2;
}

// Wheel-side transmission gain i_r*i_t/r_w [1/m].
double wheel_gain(int gear, const TruckParameters& p) {
  return p.rear_axle_ratio * p.gear_ratio(gear) / p.wheel_radius;
}

// d(omega)/dv in rpm per m/s.
double rpm_per_ms(int gear, const TruckParameters& p) { return 30.0 * wheel_gain(gear, p) / std::numbers::pi; }

struct FuelEval {
  double rate = 0.0;
  double d_omega = 0.0;
  double d_torque = 0.0;
};

FuelEval fuel_with_gradient(double w, double t, const TruckParameters& p) {
  const auto& b = p.fuel_map;
  const double raw = b.b00 + b.b10 * w + b.b20 * w * w + b.b01 * t + b.b02 * t * t + b.b11 * w * t;
  if (raw <= 0.0) return {};
  return {raw, b.b10 + 2.0 * b.b20 * w + b.b11 * t, b.b01 + 2.0 * b.b02 * t + b.b11 * w};
}

std::string format_check(const char* what, double value, const char* relation, double bound, const char* unit) {
  std::ostringstream os;
  os.precision(6);
  os << what << ' ' << value << ' ' << unit << ' ' << relation << ' ' << bound << ' ' << unit;
  return os.str();
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Cruising: return "cruising";
    case Mode::EcoRoll: return "eco_roll";
    case Mode::Coasting: return "coasting";
    case Mode::EngineBraking: return "engine_braking";
    case Mode::Downhill: return "downhill";
    case Mode::MaxAcceleration: return "max_acceleration";
  }
  return "unknown";
}

std::optional<Mode> mode_from_string(std::string_view name) {
  for (Mode m : kAllModes) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::string to_string(const ModePoint& q) { return std::string(to_string(q.mode)) + "/" + std::to_string(q.gear); }

std::string_view to_string(FeasibilityCheck check) {
  switch (check) {
    case FeasibilityCheck::Ok: return "ok";
    case FeasibilityCheck::Structure: return "structure";
    case FeasibilityCheck::EngineSpeed: return "engine_speed";
    case FeasibilityCheck::EngineTorque: return "engine_torque";
    case FeasibilityCheck::BrakeTorque: return "brake_torque";
    case FeasibilityCheck::ResistanceSign: return "resistance_sign";
    case FeasibilityCheck::Acceleration: return "acceleration";
  }
  return "unknown";
}

double engine_speed(double v, int gear, const TruckParameters& p) {
  if (gear == 0) return p.idle_speed_rpm;
  return rpm_per_ms(gear, p) * v;
}

double fuel_rate(double omega, double torque, const TruckParameters& p) {
  return fuel_with_gradient(omega, torque, p).rate;
}

double max_engine_torque(double omega, const TruckParameters& p) { return eval(p.max_torque, omega); }

double friction_torque(double omega, const TruckParameters& p) { return eval(p.friction, omega); }

double max_brake_torque(double omega, const TruckParameters& p) {
  if (!(omega > 0.0)) throw std::domain_error("max_brake_torque: engine speed must be positive");
  return brake_limit(omega, p);
}

double resistance_force(double v, double slope, const TruckParameters& p) {
  return p.mass_total * p.gravity * (p.rolling_coeff * std::cos(slope) + std::sin(slope)) +
         0.5 * p.air_density * p.drag_area * v * v;
}

double effective_mass(int gear, const TruckParameters& p) {
  double inertia = p.driveline_inertia_base;
  if (gear > 0) {
    const double it = p.gear_ratio(gear);
    inertia += p.driveline_inertia_gain * it * it;
  }
  return p.mass_total + inertia / (p.wheel_radius * p.wheel_radius);
}

ModeResponse mode_response(const ModePoint& q, double v, double slope, const TruckParameters& p) {
  ModeResponse r;
  const double drag = 0.5 * p.air_density * p.drag_area;
  r.resistance = resistance_force(v, slope, p);
  const double resistance_dv = 2.0 * drag * v;
  const double mass = effective_mass(q.gear, p);

  // Net wheel force N(v) and its slope; dv/ds = N / (M v).
  auto finish = [&](double net, double net_dv) {
    r.dv_ds = net / (mass * v);
    r.ddv_ds_dv = net_dv / (mass * v) - r.dv_ds / v;
  };

  if (q.mode == Mode::EcoRoll) {
    r.op = {p.idle_speed_rpm, p.idle_torque, 0.0, p.idle_fuel_rate};
    r.fuel_rate = p.idle_fuel_rate;
    finish(-r.resistance, -resistance_dv);
    return r;
  }

  const double gain = wheel_gain(q.gear, p);
  const double dw_dv = rpm_per_ms(q.gear, p);
  const double w = dw_dv * v;
  const double t_fr = eval(p.friction, w);
  const double t_fr_dv = slope_of(p.friction, w) * dw_dv;
  const double eta = p.efficiency;
  r.op.engine_speed = w;

  switch (q.mode) {
    case Mode::Cruising: {
      const double te = r.resistance / (gain * eta) + t_fr;
      const double te_dv = resistance_dv / (gain * eta) + t_fr_dv;
      const FuelEval f = fuel_with_gradient(w, te, p);
      r.op.engine_torque = te;
      r.op.fuel_rate = f.rate;
      r.fuel_rate = f.rate;
      r.dfuel_rate_dv = f.d_omega * dw_dv + f.d_torque * te_dv;
      break;
    }
    case Mode::Coasting:
      finish(-(gain * eta * t_fr + r.resistance), -(gain * eta * t_fr_dv + resistance_dv));
      break;
    case Mode::EngineBraking: {
      const double teb = brake_limit(w, p);
      const double teb_dv = brake_limit_slope(w, p) * dw_dv;
      r.op.brake_torque = teb;
      finish(-(gain * (eta * t_fr + teb) + r.resistance), -(gain * (eta * t_fr_dv + teb_dv) + resistance_dv));
      break;
    }
    case Mode::Downhill:
      r.op.brake_torque = -r.resistance / gain - eta * t_fr;
      break;
    case Mode::MaxAcceleration: {
      const double tem = eval(p.max_torque, w);
      const double tem_dv = slope_of(p.max_torque, w) * dw_dv;
      const FuelEval f = fuel_with_gradient(w, tem, p);
      r.op.engine_torque = tem;
      r.op.fuel_rate = f.rate;
      r.fuel_rate = f.rate;
      r.dfuel_rate_dv = f.d_omega * dw_dv + f.d_torque * tem_dv;
      finish(gain * eta * (tem - t_fr) - r.resistance, gain * eta * (tem_dv - t_fr_dv) - resistance_dv);
      break;
    }
    case Mode::EcoRoll:
      break;
  }
  return r;
}

ModeDynamics mode_dynamics(const ModePoint& q, double v, double slope, const TruckParameters& p) {
  if (!q.structurally_valid()) throw std::invalid_argument("mode_dynamics: invalid mode point " + to_string(q));
  if (!(v > kSingularityGuard)) throw std::invalid_argument("mode_dynamics: velocity at or below singularity guard");
  const ModeResponse r = mode_response(q, v, slope, p);
  return {r.dv_ds, r.op};
}

FeasibilityCheck check_feasibility(const ModePoint& q, double v, const ModeResponse& r, const TruckParameters& p) {
  if (!q.structurally_valid()) return FeasibilityCheck::Structure;
  if (q.gear > 0) {
    const double w = r.op.engine_speed;
    if (w < p.engine_speed_min_rpm || w > p.engine_speed_max_rpm) return FeasibilityCheck::EngineSpeed;
  }
  switch (q.mode) {
    case Mode::Cruising:
      if (!(r.op.engine_torque > 0.0) || r.op.engine_torque > max_engine_torque(r.op.engine_speed, p)) {
        return FeasibilityCheck::EngineTorque;
      }
      break;
    case Mode::MaxAcceleration:
      if (!(r.op.engine_torque > 0.0)) return FeasibilityCheck::EngineTorque;
      break;
    case Mode::EngineBraking:
      if (!(r.op.brake_torque > 0.0)) return FeasibilityCheck::BrakeTorque;
      break;
    case Mode::Downhill:
      if (!(r.resistance < 0.0)) return FeasibilityCheck::ResistanceSign;
      if (!(r.op.brake_torque > 0.0) || r.op.brake_torque > brake_limit(r.op.engine_speed, p)) {
        return FeasibilityCheck::BrakeTorque;
      }
      break;
    case Mode::EcoRoll:
    case Mode::Coasting:
      break;
  }
  const double accel = v * r.dv_ds;
  if (accel < p.accel_min || accel > p.accel_max) return FeasibilityCheck::Acceleration;
  return FeasibilityCheck::Ok;
}

Feasibility feasible(const ModePoint& q, double v, double slope, const TruckParameters& p) {
  if (!q.structurally_valid()) return {FeasibilityCheck::Structure, "eco-roll requires neutral and vice versa: " + to_string(q)};
  if (!(v > kSingularityGuard)) throw std::invalid_argument("feasible: velocity at or below singularity guard");
  const ModeResponse r = mode_response(q, v, slope, p);
  const FeasibilityCheck check = check_feasibility(q, v, r, p);
  const double w = r.op.engine_speed;
  switch (check) {
    case FeasibilityCheck::Ok:
      return {};
    case FeasibilityCheck::Structure:
      return {check, "invalid mode point"};
    case FeasibilityCheck::EngineSpeed:
      return {check, w < p.engine_speed_min_rpm ? format_check("engine speed", w, "below", p.engine_speed_min_rpm, "rpm")
                                                 : format_check("engine speed", w, "above", p.engine_speed_max_rpm, "rpm")};
    case FeasibilityCheck::EngineTorque:
      return {check, format_check("engine torque", r.op.engine_torque, "outside (0, limit], limit", max_engine_torque(w, p), "Nm")};
    case FeasibilityCheck::BrakeTorque:
      return {check, format_check("brake torque", r.op.brake_torque, "outside (0, limit], limit", brake_limit(w, p), "Nm")};
    case FeasibilityCheck::ResistanceSign:
      return {check, format_check("resistance force", r.resistance, "not below", 0.0, "N")};
    case FeasibilityCheck::Acceleration:
      return {check, format_check("acceleration", v * r.dv_ds, "outside band, limit", v * r.dv_ds < 0 ? p.accel_min : p.accel_max, "m/s^2")};
  }
  return {check, "unknown"};
}

}  // namespace ecodrive
