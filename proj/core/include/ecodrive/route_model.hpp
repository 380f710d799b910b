#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ecodrive {

enum class EventType : std::uint8_t { RedLight, StopSign, Turn, SpeedLimitChange, Destination };

std::string_view to_string(EventType type);
std::optional<EventType> event_from_string(std::string_view tag);

struct RouteEvent {
  EventType type = EventType::Destination;
  double advised_speed_kmh = 0.0;  // Turn only
};

struct RoutePoint {
  double position = 0.0;         // m from route start
  double elevation = 0.0;        // m relative to start
  double speed_limit_kmh = 0.0;  // effective from this position onward
  std::optional<RouteEvent> event;
};

struct Route {
  std::string name;
  std::string datum;
  std::vector<RoutePoint> points;

  double length() const { return points.empty() ? 0.0 : points.back().position - points.front().position; }
};

class RouteError : public std::runtime_error {
 public:
  explicit RouteError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  /// 1-based line of the offending row, 0 when not tied to a row.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline constexpr int kRouteSchemaVersion = 1;

/// Delimited text: header `position_m,elevation_m,speed_limit_kmh,event,event_param`,
/// optional `# ecodrive-route v1` banner and `#` comment lines.
Route parse_route_csv(std::string_view text);
/// Structured document: {"schema_version", "meta": {name, datum}, "points": [...]}.
Route parse_route_json(std::string_view text);
/// Dispatches on the first significant character ('{' selects the structured form).
Route parse_route(std::string_view document);
Route load_route(const std::filesystem::path& path);

std::string route_to_csv(const Route& route);
std::string route_to_json(const Route& route);

/// Piecewise-linear elevation on an integer-metre grid. The gradient of each
/// interval is attributed to its midpoint and interpolated linearly between
/// midpoints, held constant beyond the outermost midpoints.
class SlopeProfile {
 public:
  static SlopeProfile from_points(std::span<const RoutePoint> points);
  /// Exact elevation samples (no rounding); positions strictly increasing.
  static SlopeProfile from_samples(std::vector<double> positions, std::vector<double> elevations);
  static SlopeProfile constant(double slope, double start, double end);

  /// Throws std::out_of_range outside [start(), end()].
  double slope_at(double s) const;
  double elevation_at(double s) const;
  /// atan of the mean gradient over [a, b].
  double mean_slope(double a, double b) const;

  double start() const { return x_.front(); }
  double end() const { return x_.back(); }

 private:
  SlopeProfile(std::vector<double> x, std::vector<double> z);
  std::vector<double> x_;
  std::vector<double> z_;
  std::vector<double> mid_;
  std::vector<double> grad_;
};

double slope_at(std::span<const RoutePoint> points, double s);

enum class SlopeClass : std::uint8_t { Negligible, Uphill, Downhill };
std::string_view to_string(SlopeClass c);

/// What ends a segment: a static event or a change of slope class.
enum class BoundaryKind : std::uint8_t { RedLight, StopSign, Turn, SpeedLimitChange, Destination, SlopeChange };
std::string_view to_string(BoundaryKind kind);

struct RouteSegment {
  double start_position = 0.0;  // m
  double end_position = 0.0;    // m
  std::shared_ptr<const SlopeProfile> slope_profile;
  double speed_limit = 0.0;     // m/s
  double entry_velocity = 0.0;  // m/s
  double exit_velocity = 0.0;   // m/s
  SlopeClass slope_class = SlopeClass::Negligible;
  BoundaryKind terminating_event = BoundaryKind::Destination;

  double length() const { return end_position - start_position; }
  double slope_at(double s) const { return slope_profile->slope_at(s); }
};

/// Builds a stand-alone segment on a constant grade, mainly for tests and tools.
RouteSegment make_uniform_segment(double length, double slope, double speed_limit, double entry_velocity,
                                  double exit_velocity);

struct SegmentationConfig {
  double negligible_slope_deg = 0.5;
  double class_window_m = 100.0;
  double min_segment_length_m = 50.0;
  double velocity_min_kmh = 8.0;
};

/// Cuts the route at every static event and slope-class change and assigns
/// boundary velocities. Throws RouteError when the route lacks a final
/// Destination and std::invalid_argument for an out-of-band current velocity.
std::vector<RouteSegment> segment_route(const Route& route, double current_velocity,
                                        const SegmentationConfig& cfg = {});

}  // namespace ecodrive
