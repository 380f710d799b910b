#include "ecodrive/route_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ecodrive/units.hpp"
#include "json.hpp"

namespace ecodrive {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view text, const char* column, std::size_t line) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw RouteError(std::string("malformed ") + column + " '" + std::string(text) + "'", line);
  }
  return value;
}

std::optional<RouteEvent> make_event(std::string_view tag, std::optional<double> param, std::size_t line) {
  if (tag.empty()) return std::nullopt;
  const auto type = event_from_string(tag);
  if (!type) throw RouteError("unknown event tag '" + std::string(tag) + "'", line);
  RouteEvent ev{*type, 0.0};
  if (*type == EventType::Turn) {
    if (!param || !(*param > 0.0)) throw RouteError("turn event requires a positive advised speed", line);
    ev.advised_speed_kmh = *param;
  }
  return ev;
}

void check_point(const RoutePoint& pt, const RoutePoint* prev, std::size_t line) {
  if (!(pt.speed_limit_kmh > 0.0)) throw RouteError("speed limit must be positive", line);
  if (prev && !(pt.position > prev->position)) {
    throw RouteError(pt.position == prev->position ? "duplicate position" : "position decreases", line);
  }
}

void check_route(const Route& r) {
  if (r.points.size() < 2) throw RouteError("route needs at least two points");
}

SlopeClass classify(double slope, double threshold) {
  if (std::abs(slope) < threshold) return SlopeClass::Negligible;
  return slope > 0.0 ? SlopeClass::Uphill : SlopeClass::Downhill;
}

BoundaryKind to_boundary(EventType t) {
  switch (t) {
    case EventType::RedLight: return BoundaryKind::RedLight;
    case EventType::StopSign: return BoundaryKind::StopSign;
    case EventType::Turn: return BoundaryKind::Turn;
    case EventType::SpeedLimitChange: return BoundaryKind::SpeedLimitChange;
    case EventType::Destination: return BoundaryKind::Destination;
  }
  return BoundaryKind::Destination;
}

// Lower value wins when several cut reasons share one position.
int priority(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::Destination: return 0;
    case BoundaryKind::RedLight: return 1;
    case BoundaryKind::StopSign: return 2;
    case BoundaryKind::Turn: return 3;
    case BoundaryKind::SpeedLimitChange: return 4;
    case BoundaryKind::SlopeChange: return 5;
  }
  return 6;
}

struct Cut {
  BoundaryKind kind = BoundaryKind::SlopeChange;
  double advised_kmh = 0.0;
};

}  // namespace

std::string_view to_string(EventType type) {
  switch (type) {
    case EventType::RedLight: return "red_light";
    case EventType::StopSign: return "stop";
    case EventType::Turn: return "turn";
    case EventType::SpeedLimitChange: return "limit_change";
    case EventType::Destination: return "destination";
  }
  return "";
}

std::optional<EventType> event_from_string(std::string_view tag) {
  for (EventType t : {EventType::RedLight, EventType::StopSign, EventType::Turn, EventType::SpeedLimitChange,
                      EventType::Destination}) {
    if (to_string(t) == tag) return t;
  }
  return std::nullopt;
}

std::string_view to_string(SlopeClass c) {
  switch (c) {
    case SlopeClass::Negligible: return "negligible";
    case SlopeClass::Uphill: return "uphill";
    case SlopeClass::Downhill: return "downhill";
  }
  return "";
}

std::string_view to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::RedLight: return "red_light";
    case BoundaryKind::StopSign: return "stop";
    case BoundaryKind::Turn: return "turn";
    case BoundaryKind::SpeedLimitChange: return "limit_change";
    case BoundaryKind::Destination: return "destination";
    case BoundaryKind::SlopeChange: return "slope_change";
  }
  return "";
}

Route parse_route_csv(std::string_view text) {
  Route route;
  std::optional<std::vector<std::string_view>> header;
  int col_pos = -1, col_elev = -1, col_limit = -1, col_event = -1, col_param = -1;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '#') {
      constexpr std::string_view kBanner = "# ecodrive-route v";
      if (line.starts_with(kBanner) && line.substr(kBanner.size()) != std::to_string(kRouteSchemaVersion)) {
        throw RouteError("unsupported route format version", line_no);
      }
      continue;
    }
    auto fields = split(line, ',');
    if (!header) {
      header = fields;
      for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
        if (fields[i] == "position_m") col_pos = i;
        else if (fields[i] == "elevation_m") col_elev = i;
        else if (fields[i] == "speed_limit_kmh") col_limit = i;
        else if (fields[i] == "event") col_event = i;
        else if (fields[i] == "event_param") col_param = i;
      }
      for (auto [col, name] : {std::pair{col_pos, "position_m"}, {col_elev, "elevation_m"},
                               {col_limit, "speed_limit_kmh"}, {col_event, "event"}}) {
        if (col < 0) throw RouteError(std::string("missing required column '") + name + "'", line_no);
      }
      continue;
    }
    if (fields.size() != header->size()) {
      throw RouteError("expected " + std::to_string(header->size()) + " fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    RoutePoint pt;
    pt.position = parse_number(fields[col_pos], "position_m", line_no);
    pt.elevation = parse_number(fields[col_elev], "elevation_m", line_no);
    pt.speed_limit_kmh = parse_number(fields[col_limit], "speed_limit_kmh", line_no);
    std::optional<double> param;
    if (col_param >= 0 && !fields[col_param].empty()) param = parse_number(fields[col_param], "event_param", line_no);
    pt.event = make_event(fields[col_event], param, line_no);
    check_point(pt, route.points.empty() ? nullptr : &route.points.back(), line_no);
    route.points.push_back(pt);
  }
  if (!header) throw RouteError("missing header row");
  check_route(route);
  return route;
}

Route parse_route_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw RouteError(std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw RouteError("route document must be an object");
  if (doc.value("schema_version", 0) != kRouteSchemaVersion) throw RouteError("unsupported route schema_version");
  Route route;
  if (auto meta = doc.find("meta"); meta != doc.end() && meta->is_object()) {
    route.name = meta->value("name", "");
    route.datum = meta->value("datum", "");
  }
  auto pts = doc.find("points");
  if (pts == doc.end() || !pts->is_array()) throw RouteError("missing required field 'points'");
  std::size_t index = 0;
  for (const auto& rec : *pts) {
    ++index;
    try {
      RoutePoint pt;
      pt.position = rec.at("position_m").get<double>();
      pt.elevation = rec.at("elevation_m").get<double>();
      pt.speed_limit_kmh = rec.at("speed_limit_kmh").get<double>();
      std::string tag = rec.contains("event") && rec["event"].is_string() ? rec["event"].get<std::string>() : "";
      std::optional<double> param;
      if (rec.contains("event_param") && rec["event_param"].is_number()) param = rec["event_param"].get<double>();
      pt.event = make_event(tag, param, index);
      check_point(pt, route.points.empty() ? nullptr : &route.points.back(), index);
      route.points.push_back(pt);
    } catch (const json::exception& e) {
      throw RouteError(std::string("malformed point record: ") + e.what(), index);
    }
  }
  check_route(route);
  return route;
}

Route parse_route(std::string_view document) {
  const std::string_view body = trim(document);
  std::size_t i = 0;
  while (i < body.size() && (body[i] == '\n' || body[i] == ' ')) ++i;
  if (i < body.size() && body[i] == '{') return parse_route_json(body);
  return parse_route_csv(document);
}

Route load_route(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RouteError("cannot open route file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  Route r = parse_route(buffer.str());
  if (r.name.empty()) r.name = path.stem().string();
  return r;
}

std::string route_to_csv(const Route& route) {
  std::ostringstream os;
  os.precision(10);
  os << "# ecodrive-route v" << kRouteSchemaVersion << "\n";
  os << "position_m,elevation_m,speed_limit_kmh,event,event_param\n";
  for (const auto& pt : route.points) {
    os << pt.position << ',' << pt.elevation << ',' << pt.speed_limit_kmh << ',';
    if (pt.event) {
      os << to_string(pt.event->type) << ',';
      if (pt.event->type == EventType::Turn) os << pt.event->advised_speed_kmh;
    } else {
      os << ',';
    }
    os << '\n';
  }
  return os.str();
}

std::string route_to_json(const Route& route) {
  json pts = json::array();
  for (const auto& pt : route.points) {
    json rec = {{"position_m", pt.position}, {"elevation_m", pt.elevation}, {"speed_limit_kmh", pt.speed_limit_kmh}};
    if (pt.event) {
      rec["event"] = std::string(to_string(pt.event->type));
      if (pt.event->type == EventType::Turn) rec["event_param"] = pt.event->advised_speed_kmh;
    }
    pts.push_back(std::move(rec));
  }
  json doc = {{"schema_version", kRouteSchemaVersion},
              {"meta", {{"name", route.name}, {"datum", route.datum}}},
              {"points", std::move(pts)}};
  return doc.dump(2);
}

SlopeProfile::SlopeProfile(std::vector<double> x, std::vector<double> z) : x_(std::move(x)), z_(std::move(z)) {
  if (x_.size() < 2 || x_.size() != z_.size()) throw std::invalid_argument("SlopeProfile: need at least two samples");
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    if (!(x_[i + 1] > x_[i])) throw std::invalid_argument("SlopeProfile: positions must be strictly increasing");
    mid_.push_back(0.5 * (x_[i] + x_[i + 1]));
    grad_.push_back((z_[i + 1] - z_[i]) / (x_[i + 1] - x_[i]));
  }
}

SlopeProfile SlopeProfile::from_points(std::span<const RoutePoint> points) {
  std::vector<double> x, z;
  x.reserve(points.size());
  z.reserve(points.size());
  for (const auto& pt : points) {
    const double xr = std::round(pt.position);
    // Points collapsing onto the same metre keep the first elevation.
    if (!x.empty() && xr <= x.back()) continue;
    x.push_back(xr);
    z.push_back(pt.elevation);
  }
  return SlopeProfile(std::move(x), std::move(z));
}

SlopeProfile SlopeProfile::from_samples(std::vector<double> positions, std::vector<double> elevations) {
  return SlopeProfile(std::move(positions), std::move(elevations));
}

SlopeProfile SlopeProfile::constant(double slope, double start, double end) {
  return SlopeProfile({start, end}, {0.0, std::tan(slope) * (end - start)});
}

double SlopeProfile::slope_at(double s) const {
  const double eps = 1e-9 * std::max(1.0, std::abs(x_.back()));
  if (!(s >= x_.front() - eps && s <= x_.back() + eps)) {
    throw std::out_of_range("slope_at: position " + std::to_string(s) + " outside route extent");
  }
  if (s <= mid_.front()) return std::atan(grad_.front());
  if (s >= mid_.back()) return std::atan(grad_.back());
  const auto it = std::upper_bound(mid_.begin(), mid_.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - mid_.begin()) - 1;
  const double t = (s - mid_[j]) / (mid_[j + 1] - mid_[j]);
  return std::atan(grad_[j] + t * (grad_[j + 1] - grad_[j]));
}

double SlopeProfile::elevation_at(double s) const {
  if (s <= x_.front()) return z_.front();
  if (s >= x_.back()) return z_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - x_.begin()) - 1;
  return z_[j] + grad_[j] * (s - x_[j]);
}

double SlopeProfile::mean_slope(double a, double b) const {
  if (!(b > a)) throw std::invalid_argument("mean_slope: empty interval");
  return std::atan((elevation_at(b) - elevation_at(a)) / (b - a));
}

double slope_at(std::span<const RoutePoint> points, double s) { return SlopeProfile::from_points(points).slope_at(s); }

RouteSegment make_uniform_segment(double length, double slope, double speed_limit, double entry_velocity,
                                  double exit_velocity) {
  RouteSegment seg;
  seg.start_position = 0.0;
  seg.end_position = length;
  seg.slope_profile = std::make_shared<const SlopeProfile>(SlopeProfile::constant(slope, 0.0, std::max(length, 1e-9)));
  seg.speed_limit = speed_limit;
  seg.entry_velocity = entry_velocity;
  seg.exit_velocity = exit_velocity;
  seg.slope_class = classify(slope, units::deg_to_rad(0.5));
  seg.terminating_event = BoundaryKind::Destination;
  return seg;
}

std::vector<RouteSegment> segment_route(const Route& route, double current_velocity, const SegmentationConfig& cfg) {
  check_route(route);
  const auto& pts = route.points;
  if (!pts.back().event || pts.back().event->type != EventType::Destination) {
    throw RouteError("route must end with a destination event");
  }
  const double v_min = units::kmh_to_ms(cfg.velocity_min_kmh);
  const double first_limit = units::kmh_to_ms(pts.front().speed_limit_kmh);
  if (!(current_velocity >= v_min - 1e-12 && current_velocity <= first_limit + 1e-12)) {
    throw std::invalid_argument("segment_route: current velocity outside [v_min, first speed limit]");
  }

  auto profile = std::make_shared<const SlopeProfile>(SlopeProfile::from_points(pts));
  const double s0 = pts.front().position;
  const double s_end = pts.back().position;
  const double threshold = units::deg_to_rad(cfg.negligible_slope_deg);

  std::map<double, Cut> cuts;
  auto add_cut = [&](double s, Cut c) {
    auto [it, inserted] = cuts.emplace(s, c);
    if (!inserted && priority(c.kind) < priority(it->second.kind)) it->second = c;
  };

  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].event) add_cut(pts[i].position, {to_boundary(pts[i].event->type), pts[i].event->advised_speed_kmh});
    if (pts[i].speed_limit_kmh != pts[i - 1].speed_limit_kmh) add_cut(pts[i].position, {BoundaryKind::SpeedLimitChange});
  }

  // Slope-class changes between consecutive classification windows.
  std::optional<SlopeClass> prev_class;
  for (double a = s0; a < s_end; a += cfg.class_window_m) {
    const double b = std::min(a + cfg.class_window_m, s_end);
    if (b - a <= 1e-9) break;
    const SlopeClass c = classify(profile->mean_slope(a, b), threshold);
    if (prev_class && c != *prev_class) add_cut(a, {BoundaryKind::SlopeChange});
    prev_class = c;
  }

  // Short segments lose a slope-change boundary; event boundaries always stay.
  bool changed = true;
  while (changed) {
    changed = false;
    double prev = s0;
    for (auto it = cuts.begin(); it != cuts.end(); ++it) {
      const double len = it->first - prev;
      if (len < cfg.min_segment_length_m) {
        if (it->second.kind == BoundaryKind::SlopeChange) {
          cuts.erase(it);
          changed = true;
          break;
        }
        auto start_it = cuts.find(prev);
        if (start_it != cuts.end() && start_it->second.kind == BoundaryKind::SlopeChange) {
          cuts.erase(start_it);
          changed = true;
          break;
        }
      }
      prev = it->first;
    }
  }

  auto limit_at = [&](double s) {
    double lim = pts.front().speed_limit_kmh;
    for (const auto& pt : pts) {
      if (pt.position > s + 1e-9) break;
      lim = pt.speed_limit_kmh;
    }
    return units::kmh_to_ms(lim);
  };

  std::vector<RouteSegment> segments;
  double start = s0;
  double entry = current_velocity;
  for (auto it = cuts.begin(); it != cuts.end(); ++it) {
    RouteSegment seg;
    seg.start_position = start;
    seg.end_position = it->first;
    seg.slope_profile = profile;
    seg.speed_limit = limit_at(start);
    seg.slope_class = classify(profile->mean_slope(start, it->first), threshold);
    seg.terminating_event = it->second.kind;
    const double next_limit = it->first < s_end ? limit_at(it->first) : seg.speed_limit;
    double exit = v_min;
    switch (it->second.kind) {
      case BoundaryKind::RedLight:
      case BoundaryKind::StopSign:
      case BoundaryKind::Destination:
        exit = v_min;
        break;
      case BoundaryKind::Turn:
        exit = units::kmh_to_ms(it->second.advised_kmh);
        break;
      case BoundaryKind::SpeedLimitChange:
      case BoundaryKind::SlopeChange:
        exit = std::min(seg.speed_limit, next_limit);
        break;
    }
    exit = std::clamp(exit, v_min, std::max(v_min, std::min(seg.speed_limit, next_limit)));
    seg.entry_velocity = std::min(entry, seg.speed_limit);
    seg.exit_velocity = exit;
    segments.push_back(seg);
    entry = exit;
    start = it->first;
  }
  return segments;
}

}  // namespace ecodrive
