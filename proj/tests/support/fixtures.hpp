#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ecodrive/route_model.hpp"
#include "ecodrive/units.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return ECODRIVE_TEST_DATA_DIR; }
inline std::filesystem::path route_path(const std::string& name) { return data_dir() / "routes" / name; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline double kmh(double x) { return ecodrive::units::kmh_to_ms(x); }
inline double deg(double x) { return ecodrive::units::deg_to_rad(x); }

/// 1 km synthetic segments used for the oracle comparison.
struct NamedSegment {
  std::string name;
  ecodrive::RouteSegment segment;
};

inline ecodrive::RouteSegment profiled_segment(std::vector<double> x, std::vector<double> z, double limit,
                                               double entry, double exit) {
  ecodrive::RouteSegment seg;
  seg.start_position = x.front();
  seg.end_position = x.back();
  seg.slope_profile = std::make_shared<const ecodrive::SlopeProfile>(
      ecodrive::SlopeProfile::from_samples(std::move(x), std::move(z)));
  seg.speed_limit = limit;
  seg.entry_velocity = entry;
  seg.exit_velocity = exit;
  return seg;
}

inline std::vector<NamedSegment> oracle_segments() {
  using ecodrive::make_uniform_segment;
  const double grade2 = std::atan(0.02);
  const double grade3 = std::atan(0.03);
  return {
      {"flat 50->70", make_uniform_segment(1000, 0.0, kmh(80), kmh(50), kmh(70))},
      {"uphill 2% 60->60", make_uniform_segment(1000, grade2, kmh(80), kmh(60), kmh(60))},
      {"downhill 3% 60->70", make_uniform_segment(1000, -grade3, kmh(80), kmh(60), kmh(70))},
      {"flat 36->50", make_uniform_segment(1000, 0.0, kmh(80), kmh(36), kmh(50))},
      // Flat, 2% up, 2.5% down.
      {"mixed 50->50", profiled_segment({0, 300, 700, 1000}, {0, 0, 8, 0.5}, kmh(80), kmh(50), kmh(50))},
  };
}

}  // namespace fixtures
