#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"

namespace {
struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ecodrive");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ecodrive::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string long_haul() { return fixtures::route_path("long-haul.csv").string(); }

int data_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int rows = -1;  // column header
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  return rows;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ecodrive-cli-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}
}  // namespace

TEST_CASE("invalid step length") {
  CHECK(run({"solve-segment", long_haul(), "--segment", "1", "--ds", "0"}).code == ecodrive::cli::kInputError);
  CHECK(run({"plan", long_haul(), "--ds", "-1"}).code == ecodrive::cli::kInputError);
}

TEST_CASE("input errors") {
  CHECK(run({"plan", "/nonexistent.csv"}).code == ecodrive::cli::kInputError);
  CHECK(run({"solve-segment", long_haul(), "--segment", "99"}).code == ecodrive::cli::kInputError);
  CHECK(run({"plan", long_haul(), "--v0", "120"}).code == ecodrive::cli::kInputError);
  CHECK(run({"bogus"}).code == ecodrive::cli::kInputError);
}

TEST_CASE("solve a 1 km segment at 20 m") {
  const Result r = run({"solve-segment", long_haul(), "--segment", "3", "--ds", "20"});
  CHECK(r.code == ecodrive::cli::kOk);
  CHECK(r.out.find("# end_m,2100") != std::string::npos);
  CHECK(data_rows(r.out) <= 51);
  CHECK(data_rows(r.out) > 0);

  const Result j = run({"solve-segment", long_haul(), "--segment", "3", "--ds", "20", "--format", "json"});
  REQUIRE(j.code == ecodrive::cli::kOk);
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc.at("wall_time_s").get<double>() < 2.0);
  CHECK(doc.at("solution").at("steps").size() == 51);
}

TEST_CASE("plan is deterministic and exports") {
  const auto a = scratch("a"), b = scratch("b");
  const Result ra = run({"plan", long_haul(), "--out", a.string()});
  const Result rb = run({"plan", long_haul(), "--out", b.string()});
  CHECK(ra.code == ecodrive::cli::kOk);
  CHECK(rb.code == ecodrive::cli::kOk);
  const std::string pa = fixtures::read_file(a / "plan.csv");
  CHECK(pa == fixtures::read_file(b / "plan.csv"));
  CHECK(pa.find("# total_fuel_kg") != std::string::npos);
  CHECK(data_rows(ra.out) == 15);

  const auto c = scratch("c");
  CHECK(run({"plan", long_haul(), "--out", c.string(), "--parallel"}).code == ecodrive::cli::kOk);
  CHECK(fixtures::read_file(c / "plan.csv") == pa);
  for (const auto& d : {a, b, c}) std::filesystem::remove_all(d);
}

TEST_CASE("validate") {
  // A segment that converges at 20 m steps.
  const Result ok = run({"validate", long_haul(), "--segment", "1", "--ds", "20"});
  CHECK(ok.code == ecodrive::cli::kOk);
  CHECK(ok.out.find("verdict,pass") != std::string::npos);
  CHECK(run({"validate", long_haul(), "--segment", "3", "--ds", "20", "--budget", "100"}).code ==
        ecodrive::cli::kBudgetExceeded);
}

TEST_CASE("parameter file from the environment") {
  const auto dir = scratch("params");
  const auto bad = dir / "bad.json";
  {
    std::ofstream f(bad);
    f << "{\"schema_version\": 1}";
  }
  ::setenv("ECODRIVE_PARAMS", bad.c_str(), 1);
  CHECK(run({"solve-segment", long_haul(), "--segment", "1", "--ds", "20"}).code == ecodrive::cli::kInputError);
  ::setenv("ECODRIVE_PARAMS", (fixtures::data_dir() / "truck_params.json").c_str(), 1);
  const Result env = run({"solve-segment", long_haul(), "--segment", "1", "--ds", "20"});
  ::unsetenv("ECODRIVE_PARAMS");
  const Result builtin = run({"solve-segment", long_haul(), "--segment", "1", "--ds", "20"});
  CHECK(env.code == ecodrive::cli::kOk);
  // Identical model, so identical tables apart from the wall-time line.
  auto strip = [](const std::string& s) {
    std::istringstream in(s);
    std::string line, kept;
    while (std::getline(in, line)) {
      if (line.rfind("# wall_time_s", 0) != 0) kept += line + '\n';
    }
    return kept;
  };
  CHECK(strip(env.out) == strip(builtin.out));
  std::filesystem::remove_all(dir);
}
