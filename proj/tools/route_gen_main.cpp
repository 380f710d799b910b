// Writes one of the bundled synthetic routes.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "synthetic_routes.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic route generator", "ecodrive-route-gen"};
  std::string kind_name;
  std::uint32_t seed = 0;
  std::string format = "csv";
  std::string out;
  app.add_option("--kind", kind_name, "valley | long-haul")->required();
  app.add_option("--seed", seed, "Elevation noise seed; 0 writes exact grades")->capture_default_str();
  app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--out", out, "Output file (default stdout)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const auto kind = ecodrive::synth::route_kind_from_string(kind_name);
  if (!kind) {
    std::cerr << "unknown route kind: " << kind_name << '\n';
    return 2;
  }
  const ecodrive::Route route = ecodrive::synth::make_route(*kind, seed);
  const std::string text = format == "json" ? ecodrive::route_to_json(route) + "\n" : ecodrive::route_to_csv(route);
  if (out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out, std::ios::binary);
  f << text;
  if (!f) {
    std::cerr << "cannot write " << out << '\n';
    return 2;
  }
  return 0;
}
