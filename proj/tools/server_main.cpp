#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "ecodrive/advisory_service.hpp"

namespace {
ecodrive::AdvisoryService* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eco-driving advisory service", "ecodrive-server"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string params_path, snapshot_dir, static_dir;
  double ds = 1.0;
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port, "0 picks a free port")->capture_default_str();
  app.add_option("--params", params_path, "Truck parameter file (default: $ECODRIVE_PARAMS, then built-in)");
  app.add_option("--ds", ds, "Default distance step for new trips, m")->capture_default_str();
  app.add_option("--snapshot-dir", snapshot_dir, "Persist trips here and restore them at start-up");
  app.add_option("--static-dir", static_dir, "Serve these files at /");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  ecodrive::ServiceConfig cfg;
  try {
    if (params_path.empty()) {
      if (const char* env = std::getenv("ECODRIVE_PARAMS"); env && *env) params_path = env;
    }
    if (!params_path.empty()) cfg.params = ecodrive::load_truck_parameters(params_path);
    cfg.planner.solver.step_length = ds;
    cfg.planner.solver.validate();
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  }
  if (!snapshot_dir.empty()) cfg.snapshot_dir = snapshot_dir;
  if (!static_dir.empty()) cfg.static_dir = static_dir;

  ecodrive::AdvisoryService service(std::move(cfg));
  const int bound = service.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ':' << port << '\n';
    return 1;
  }
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on http://" << host << ':' << bound << std::endl;
  service.run();
  service.stop();
  return 0;
}
