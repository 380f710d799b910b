#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "ecodrive/trip_planner.hpp"
#include "ecodrive/truck_parameters.hpp"

namespace ecodrive {

struct ServiceConfig {
  TruckParameters params = default_truck_parameters();
  /// Defaults for new trips; a POST /trips body may override weights and Δs.
  PlannerConfig planner;
  /// One document per trip, rewritten after every revision and replayed at
  /// start-up.
  std::optional<std::filesystem::path> snapshot_dir;
  /// Served at "/" when set (the drive-along UI build).
  std::optional<std::filesystem::path> static_dir;
  /// Sleep inserted before every recompute; tests use it to widen races.
  std::chrono::milliseconds recompute_delay{0};
};

/// HTTP front end over in-memory trip sessions.
///
///   POST /trips                     create, solve, 201 {id, revision, plan}
///   GET  /trips/{id}                session summary and cursor
///   GET  /trips/{id}/plan?revision= full plan, 304 when revision is current
///   GET  /trips/{id}/advice?position=
///   POST /trips/{id}/override       202 {revision}; recompute runs off-thread
///   GET  /trips/{id}/events?revision=
///        text/event-stream of recompute-started, recompute-done, no-advice;
///        events newer than `revision` are replayed first
class AdvisoryService {
 public:
  explicit AdvisoryService(ServiceConfig cfg);
  ~AdvisoryService();
  AdvisoryService(const AdvisoryService&) = delete;
  AdvisoryService& operator=(const AdvisoryService&) = delete;

  /// Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool run();
  /// Wakes event streams, stops the listener and joins recompute workers.
  void stop();

  std::size_t trip_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ecodrive
