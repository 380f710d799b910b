#include "ecodrive/advisory_service.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "ecodrive/route_model.hpp"
#include "ecodrive/units.hpp"
#include "httplib.h"
#include "json.hpp"
#include "plan_json.hpp"

namespace ecodrive {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kSnapshotVersion = 1;
constexpr auto kStreamPoll = std::chrono::seconds(1);
constexpr int kKeepAlivePolls = 5;

struct Event {
  long long seq = 0;
  std::string type;
  long long revision = 0;
  std::optional<std::size_t> segment;
};

struct Override {
  std::size_t segment = 0;
  double actual_velocity = 0.0;  // m/s
  std::string reason;
};

struct Session {
  std::string id;
  Route route;
  double initial_velocity = 0.0;  // m/s
  PlannerConfig config;

  mutable std::mutex mu;
  std::condition_variable cv;
  std::shared_ptr<const TripPlan> plan;
  long long revision = 1;  // revision of `plan`
  long long reserved = 1;  // last revision handed to a client
  bool recomputing = false;
  std::string plan_body;  // serialized `plan` at `revision`
  double cursor = 0.0;
  std::vector<Override> overrides;
  std::vector<Event> events;
};

struct BadRequest : std::runtime_error {
  int status;
  BadRequest(int s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

json summary_json(const TripPlan& plan, long long revision) { return detail::plan_json(plan, revision, false); }

std::string render_plan(const Session& s) {
  json j = detail::plan_json(*s.plan, s.revision, true);
  j["trip_id"] = s.id;
  return j.dump();
}

std::size_t segment_at(const TripPlan& plan, double x) {
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    if (x < plan.segments[i].segment.end_position) return i;
  }
  return plan.segments.size() - 1;
}

json advice_json(const TripPlan& plan, double x, long long revision) {
  const std::size_t i = segment_at(plan, x);
  const PlannedSegment& ps = plan.segments[i];
  json j = {{"revision", revision},
            {"position_m", x},
            {"segment", i},
            {"status", std::string(to_string(ps.status))},
            {"speed_limit_kmh", units::ms_to_kmh(ps.segment.speed_limit)}};

  for (std::size_t k = i; k < plan.segments.size(); ++k) {
    const RouteSegment& seg = plan.segments[k].segment;
    if (seg.terminating_event == BoundaryKind::SlopeChange) continue;
    j["next_event"] = {{"type", std::string(to_string(seg.terminating_event))},
                       {"position_m", seg.end_position},
                       {"distance_m", seg.end_position - x},
                       {"target_velocity_kmh", units::ms_to_kmh(seg.exit_velocity)}};
    break;
  }

  const auto& steps = ps.solution.steps;
  if (steps.size() < 2) {
    j["mode"] = nullptr;
    j["gear"] = nullptr;
    j["target_velocity_kmh"] = nullptr;
    return j;
  }
  // Record k carries the mode driven over (s_{k-1}, s_k].
  auto it = std::lower_bound(steps.begin() + 1, steps.end(), x,
                             [](const StepRecord& r, double pos) { return r.position < pos; });
  if (it == steps.end()) --it;
  const StepRecord& hi = *it;
  const StepRecord& lo = *(it - 1);
  const double t = std::clamp((x - lo.position) / (hi.position - lo.position), 0.0, 1.0);
  j["mode"] = std::string(to_string(hi.choice.mode));
  j["gear"] = hi.choice.gear;
  j["engine_speed_rpm"] = hi.op_point.engine_speed;
  j["target_velocity_kmh"] = units::ms_to_kmh(lo.velocity + t * (hi.velocity - lo.velocity));
  j["fallback"] = hi.fallback;
  return j;
}

std::string sse_frame(const Event& e) {
  json data = {{"revision", e.revision}};
  if (e.segment) data["segment"] = *e.segment;
  std::ostringstream os;
  os << "id: " << e.seq << "\nevent: " << e.type << "\ndata: " << data.dump() << "\n\n";
  return os.str();
}

json config_json(const PlannerConfig& c) {
  return {{"step_length_m", c.solver.step_length},
          {"fuel_weight", c.weights.fuel_weight},
          {"time_weight", c.weights.time_weight},
          {"parallel", c.parallel}};
}

PlannerConfig config_from(const json& j, PlannerConfig base) {
  if (!j.is_object()) return base;
  if (j.contains("step_length_m")) base.solver.step_length = j.at("step_length_m").get<double>();
  if (j.contains("fuel_weight")) base.weights.fuel_weight = j.at("fuel_weight").get<double>();
  if (j.contains("time_weight")) base.weights.time_weight = j.at("time_weight").get<double>();
  if (j.contains("parallel")) base.parallel = j.at("parallel").get<bool>();
  base.weights.validate();
  base.solver.validate();
  return base;
}

Route route_from(const json& doc) {
  if (doc.is_string()) return parse_route(doc.get<std::string>());
  if (doc.is_object()) return parse_route_json(doc.dump());
  throw BadRequest(422, "route must be a route document or its text form");
}

}  // namespace

struct AdvisoryService::Impl {
  ServiceConfig cfg;
  httplib::Server server;

  mutable std::mutex mu;
  std::map<std::string, std::shared_ptr<Session>> trips;
  long long next_id = 1;

  std::mutex workers_mu;
  std::vector<std::future<void>> workers;
  std::atomic<bool> stopping{false};

  explicit Impl(ServiceConfig c) : cfg(std::move(c)) {
    if (cfg.snapshot_dir) restore();
    routes();
  }

  std::shared_ptr<Session> find(const std::string& id) const {
    std::lock_guard lock(mu);
    auto it = trips.find(id);
    return it == trips.end() ? nullptr : it->second;
  }

  static void push_event(Session& s, std::string type, long long revision,
                         std::optional<std::size_t> segment = std::nullopt) {
    s.events.push_back({static_cast<long long>(s.events.size()) + 1, std::move(type), revision, segment});
    s.cv.notify_all();
  }

  // Caller holds s.mu.
  void write_snapshot(const Session& s) const {
    if (!cfg.snapshot_dir) return;
    json overrides = json::array();
    for (const auto& o : s.overrides) {
      overrides.push_back(
          {{"segment", o.segment},
           {"actual_velocity_kmh", units::ms_to_kmh(o.actual_velocity)},
           {"actual_velocity_ms", o.actual_velocity},
           {"reason", o.reason}});
    }
    json doc = {{"schema_version", kSnapshotVersion},
                {"id", s.id},
                {"revision", s.revision},
                {"initial_velocity_kmh", units::ms_to_kmh(s.initial_velocity)},
                {"initial_velocity_ms", s.initial_velocity},
                {"config", config_json(s.config)},
                {"route", json::parse(route_to_json(s.route))},
                {"overrides", std::move(overrides)},
                {"plan", summary_json(*s.plan, s.revision)}};
    std::error_code ec;
    fs::create_directories(*cfg.snapshot_dir, ec);
    const fs::path final_path = *cfg.snapshot_dir / (s.id + ".json");
    const fs::path tmp = final_path.string() + ".tmp";
    {
      std::ofstream out(tmp);
      out << doc.dump(2) << '\n';
      if (!out) {
        std::cerr << "snapshot: cannot write " << tmp << '\n';
        return;
      }
    }
    fs::rename(tmp, final_path, ec);
    if (ec) std::cerr << "snapshot: " << ec.message() << '\n';
  }

  void restore() {
    std::error_code ec;
    if (!fs::is_directory(*cfg.snapshot_dir, ec)) return;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(*cfg.snapshot_dir, ec)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
      try {
        std::ifstream in(path);
        const json doc = json::parse(in);
        if (doc.at("schema_version").get<int>() != kSnapshotVersion) throw std::runtime_error("unsupported version");
        auto s = std::make_shared<Session>();
        s->id = doc.at("id").get<std::string>();
        s->route = parse_route_json(doc.at("route").dump());
        // The m/s copies replay bit-exactly; the km/h fields are for people.
        s->initial_velocity = doc.at("initial_velocity_ms").get<double>();
        s->config = config_from(doc.at("config"), cfg.planner);
        TripPlan plan = plan_trip(s->route, s->initial_velocity, s->config, cfg.params);
        for (const auto& o : doc.at("overrides")) {
          Override ov{o.at("segment").get<std::size_t>(), o.at("actual_velocity_ms").get<double>(),
                      o.value("reason", "")};
          plan = recompute_from(plan, ov.segment, ov.actual_velocity);
          s->overrides.push_back(std::move(ov));
        }
        s->plan = std::make_shared<const TripPlan>(std::move(plan));
        s->revision = s->reserved = 1 + static_cast<long long>(s->overrides.size());
        s->plan_body = render_plan(*s);
        const auto dash = s->id.rfind('-');
        if (dash != std::string::npos) next_id = std::max(next_id, std::stoll(s->id.substr(dash + 1)) + 1);
        trips[s->id] = std::move(s);
      } catch (const std::exception& e) {
        std::cerr << "snapshot: skipping " << path << ": " << e.what() << '\n';
      }
    }
  }

  void recompute(std::shared_ptr<Session> s, std::shared_ptr<const TripPlan> base, Override ov, long long rev) {
    {
      std::lock_guard lock(s->mu);
      push_event(*s, "recompute-started", rev);
    }
    if (cfg.recompute_delay.count() > 0) std::this_thread::sleep_for(cfg.recompute_delay);
    std::optional<TripPlan> next;
    std::string failure;
    try {
      next = recompute_from(*base, ov.segment, ov.actual_velocity);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    std::lock_guard lock(s->mu);
    s->recomputing = false;
    if (!next) {
      // The override was validated up front, so this is a solver defect.
      std::cerr << "recompute " << s->id << ": " << failure << '\n';
      push_event(*s, "recompute-failed", rev);
      return;
    }
    s->plan = std::make_shared<const TripPlan>(std::move(*next));
    s->revision = rev;
    s->overrides.push_back(std::move(ov));
    s->plan_body = render_plan(*s);
    for (std::size_t i = s->overrides.back().segment + 1; i < s->plan->segments.size(); ++i) {
      if (s->plan->segments[i].status == SegmentStatus::NoAdvice) push_event(*s, "no-advice", rev, i);
    }
    push_event(*s, "recompute-done", rev);
    write_snapshot(*s);
  }

  void create_trip(const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    if (!body.is_object() || !body.contains("route")) throw BadRequest(422, "body needs a route");
    auto s = std::make_shared<Session>();
    s->route = route_from(body.at("route"));
    s->config = config_from(body.value("config", json::object()), cfg.planner);
    const double v0_kmh = body.value("initial_velocity_kmh", cfg.params.velocity_min_kmh);
    s->initial_velocity = units::kmh_to_ms(v0_kmh);
    TripPlan plan;
    try {
      plan = plan_trip(s->route, s->initial_velocity, s->config, cfg.params);
    } catch (const std::invalid_argument& e) {
      throw BadRequest(422, e.what());
    }
    s->plan = std::make_shared<const TripPlan>(std::move(plan));
    s->cursor = s->plan->segments.front().segment.start_position;
    {
      std::lock_guard lock(mu);
      s->id = "trip-" + std::to_string(next_id++);
      trips[s->id] = s;
    }
    std::lock_guard lock(s->mu);
    s->plan_body = render_plan(*s);
    for (std::size_t i = 0; i < s->plan->segments.size(); ++i) {
      if (s->plan->segments[i].status == SegmentStatus::NoAdvice) push_event(*s, "no-advice", s->revision, i);
    }
    write_snapshot(*s);
    send_json(res, 201, {{"id", s->id}, {"revision", s->revision}, {"plan", summary_json(*s->plan, s->revision)}});
  }

  void get_trip(Session& s, httplib::Response& res) {
    std::lock_guard lock(s.mu);
    send_json(res, 200,
              {{"id", s.id},
               {"revision", s.revision},
               {"recomputing", s.recomputing},
               {"cursor_m", s.cursor},
               {"cursor_segment", segment_at(*s.plan, s.cursor)},
               {"plan", summary_json(*s.plan, s.revision)}});
  }

  void get_plan(Session& s, const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(s.mu);
    if (req.has_param("revision")) {
      long long known = 0;
      try {
        known = std::stoll(req.get_param_value("revision"));
      } catch (const std::exception&) {
        throw BadRequest(422, "revision must be an integer");
      }
      if (known == s.revision) {
        res.status = 304;
        return;
      }
    }
    res.status = 200;
    res.set_content(s.plan_body, "application/json");
  }

  void get_advice(Session& s, const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("position")) throw BadRequest(422, "position is required");
    double x = 0.0;
    try {
      x = std::stod(req.get_param_value("position"));
    } catch (const std::exception&) {
      throw BadRequest(422, "position must be a number");
    }
    std::shared_ptr<const TripPlan> plan;
    long long revision = 0;
    {
      std::lock_guard lock(s.mu);
      plan = s.plan;
      revision = s.revision;
      const double lo = plan->segments.front().segment.start_position;
      const double hi = plan->segments.back().segment.end_position;
      if (!(x >= lo && x <= hi)) throw BadRequest(422, "position outside the route");
      s.cursor = x;
    }
    send_json(res, 200, advice_json(*plan, x, revision));
  }

  void post_override(const std::shared_ptr<Session>& s, const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    if (!body.is_object() || !body.contains("segment") || !body.contains("actual_velocity_kmh")) {
      throw BadRequest(422, "body needs segment and actual_velocity_kmh");
    }
    const json& seg = body.at("segment");
    if (!seg.is_number_integer() || seg.get<long long>() < 0) throw BadRequest(422, "segment must be an index >= 0");
    if (!body.at("actual_velocity_kmh").is_number()) throw BadRequest(422, "actual_velocity_kmh must be a number");
    Override ov{seg.get<std::size_t>(), units::kmh_to_ms(body.at("actual_velocity_kmh").get<double>()),
                body.value("reason", "")};

    long long rev = 0;
    std::shared_ptr<const TripPlan> base;
    {
      std::lock_guard lock(s->mu);
      if (s->recomputing) throw BadRequest(409, "a recompute is already running for this trip");
      if (auto why = override_error(*s->plan, ov.segment, ov.actual_velocity)) throw BadRequest(422, *why);
      s->recomputing = true;
      rev = ++s->reserved;
      base = s->plan;
    }
    {
      std::lock_guard lock(workers_mu);
      std::erase_if(workers, [](std::future<void>& f) {
        return f.wait_for(std::chrono::seconds(0)) == std::future_status::ready;
      });
      workers.push_back(std::async(std::launch::async, &Impl::recompute, this, s, base, std::move(ov), rev));
    }
    send_json(res, 202, {{"id", s->id}, {"revision", rev}, {"status", "recomputing"}});
  }

  void stream_events(const std::shared_ptr<Session>& s, const httplib::Request& req, httplib::Response& res) {
    long long since = 0;
    {
      std::lock_guard lock(s->mu);
      since = s->revision;
    }
    if (req.has_param("revision")) {
      try {
        since = std::stoll(req.get_param_value("revision"));
      } catch (const std::exception&) {
        throw BadRequest(422, "revision must be an integer");
      }
    }
    auto cursor = std::make_shared<std::size_t>(0);
    {
      std::lock_guard lock(s->mu);
      while (*cursor < s->events.size() && s->events[*cursor].revision <= since) ++*cursor;
    }
    auto idle = std::make_shared<int>(0);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, s, cursor, idle](std::size_t, httplib::DataSink& sink) {
      std::string chunk;
      {
        std::unique_lock lock(s->mu);
        s->cv.wait_for(lock, kStreamPoll, [&] { return stopping.load() || *cursor < s->events.size(); });
        if (stopping) {
          sink.done();
          return true;
        }
        for (; *cursor < s->events.size(); ++*cursor) chunk += sse_frame(s->events[*cursor]);
      }
      if (chunk.empty()) {
        if (++*idle < kKeepAlivePolls) return sink.is_writable();
        chunk = ": keep-alive\n\n";
      }
      *idle = 0;
      return sink.write(chunk.data(), chunk.size());
    });
  }

  template <typename Handler>
  auto guarded(Handler h) {
    return [this, h](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const BadRequest& e) {
        send_error(res, e.status, e.what());
      } catch (const json::parse_error& e) {
        send_error(res, 400, std::string("malformed document: ") + e.what());
      } catch (const json::exception& e) {
        send_error(res, 422, e.what());
      } catch (const RouteError& e) {
        send_error(res, 422, std::string("route: ") + e.what());
      } catch (const std::invalid_argument& e) {
        send_error(res, 422, e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  }

  template <typename Handler>
  auto with_trip(Handler h) {
    return guarded([this, h](const httplib::Request& req, httplib::Response& res) {
      auto s = find(req.matches[1]);
      if (!s) throw BadRequest(404, "unknown trip");
      h(s, req, res);
    });
  }

  void routes() {
    server.Post("/trips", guarded([this](const auto& req, auto& res) { create_trip(req, res); }));
    server.Get(R"(/trips/([^/]+))", with_trip([this](auto s, const auto&, auto& res) { get_trip(*s, res); }));
    server.Get(R"(/trips/([^/]+)/plan)",
               with_trip([this](auto s, const auto& req, auto& res) { get_plan(*s, req, res); }));
    server.Get(R"(/trips/([^/]+)/advice)",
               with_trip([this](auto s, const auto& req, auto& res) { get_advice(*s, req, res); }));
    server.Post(R"(/trips/([^/]+)/override)",
                with_trip([this](auto s, const auto& req, auto& res) { post_override(s, req, res); }));
    server.Get(R"(/trips/([^/]+)/events)",
               with_trip([this](auto s, const auto& req, auto& res) { stream_events(s, req, res); }));
    if (cfg.static_dir && !server.set_mount_point("/", cfg.static_dir->string())) {
      std::cerr << "static: " << *cfg.static_dir << " is not a directory\n";
    }
  }

  void shutdown() {
    if (stopping.exchange(true)) return;
    {
      std::lock_guard lock(mu);
      for (auto& [id, s] : trips) {
        std::lock_guard slock(s->mu);
        s->cv.notify_all();
      }
    }
    server.stop();
    std::lock_guard lock(workers_mu);
    for (auto& f : workers) f.wait();
    workers.clear();
  }
};

AdvisoryService::AdvisoryService(ServiceConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}

AdvisoryService::~AdvisoryService() { stop(); }

int AdvisoryService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool AdvisoryService::run() { return impl_->server.listen_after_bind(); }

void AdvisoryService::stop() { impl_->shutdown(); }

std::size_t AdvisoryService::trip_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->trips.size();
}

}  // namespace ecodrive
