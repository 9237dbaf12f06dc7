#include "pacman/trainer_service.hpp"

#include <httplib.h>

#include <atomic>
#include <sstream>
#include <stdexcept>

namespace pacman {

using nlohmann::json;

namespace {

struct SessionStopped {};

Session::Clock default_clock() {
  return [] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
  };
}

}  // namespace

SessionOptions SessionOptions::from_json(const json& body) {
  if (!body.is_object()) throw std::invalid_argument("session request must be a JSON object");
  SessionOptions o;
  if (body.contains("config")) {
    if (!body["config"].is_string()) throw std::invalid_argument("'config' must be key = value text");
    o.config = ExperimentConfig::parse(body["config"].get<std::string>());
  }
  o.config.output.clear();
  if (body.contains("feedback")) {
    const auto f = body["feedback"].get<std::string>();
    if (f == "live") {
      o.feedback = FeedbackMode::live;
    } else if (f == "oracle") {
      o.feedback = FeedbackMode::oracle;
    } else if (f == "none") {
      o.feedback = FeedbackMode::none;
    } else {
      throw std::invalid_argument("feedback must be live, oracle or none");
    }
  }
  if (body.contains("pacing")) {
    const auto p = body["pacing"].get<std::string>();
    if (p == "timed") {
      o.pacing = Pacing::timed;
    } else if (p == "step") {
      o.pacing = Pacing::on_demand;
    } else {
      throw std::invalid_argument("pacing must be timed or step");
    }
  }
  if (body.contains("interval_ms")) o.interval_ms = body["interval_ms"].get<int>();
  if (body.contains("window_s")) o.window_seconds = body["window_s"].get<double>();
  if (o.interval_ms < 0) throw std::invalid_argument("interval_ms must be >= 0");
  if (!(o.window_seconds > 0.0)) throw std::invalid_argument("window_s must be > 0");
  return o;
}

// ---------------------------------------------------------------------------

class Session::Observer final : public StepObserver {
 public:
  Observer(Session& session, std::unique_lock<std::mutex>& lock) : s_(session), lock_(lock) {}

  void on_episode_start(int episode, StateId state) override {
    {
      std::lock_guard c(s_.control_mutex_);
      s_.episode_ = episode;
      s_.step_ = 0;
    }
    s_.emit({{"kind", "state_update"}, {"phase", "episode_start"}, {"episode", episode}, {"step", 0},
             {"state", s_.state_json(state)}});
  }

  void on_plan(int episode, const std::vector<std::optional<std::size_t>>& actions,
               const std::vector<StateId>& states) override {
    json steps = json::array();
    for (std::size_t t = 0; t < actions.size(); ++t) {
      steps.push_back({{"timestamp", t + 1},
                       {"state", s_.state_json(states[t])},
                       {"action", actions[t] ? json(s_.env_->action_names().at(*actions[t])) : json(nullptr)}});
    }
    s_.emit({{"kind", "plan_update"}, {"episode", episode}, {"steps", steps},
             {"terminal", s_.state_json(states.back())}});
  }

  void on_executed(int episode, const StepRecord& r) override {
    {
      std::lock_guard c(s_.control_mutex_);
      s_.step_ = r.step;
    }
    episode_return_ = (r.step == 1 ? 0.0 : episode_return_) + r.reward;
    // Attribution opens before the step is published.
    s_.channel_.mark_displayed(episode, r.step, s_.clock_());
    s_.emit({{"kind", "state_update"},
             {"phase", "step"},
             {"episode", episode},
             {"step", r.step},
             {"state", s_.state_json(r.state)},
             {"action", s_.env_->action_names().at(r.action)},
             {"reward", r.reward},
             {"next_state", s_.state_json(r.next_state)},
             {"terminal", r.terminal},
             {"return", episode_return_}});
    s_.pace(lock_);
  }

  void on_updated(int episode, const StepRecord& r) override {
    if (!r.feedback) return;
    s_.emit({{"kind", "feedback"},
             {"status", "applied"},
             {"episode", episode},
             {"step", r.step},
             {"value", *r.feedback}});
  }

  void on_episode_end(int episode, const EpisodeResult& result) override {
    {
      std::lock_guard c(s_.control_mutex_);
      s_.returns_.push_back(result.total_return);
    }
    s_.emit({{"kind", "state_update"},
             {"phase", "episode_end"},
             {"episode", episode},
             {"step", result.steps},
             {"return", result.total_return},
             {"planner_failed", result.planner_failed},
             {"timed_out", result.timed_out},
             {"plan", result.plan}});
  }

 private:
  Session& s_;
  std::unique_lock<std::mutex>& lock_;
  double episode_return_ = 0.0;
};

Session::Session(std::string id, SessionOptions options, Clock clock)
    : id_(std::move(id)),
      options_(std::move(options)),
      clock_(clock ? std::move(clock) : default_clock()),
      channel_(options_.window_seconds),
      interval_ms_(options_.interval_ms) {
  env_ = make_environment(options_.config);
  options_.config.resolve(*env_);
  const std::uint64_t seed = options_.config.seeds.front();
  learner_ = make_learner(options_.config, *env_, seed);
  if (options_.feedback == FeedbackMode::oracle) oracle_ = make_feedback_source(options_.config, *env_, seed);
}

Session::~Session() {
  stop();
  if (thread_.joinable()) thread_.join();
}

void Session::start() {
  if (thread_.joinable()) throw std::logic_error("session already started");
  thread_ = std::thread([this] { run(); });
}

void Session::stop() {
  {
    std::lock_guard c(control_mutex_);
    stop_ = true;
  }
  control_cv_.notify_all();
  event_cv_.notify_all();
}

bool Session::finished() const {
  std::lock_guard c(control_mutex_);
  return finished_;
}

bool Session::wait_finished(std::chrono::milliseconds timeout) {
  std::unique_lock c(control_mutex_);
  return control_cv_.wait_for(c, timeout, [&] { return finished_; });
}

void Session::run() {
  std::string error;
  try {
    std::unique_lock lock(learner_mutex_);
    Observer observer(*this, lock);
    NoFeedback none;
    LiveFeedback live(channel_);
    FeedbackSource& source = options_.feedback == FeedbackMode::live     ? static_cast<FeedbackSource&>(live)
                             : options_.feedback == FeedbackMode::oracle ? *oracle_
                                                                         : static_cast<FeedbackSource&>(none);
    for (int ep = 1; ep <= options_.config.maxepisode; ++ep) {
      {
        std::lock_guard c(control_mutex_);
        if (stop_) break;
      }
      learner_->run_episode(ep, source, &observer);
    }
  } catch (const SessionStopped&) {
  } catch (const std::exception& e) {
    error = e.what();
  }
  json end{{"kind", "control"}, {"command", "finished"}};
  if (!error.empty()) end["error"] = error;
  channel_.close();
  {
    std::lock_guard c(control_mutex_);
    finished_ = true;
  }
  emit(std::move(end));
  control_cv_.notify_all();
}

void Session::pace(std::unique_lock<std::mutex>& learner_lock) {
  learner_lock.unlock();
  {
    std::unique_lock c(control_mutex_);
    if (options_.pacing == Pacing::on_demand) {
      control_cv_.wait(c, [&] { return stop_ || step_tokens_ > 0; });
      if (!stop_) --step_tokens_;
    } else if (interval_ms_ > 0) {
      control_cv_.wait_for(c, std::chrono::milliseconds(interval_ms_), [&] { return stop_; });
    }
    control_cv_.wait(c, [&] { return stop_ || !paused_; });
    if (stop_) throw SessionStopped{};
  }
  learner_lock.lock();
}

json Session::emit(json message) {
  std::lock_guard lock(event_mutex_);
  message["v"] = kProtocolVersion;
  message["seq"] = events_.size() + 1;
  message["session"] = id_;
  events_.push_back(message);
  event_cv_.notify_all();
  return message;
}

std::vector<json> Session::events_since(std::uint64_t since, std::size_t max, std::chrono::milliseconds wait) const {
  std::unique_lock lock(event_mutex_);
  event_cv_.wait_for(lock, wait, [&] { return events_.size() > since; });
  std::vector<json> out;
  for (std::size_t i = since; i < events_.size() && out.size() < max; ++i) out.push_back(events_[i]);
  return out;
}

std::uint64_t Session::last_seq() const {
  std::lock_guard lock(event_mutex_);
  return events_.size();
}

json Session::state_json(StateId s) const {
  json j{{"id", s}, {"label", env_->state_label(s)}};
  if (const auto* fr = dynamic_cast<const FourRoomsEnv*>(env_.get())) {
    const Cell c = fr->cell(s);
    j["row"] = c.row;
    j["col"] = c.col;
  } else if (const auto* taxi = dynamic_cast<const TaxiEnv*>(env_.get())) {
    const Cell c = taxi->taxi_cell(s);
    j["row"] = c.row;
    j["col"] = c.col;
    static constexpr const char* names[] = {"waiting", "riding", "delivered"};
    j["passenger"] = names[static_cast<int>(taxi->passenger(s))];
  } else {
    j["loc"] = s + 1;
  }
  return j;
}

json Session::submit_feedback(int value, std::optional<double> client_time) {
  if (value != 1 && value != -1) throw ProtocolError(400, "feedback value must be +1 or -1");
  if (options_.feedback != FeedbackMode::live) throw ProtocolError(409, "session does not accept live feedback");
  {
    std::lock_guard c(control_mutex_);
    if (finished_) throw ProtocolError(409, "session has ended");
    if (paused_) throw ProtocolError(409, "session is paused");
  }
  const auto r = channel_.submit(value, clock_());
  json ack{{"kind", "feedback"}, {"value", value}, {"episode", r.episode}, {"step", r.step}};
  switch (r.status) {
    case LiveFeedbackChannel::SubmitStatus::accepted: ack["status"] = "accepted"; break;
    case LiveFeedbackChannel::SubmitStatus::dropped_late: ack["status"] = "dropped_late"; break;
    case LiveFeedbackChannel::SubmitStatus::dropped_no_step: ack["status"] = "dropped_no_step"; break;
    case LiveFeedbackChannel::SubmitStatus::closed: throw ProtocolError(409, "session has ended");
  }
  if (client_time) ack["client_time"] = *client_time;
  ack["dropped_total"] = channel_.dropped_count();
  return emit(std::move(ack));
}

json Session::control(const json& message) {
  if (!message.is_object() || !message.contains("command") || !message["command"].is_string()) {
    throw ProtocolError(400, "control message needs a 'command' string");
  }
  const std::string cmd = message["command"].get<std::string>();
  json ack{{"kind", "control"}, {"command", cmd}};
  {
    std::lock_guard c(control_mutex_);
    if (cmd == "pause") {
      paused_ = true;
    } else if (cmd == "resume") {
      paused_ = false;
    } else if (cmd == "step") {
      if (options_.pacing != Pacing::on_demand) throw ProtocolError(409, "'step' requires step pacing");
      ++step_tokens_;
    } else if (cmd == "speed") {
      if (!message.contains("interval_ms") || !message["interval_ms"].is_number_integer() ||
          message["interval_ms"].get<int>() < 0) {
        throw ProtocolError(400, "'speed' needs a non-negative integer interval_ms");
      }
      interval_ms_ = message["interval_ms"].get<int>();
      ack["interval_ms"] = interval_ms_;
    } else if (cmd == "stop") {
      stop_ = true;
    } else {
      throw ProtocolError(400, "unknown control command '" + cmd + "'");
    }
    ack["paused"] = paused_;
  }
  control_cv_.notify_all();
  if (cmd == "stop") event_cv_.notify_all();
  return emit(std::move(ack));
}

json Session::snapshot() const {
  json j{{"v", kProtocolVersion}, {"kind", "snapshot"}, {"session", id_}, {"seq", last_seq()}};
  j["env"] = env_->name();
  j["actions"] = env_->action_names();
  if (const auto* fr = dynamic_cast<const FourRoomsEnv*>(env_.get())) {
    j["layout"] = fr->layout().grid;
  } else if (const auto* taxi = dynamic_cast<const TaxiEnv*>(env_.get())) {
    j["instance"] = taxi->instance().to_text();
  }
  {
    std::lock_guard c(control_mutex_);
    j["episode"] = episode_;
    j["step"] = step_;
    j["paused"] = paused_;
    j["finished"] = finished_;
    j["pacing"] = options_.pacing == Pacing::timed ? "timed" : "step";
    j["interval_ms"] = interval_ms_;
    j["returns"] = returns_;
  }
  j["feedback_accepted"] = channel_.accepted_count();
  j["feedback_dropped"] = channel_.dropped_count();
  json states = json::array();
  {
    std::lock_guard lock(learner_mutex_);
    for (StateId s : env_->enumerate_states()) {
      states.push_back({{"state", state_json(s)}, {"pi", learner_->action_probs(s)}, {"v", learner_->state_value(s)}});
    }
  }
  j["states"] = std::move(states);
  return j;
}

std::vector<double> Session::returns() const {
  std::lock_guard c(control_mutex_);
  return returns_;
}

// ---------------------------------------------------------------------------

TrainerService::~TrainerService() {
  std::lock_guard lock(mutex_);
  for (auto& [id, s] : sessions_) s->stop();
}

std::shared_ptr<Session> TrainerService::create(const SessionOptions& options) {
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(next_id_++);
  }
  auto session = std::make_shared<Session>(id, options, clock_);
  session->start();
  std::lock_guard lock(mutex_);
  sessions_[id] = session;
  return session;
}

std::shared_ptr<Session> TrainerService::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ProtocolError(404, "unknown session '" + id + "'");
  return it->second;
}

void TrainerService::remove(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ProtocolError(404, "unknown session '" + id + "'");
    s = it->second;
    sessions_.erase(it);
  }
  s->stop();
}

std::size_t TrainerService::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

// ---------------------------------------------------------------------------

struct TrainerServer::Impl {
  TrainerService& service;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};

  explicit Impl(TrainerService& s) : service(s) { routes(); }

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void error(httplib::Response& res, int status, const std::string& what) {
    reply(res, status, {{"v", kProtocolVersion}, {"kind", "error"}, {"error", what}});
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const ProtocolError& e) {
      error(res, e.status(), e.what());
    } catch (const json::exception& e) {
      error(res, 400, std::string("malformed message: ") + e.what());
    } catch (const std::invalid_argument& e) {
      error(res, 400, e.what());
    } catch (const std::exception& e) {
      error(res, 500, e.what());
    }
  }

  static std::uint64_t query_u64(const httplib::Request& req, const char* key, std::uint64_t fallback) {
    if (!req.has_param(key)) return fallback;
    try {
      return std::stoull(req.get_param_value(key));
    } catch (const std::exception&) {
      throw ProtocolError(400, std::string("bad query parameter '") + key + "'");
    }
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = req.body.empty() ? json::object() : json::parse(req.body);
        auto session = service.create(SessionOptions::from_json(body));
        reply(res, 201, {{"v", kProtocolVersion}, {"kind", "control"}, {"command", "created"},
                         {"session", session->id()}});
      });
    });

    server.Get(R"(/v1/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto session = service.find(req.matches[1]);
        const auto since = query_u64(req, "since", 0);
        const auto max = query_u64(req, "max", 1000);
        const auto wait = query_u64(req, "wait_ms", 0);
        auto events = session->events_since(since, max, std::chrono::milliseconds(wait));
        const std::uint64_t next = events.empty() ? since : events.back()["seq"].get<std::uint64_t>();
        reply(res, 200, {{"v", kProtocolVersion}, {"events", events}, {"next", next},
                         {"finished", session->finished()}});
      });
    });

    server.Get(R"(/v1/sessions/([^/]+)/stream)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto session = service.find(req.matches[1]);
        auto since = std::make_shared<std::uint64_t>(query_u64(req, "since", 0));
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream", [this, session, since](std::size_t, httplib::DataSink& sink) {
              if (stopping) return false;
              const auto events = session->events_since(*since, 100, std::chrono::milliseconds(250));
              for (const auto& e : events) {
                std::ostringstream chunk;
                chunk << "id: " << e["seq"].get<std::uint64_t>() << "\nevent: " << e["kind"].get<std::string>()
                      << "\ndata: " << e.dump() << "\n\n";
                const std::string s = chunk.str();
                if (!sink.write(s.data(), s.size())) return false;
                *since = e["seq"].get<std::uint64_t>();
              }
              if (session->finished() && *since == session->last_seq()) sink.done();
              return true;
            });
      });
    });

    server.Post(R"(/v1/sessions/([^/]+)/feedback)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto session = service.find(req.matches[1]);
        const json body = json::parse(req.body);
        if (!body.is_object() || !body.contains("value") || !body["value"].is_number_integer()) {
          throw ProtocolError(400, "feedback message needs an integer 'value'");
        }
        std::optional<double> client_time;
        if (body.contains("client_time")) client_time = body["client_time"].get<double>();
        reply(res, 200, session->submit_feedback(body["value"].get<int>(), client_time));
      });
    });

    server.Post(R"(/v1/sessions/([^/]+)/control)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto session = service.find(req.matches[1]);
        reply(res, 200, session->control(json::parse(req.body)));
      });
    });

    server.Get(R"(/v1/sessions/([^/]+)/snapshot)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, service.find(req.matches[1])->snapshot()); });
    });

    server.Delete(R"(/v1/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        service.remove(req.matches[1]);
        reply(res, 200, {{"v", kProtocolVersion}, {"kind", "control"}, {"command", "deleted"},
                         {"session", std::string(req.matches[1])}});
      });
    });
  }
};

TrainerServer::TrainerServer(TrainerService& service) : impl_(std::make_unique<Impl>(service)) {}

TrainerServer::~TrainerServer() { stop(); }

int TrainerServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void TrainerServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void TrainerServer::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace pacman
