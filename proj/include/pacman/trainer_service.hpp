#pragma once

// Live training sessions: a learner runs on its own thread, publishes an
// ordered, gapless stream of versioned JSON messages (state_update,
// plan_update, feedback, control, snapshot), and accepts human +/- feedback
// and pacing control. Served over HTTP with a server-sent-event stream.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pacman/harness.hpp"

namespace pacman {

inline constexpr int kProtocolVersion = 1;

enum class Pacing { timed, on_demand };
enum class FeedbackMode { live, oracle, none };

struct SessionOptions {
  ExperimentConfig config;  // single run: the first seed is used
  FeedbackMode feedback = FeedbackMode::live;
  Pacing pacing = Pacing::timed;
  int interval_ms = 400;
  double window_seconds = 1.0;

  // JSON body of a create request: {"config": "<key = value text>",
  // "feedback": "live|oracle|none", "pacing": "timed|step", "interval_ms": n,
  // "window_s": x}. Throws std::invalid_argument.
  static SessionOptions from_json(const nlohmann::json& body);
};

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class Session {
 public:
  using Clock = std::function<double()>;  // seconds, monotone

  Session(std::string id, SessionOptions options, Clock clock = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  const Environment& environment() const { return *env_; }

  void start();
  void stop();  // stops the learner thread and wakes all waiters
  bool finished() const;
  // Blocks until the learner thread exits or the timeout passes.
  bool wait_finished(std::chrono::milliseconds timeout);

  // Messages with seq > since, at most `max`. Waits up to `wait` for at
  // least one when none are available yet.
  std::vector<nlohmann::json> events_since(std::uint64_t since, std::size_t max,
                                           std::chrono::milliseconds wait) const;
  std::uint64_t last_seq() const;

  // Returns the acknowledgement message. Throws ProtocolError (409) while
  // paused or after the session ended, (400) for values other than +/-1.
  nlohmann::json submit_feedback(int value, std::optional<double> client_time);
  // {"command": "pause" | "resume" | "step" | "speed" | "stop", "interval_ms": n}
  nlohmann::json control(const nlohmann::json& message);
  nlohmann::json snapshot() const;

  // Per-episode returns so far.
  std::vector<double> returns() const;
  std::size_t dropped_feedback() const { return channel_.dropped_count(); }

 private:
  class Observer;
  friend class Observer;

  void run();
  nlohmann::json emit(nlohmann::json message);  // assigns seq under the event lock
  nlohmann::json state_json(StateId s) const;
  // Learner-thread pacing after a displayed step; releases `learner_lock`.
  void pace(std::unique_lock<std::mutex>& learner_lock);

  std::string id_;
  SessionOptions options_;
  Clock clock_;
  std::unique_ptr<Environment> env_;
  std::unique_ptr<Learner> learner_;
  std::unique_ptr<FeedbackSource> oracle_;
  LiveFeedbackChannel channel_;

  mutable std::mutex learner_mutex_;  // guards learner_ tables
  mutable std::mutex event_mutex_;
  mutable std::condition_variable event_cv_;
  std::vector<nlohmann::json> events_;

  mutable std::mutex control_mutex_;
  std::condition_variable control_cv_;
  bool paused_ = false;
  bool stop_ = false;
  bool finished_ = false;
  int step_tokens_ = 0;
  int interval_ms_;
  int episode_ = 0;
  int step_ = 0;
  std::vector<double> returns_;

  std::thread thread_;
};

class TrainerService {
 public:
  explicit TrainerService(Session::Clock clock = {}) : clock_(std::move(clock)) {}
  ~TrainerService();

  std::shared_ptr<Session> create(const SessionOptions& options);  // started
  std::shared_ptr<Session> find(const std::string& id) const;      // throws ProtocolError(404)
  void remove(const std::string& id);                               // throws ProtocolError(404)
  std::size_t size() const;

 private:
  Session::Clock clock_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

// HTTP front end:
//   POST   /v1/sessions                  create (SessionOptions JSON)
//   GET    /v1/sessions/{id}/events      ?since=N&max=M&wait_ms=T (long poll)
//   GET    /v1/sessions/{id}/stream      server-sent events from ?since=N
//   POST   /v1/sessions/{id}/feedback    {"value": +1|-1, "client_time": t}
//   POST   /v1/sessions/{id}/control     {"command": ...}
//   GET    /v1/sessions/{id}/snapshot
//   DELETE /v1/sessions/{id}
class TrainerServer {
 public:
  explicit TrainerServer(TrainerService& service);
  ~TrainerServer();

  // Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pacman
