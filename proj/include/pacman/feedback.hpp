#pragma once

// Human feedback: scripted oracles for the helpful/misleading scenarios under
// the four availability/consistency cases, and a live channel through which a
// human trainer's clicks reach the learning loop.

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "pacman/actor_critic.hpp"
#include "pacman/envs.hpp"
#include "pacman/random.hpp"

namespace pacman {

enum class Intent { helpful, misleading };
enum class FeedbackCase { ideal, infrequent, inconsistent, infrequent_inconsistent };

std::string to_string(Intent intent);
std::string to_string(FeedbackCase fcase);
Intent parse_intent(std::string_view text);          // throws std::invalid_argument
FeedbackCase parse_feedback_case(std::string_view text);  // throws std::invalid_argument

struct CaseParams {
  double p_give = 1.0;
  double p_flip = 0.0;
};
CaseParams case_params(FeedbackCase fcase);
// Inverse of case_params; throws std::invalid_argument for any other pair.
FeedbackCase case_from_params(double p_give, double p_flip);

struct FeedbackEvent {
  int value = 0;  // +1 or -1
  int episode = 0;
  int step = 0;
};

struct FeedbackScenario {
  Intent intent = Intent::helpful;
  FeedbackCase fcase = FeedbackCase::ideal;
  double p_give = 1.0;
  double p_flip = 0.0;
  std::map<StateId, std::set<std::size_t>> preferred;

  void set_case(FeedbackCase c);
  bool covers(StateId s) const { return preferred.count(s) != 0; }
  const std::set<std::size_t>& preferred_at(StateId s) const;  // throws std::out_of_range

  // Case parameters are one of the four cases; every preferred action is a
  // legal action of `env`; the map is total over env.enumerate_states().
  void validate(const Environment& env) const;
};

// Draws two uniforms per query (availability, then flip) regardless of the
// outcome, so a seeded trace does not depend on earlier answers.
// Throws std::out_of_range if the scenario does not cover s.
std::optional<int> oracle_feedback(const FeedbackScenario& scenario, StateId s, std::size_t a, Rng& rng);

// Default preferred-action maps (documented route reconstructions).
//   Four Rooms helpful: shortest paths that never enter danger, preferring
//     routes through fewer danger-adjacent cells.
//   Four Rooms misleading: next to a danger cell, only the action entering
//     it; elsewhere, shortest-path actions that ignore danger.
//   Taxi helpful: shortest routes to the passenger and then the destination,
//     preferring routes through fewer traffic cells; pickup / dropoff on arrival.
//   Taxi misleading: shortest routes, but while waiting, pickup at the
//     instance's wrong location is the only preferred action there.
//   Line world: helpful moves right, misleading moves left.
FeedbackScenario build_scenario(const Environment& env, Intent intent, FeedbackCase fcase);

// Text format: `intent <helpful|misleading>`, `p_give <x>`, `p_flip <x>`,
// then `prefer <state-label> <action>` lines; '%' starts a comment.
FeedbackScenario parse_scenario(std::string_view text, const Environment& env);
std::string scenario_to_text(const FeedbackScenario& scenario, const Environment& env);

// ---------------------------------------------------------------------------

// Source of per-step feedback consumed by every learner.
class FeedbackSource {
 public:
  virtual ~FeedbackSource() = default;
  // Feedback for executing `action` in `state` at (episode, step).
  virtual std::optional<int> feedback(int episode, int step, StateId state, std::size_t action) = 0;
};

class NoFeedback final : public FeedbackSource {
 public:
  std::optional<int> feedback(int, int, StateId, std::size_t) override { return std::nullopt; }
};

class OracleFeedback final : public FeedbackSource {
 public:
  OracleFeedback(FeedbackScenario scenario, Rng rng) : scenario_(std::move(scenario)), rng_(rng) {}
  std::optional<int> feedback(int episode, int step, StateId state, std::size_t action) override;
  const FeedbackScenario& scenario() const { return scenario_; }

 private:
  FeedbackScenario scenario_;
  Rng rng_;
};

// Attribution of live clicks to displayed steps. A click at time t belongs to
// the most recently displayed step if t - display_time <= window; otherwise
// it is dropped and counted. Several clicks for one step: the last one wins.
// Times are seconds on a caller-supplied monotone clock. Thread-safe.
class LiveFeedbackChannel {
 public:
  explicit LiveFeedbackChannel(double window_seconds = 1.0);

  enum class SubmitStatus { accepted, dropped_late, dropped_no_step, closed };
  struct SubmitResult {
    SubmitStatus status = SubmitStatus::accepted;
    int episode = -1;
    int step = -1;
  };

  // Learner side.
  void mark_displayed(int episode, int step, double time);
  // Returns and consumes feedback attributed to (episode, step). Throws
  // std::runtime_error once the channel is closed.
  std::optional<FeedbackEvent> poll(int episode, int step);

  // Trainer side. value must be +1 or -1 (std::invalid_argument otherwise).
  SubmitResult submit(int value, double time);

  void close();
  bool closed() const;
  std::size_t accepted_count() const;
  std::size_t dropped_count() const;
  double window() const { return window_; }

 private:
  mutable std::mutex mutex_;
  double window_;
  bool closed_ = false;
  std::optional<std::pair<int, int>> displayed_;  // (episode, step)
  double displayed_time_ = 0.0;
  std::map<std::pair<int, int>, int> pending_;
  std::size_t accepted_ = 0;
  std::size_t dropped_ = 0;
};

class LiveFeedback final : public FeedbackSource {
 public:
  explicit LiveFeedback(LiveFeedbackChannel& channel) : channel_(channel) {}
  std::optional<int> feedback(int episode, int step, StateId, std::size_t) override;

 private:
  LiveFeedbackChannel& channel_;
};

}  // namespace pacman
