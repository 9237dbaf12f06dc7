#pragma once

// Interface shared by PACMAN and the baselines: every learner consumes the
// same environment steps and the same feedback stream, one episode at a time.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pacman/actor_critic.hpp"
#include "pacman/envs.hpp"
#include "pacman/feedback.hpp"

namespace pacman {

struct StepRecord {
  int step = 0;  // 1-based index of the executed transition within the episode
  StateId state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  StateId next_state = 0;
  bool terminal = false;
  bool improper = false;
  std::optional<int> feedback;
  double td_error = 0.0;
  // Quantity that drove the policy update: f when used_feedback, else delta
  // (actor-critic learners) or the shaped reward (Q-learning learners).
  double advantage = 0.0;
  bool used_feedback = false;
};

struct EpisodeResult {
  double total_return = 0.0;
  int steps = 0;           // executed environment transitions
  int policy_updates = 0;  // equals steps for every shipped learner
  bool planner_failed = false;
  bool timed_out = false;
  int improper_actions = 0;
  std::string plan;  // PACMAN only: the plan executed this episode
  std::vector<StepRecord> records;
};

// Hooks for observers such as the trainer service. on_executed runs after the
// environment transition and before feedback is requested for it.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_episode_start(int /*episode*/, StateId /*state*/) {}
  virtual void on_plan(int /*episode*/, const std::vector<std::optional<std::size_t>>& /*actions*/,
                       const std::vector<StateId>& /*states*/) {}
  virtual void on_executed(int /*episode*/, const StepRecord& /*record*/) {}
  virtual void on_updated(int /*episode*/, const StepRecord& /*record*/) {}
  virtual void on_episode_end(int /*episode*/, const EpisodeResult& /*result*/) {}
};

class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string name() const = 0;
  virtual EpisodeResult run_episode(int episode, FeedbackSource& feedback, StepObserver* observer = nullptr) = 0;

  // Current behaviour distribution and state-value estimate, for display.
  virtual std::vector<double> action_probs(StateId s) const = 0;
  virtual double state_value(StateId s) const = 0;
  // Parameter tables in the plain snapshot format.
  virtual void write_snapshot(std::ostream& out) const = 0;
};

}  // namespace pacman
