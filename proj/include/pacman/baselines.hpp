#pragma once

// Comparison learners: actor-critic with human feedback but no planner, and
// two reward-shaping variants of tabular Q-learning (TAMER+RL style with a
// learned human-reinforcement model, and BQL-style additive shaping). The
// shaping learners are reconstructions of the cited techniques.

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "pacman/actor_critic.hpp"
#include "pacman/envs.hpp"
#include "pacman/learner.hpp"
#include "pacman/random.hpp"

namespace pacman {

struct ShapingWeights {
  double w_tamer = 1.0;
  double w_bql = 1.0;
  double tamer_lr = 0.2;
  void validate() const;  // finite and >= 0; tamer_lr in (0, 1]
};

// Tabular table over (state, action); used for Q and for the human model.
class ActionValueTable {
 public:
  ActionValueTable(std::size_t num_states, std::size_t num_actions);
  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  double get(StateId s, std::size_t a) const { return q_.at(index(s, a)); }
  void set(StateId s, std::size_t a, double v) { q_.at(index(s, a)) = v; }
  double max_value(StateId s) const;
  bool operator==(const ActionValueTable&) const = default;

 private:
  std::size_t index(StateId s, std::size_t a) const;
  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<double> q_;
};

using QTable = ActionValueTable;
using HumanModel = ActionValueTable;  // TAMER's learned feedback predictor H

// Same update as actor_critic_update; the ablation differs only in how
// actions are chosen (from pi at every step, no planner).
UpdateRecord ac_hf_step(PolicyTable& policy, ValueTable& values, const TransitionSample& sample,
                        std::optional<int> feedback, const HyperParams& hyper);

// Q(s,a) += alpha * (r' + gamma * max_b Q(s',b) - Q(s,a)), bootstrap dropped on
// terminal transitions. Returns the TD error.
double q_learning_update(QTable& q, const TransitionSample& sample, double shaped_reward,
                         const HyperParams& hyper);

// H(s,a) += tamer_lr * (f - H(s,a)) when feedback is present, then a
// Q-learning step on r' = r + w_tamer * H(s,a). Returns r'.
double tamer_rl_step(QTable& q, HumanModel& h, const TransitionSample& sample, std::optional<int> feedback,
                     const ShapingWeights& weights, const HyperParams& hyper);

// Q-learning step on r' = r + w_bql * f (r' = r without feedback). Returns r'.
double bql_shaping_step(QTable& q, const TransitionSample& sample, std::optional<int> feedback,
                        const ShapingWeights& weights, const HyperParams& hyper);

// Epsilon-greedy with uniformly random tie-breaking among greedy actions.
std::size_t epsilon_greedy(const QTable& q, StateId s, double epsilon, Rng& rng);
std::vector<double> epsilon_greedy_probs(const QTable& q, StateId s, double epsilon);

// ---------------------------------------------------------------------------

class AcHfLearner final : public Learner {
 public:
  AcHfLearner(const Environment& env, HyperParams hyper, Rng rng);
  std::string name() const override { return "ac_hf"; }
  EpisodeResult run_episode(int episode, FeedbackSource& feedback, StepObserver* observer = nullptr) override;
  std::vector<double> action_probs(StateId s) const override { return policy_.action_probs(s); }
  double state_value(StateId s) const override { return values_.value(s); }
  void write_snapshot(std::ostream& out) const override;

  const PolicyTable& policy() const { return policy_; }
  const ValueTable& values() const { return values_; }

 private:
  const Environment& env_;
  HyperParams hyper_;
  Rng rng_;
  PolicyTable policy_;
  ValueTable values_;
};

class ShapedQLearner final : public Learner {
 public:
  enum class Kind { tamer_rl, bql_shaping };
  ShapedQLearner(Kind kind, const Environment& env, HyperParams hyper, ShapingWeights weights, double epsilon,
                 Rng rng);
  std::string name() const override { return kind_ == Kind::tamer_rl ? "tamer_rl" : "bql_shaping"; }
  EpisodeResult run_episode(int episode, FeedbackSource& feedback, StepObserver* observer = nullptr) override;
  std::vector<double> action_probs(StateId s) const override { return epsilon_greedy_probs(q_, s, epsilon_); }
  double state_value(StateId s) const override { return q_.max_value(s); }
  void write_snapshot(std::ostream& out) const override;

  const QTable& q() const { return q_; }
  const HumanModel& human_model() const { return h_; }

 private:
  Kind kind_;
  const Environment& env_;
  HyperParams hyper_;
  ShapingWeights weights_;
  double epsilon_;
  Rng rng_;
  QTable q_;
  HumanModel h_;
};

void write_snapshot(std::ostream& out, const ActionValueTable& table, const char* kind);
ActionValueTable read_action_value_snapshot(std::istream& in, const char* kind);

}  // namespace pacman
