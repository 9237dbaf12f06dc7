#pragma once

// Tabular actor-critic: softmax policy over per-state action preferences,
// tabular state values, TD-error advantage estimate, and the policy update in
// which an available human feedback signal replaces the TD error.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace pacman {

using StateId = std::size_t;

struct HyperParams {
  double alpha = 0.5;   // value learning rate
  double beta = 0.05;   // policy learning rate
  double gamma = 0.95;  // discount

  void validate() const;  // throws std::invalid_argument
};

struct TransitionSample {
  StateId state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  StateId next_state = 0;
  bool terminal = false;
};

class PolicyTable {
 public:
  PolicyTable(std::size_t num_states, std::size_t num_actions);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }

  double preference(StateId s, std::size_t a) const { return theta_.at(index(s, a)); }
  void set_preference(StateId s, std::size_t a, double value) { theta_.at(index(s, a)) = value; }
  std::span<const double> preferences(StateId s) const;

  // softmax(theta[s, .]); throws std::out_of_range for an unknown state.
  std::vector<double> action_probs(StateId s) const;

  // d log pi(a|s) / d theta[s, a'] = 1{a'=a} - pi(a'|s).
  std::vector<double> grad_log_policy(StateId s, std::size_t a) const;

  // theta[s, .] += beta * advantage * grad_log_policy(s, a).
  void update(StateId s, std::size_t a, double advantage, double beta);

  bool operator==(const PolicyTable&) const = default;

 private:
  std::size_t index(StateId s, std::size_t a) const;

  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<double> theta_;
};

class ValueTable {
 public:
  explicit ValueTable(std::size_t num_states);

  std::size_t num_states() const { return v_.size(); }
  double value(StateId s) const { return v_.at(s); }
  void set_value(StateId s, double value) { v_.at(s) = value; }

  // v[s] += alpha * delta.
  void update(StateId s, double delta, double alpha);

  bool operator==(const ValueTable&) const = default;

 private:
  std::vector<double> v_;
};

// delta = r + gamma * V(s') - V(s), with the bootstrap term dropped on terminal
// transitions. Uses the values before this step's update.
double td_error(const TransitionSample& sample, const ValueTable& values, double gamma);

struct UpdateRecord {
  double td_error = 0.0;
  double advantage = 0.0;  // what drove the policy update
  bool used_feedback = false;
};

// One learning step: compute delta, update V with delta, then update the
// policy with the feedback value if present, otherwise with delta.
UpdateRecord actor_critic_update(PolicyTable& policy, ValueTable& values,
                                 const TransitionSample& sample, std::optional<int> feedback,
                                 const HyperParams& hyper);

// Plain text snapshot, one "state action value" triple per line; value-table
// lines use '-' for the action. Full round-trip precision.
void write_snapshot(std::ostream& out, const PolicyTable& policy);
void write_snapshot(std::ostream& out, const ValueTable& values);
PolicyTable read_policy_snapshot(std::istream& in);
ValueTable read_value_snapshot(std::istream& in);

}  // namespace pacman
