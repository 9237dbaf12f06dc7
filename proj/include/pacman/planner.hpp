#pragma once

// Sample-based symbolic planning: per-timestamp action availability is drawn
// from a stochastic policy, accumulated over growing horizons, and searched
// for a goal-reaching timestamped plan in which timestamps may be skipped.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pacman/action_lang.hpp"
#include "pacman/random.hpp"

namespace pacman {

// Probability distribution over the description's actions for a state. May
// throw std::out_of_range for states outside the policy's domain.
using PolicyFn = std::function<std::vector<double>(const WorldState&)>;

// Availability facts p(s, a, t) for a single timestamp t: actions[i] is the
// one action available in states[i].
struct AvailabilityFragment {
  int timestamp = 0;
  std::vector<ActionId> actions;
};

AvailabilityFragment sample_availability(const PolicyFn& policy, std::span<const WorldState> states,
                                         int timestamp, Rng& rng);

// Accumulated facts for timestamps 1..horizon() over a fixed state list.
// States outside the list (e.g. terminal states) never have an available action.
class AvailabilitySample {
 public:
  explicit AvailabilitySample(std::vector<WorldState> states);

  // Fragments must arrive in timestamp order 1, 2, ...
  void add(AvailabilityFragment fragment);

  int horizon() const { return static_cast<int>(by_time_.size()); }
  const std::vector<WorldState>& states() const { return states_; }
  std::optional<std::size_t> index_of(const WorldState& s) const;
  ActionId action_at(int timestamp, std::size_t state_index) const;
  std::optional<ActionId> action_at(int timestamp, const WorldState& s) const;

 private:
  std::vector<WorldState> states_;
  std::unordered_map<WorldState, std::size_t, WorldStateHash> index_;
  std::vector<std::vector<ActionId>> by_time_;
};

struct PlanStep {
  int timestamp = 0;
  WorldState before;
  std::optional<ActionId> action;  // nullopt: skipped timestamp

  bool operator==(const PlanStep&) const = default;
};

struct Plan {
  std::vector<PlanStep> steps;  // one per timestamp 1..horizon
  WorldState terminal;

  std::size_t num_actions() const;
  int horizon() const { return static_cast<int>(steps.size()); }

  bool operator==(const Plan&) const = default;
};

// Memoized apply() over interned states. Not thread-safe; one per learner.
class TransitionCache {
 public:
  explicit TransitionCache(std::shared_ptr<const ActionDescription> description);

  const ActionDescription& description() const { return *description_; }
  std::size_t intern(const WorldState& s);
  const WorldState& state(std::size_t id) const { return states_.at(id); }
  std::size_t successor(std::size_t id, ActionId a);
  std::size_t size() const { return states_.size(); }

 private:
  std::shared_ptr<const ActionDescription> description_;
  std::vector<WorldState> states_;
  std::unordered_map<WorldState, std::size_t, WorldStateHash> index_;
  std::vector<std::vector<std::optional<std::size_t>>> successors_;
};

struct PlanningProblem {
  std::shared_ptr<const ActionDescription> description;
  std::vector<FluentAtom> initial;
  std::vector<FluentAtom> goal;
  std::vector<WorldState> states;  // states over which availability is sampled
  PolicyFn policy;
  std::shared_ptr<TransitionCache> cache;  // optional; reused across solves when set
};

// Produces the facts for timestamp t. The default source samples the policy.
using AvailabilitySource = std::function<AvailabilityFragment(int timestamp, Rng& rng)>;

// Search over the availability-constrained timestamped graph for horizon k:
// at each timestamp the plan either skips or applies the single available
// action. Returns a plan with the fewest executed actions, ties broken by
// the lexicographically earliest action timestamps.
std::optional<Plan> plan_search(const ActionDescription& description,
                                const AvailabilitySample& availability,
                                std::span<const FluentAtom> initial, std::span<const FluentAtom> goal,
                                int horizon);

// Iterates k = 1 .. maxstamp-1, sampling timestamp k's facts, accumulating
// them, and returning the first plan found. `trace` (if given) receives the
// accumulated availability.
std::optional<Plan> solve(const PlanningProblem& problem, int maxstamp, Rng& rng,
                          AvailabilitySample* trace = nullptr);
std::optional<Plan> solve(const PlanningProblem& problem, int maxstamp, Rng& rng,
                          const AvailabilitySource& source, AvailabilitySample* trace = nullptr);

std::string plan_to_string(const ActionDescription& d, const Plan& plan);

// Answer-set style text of the timestamped program for horizon k: one fact
// p(s,a,t) per availability entry plus the timestamped causal laws, inertia,
// initial condition and goal. For inspection and external cross-checking.
std::string dump_timestamped_program(const ActionDescription& d, const AvailabilitySample& availability,
                                     std::span<const FluentAtom> initial,
                                     std::span<const FluentAtom> goal, int horizon);

}  // namespace pacman
