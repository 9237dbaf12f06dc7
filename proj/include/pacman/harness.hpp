#pragma once

// The planner-actor-critic learning loop and experiment orchestration:
// configuration files, seeded repetitions, learning-curve aggregation and
// output files.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pacman/actor_critic.hpp"
#include "pacman/baselines.hpp"
#include "pacman/envs.hpp"
#include "pacman/feedback.hpp"
#include "pacman/learner.hpp"
#include "pacman/planner.hpp"

namespace pacman {

// Planning problem for env: initial state reset(), the env's goal, sampling
// over enumerate_states(), availability drawn from `policy` (held by
// reference; it must outlive the problem).
PlanningProblem make_planning_problem(const Environment& env, const PolicyTable& policy);

// One episode: plan once, execute the plan's actions in order, and after each
// executed transition update V with delta and pi with f (when feedback is
// available) or delta. Skipped timestamps produce no transition. The episode
// ends at a terminal state, at the end of the plan, at the episode cap, or
// after a transition that differs from the plan's prediction. If no plan is
// found within maxstamp the episode has no samples and its return is the
// time-out return -episode_cap.
EpisodeResult run_pacman_episode(const Environment& env, PolicyTable& policy, ValueTable& values,
                                 const PlanningProblem& problem, int maxstamp, const HyperParams& hyper,
                                 FeedbackSource& feedback, int episode, Rng& rng, StepObserver* observer = nullptr,
                                 const AvailabilitySource* source = nullptr);

class PacmanLearner final : public Learner {
 public:
  PacmanLearner(const Environment& env, HyperParams hyper, int maxstamp, Rng rng);
  PacmanLearner(const PacmanLearner&) = delete;
  PacmanLearner& operator=(const PacmanLearner&) = delete;

  std::string name() const override { return "pacman"; }
  EpisodeResult run_episode(int episode, FeedbackSource& feedback, StepObserver* observer = nullptr) override;
  std::vector<double> action_probs(StateId s) const override { return policy_.action_probs(s); }
  double state_value(StateId s) const override { return values_.value(s); }
  void write_snapshot(std::ostream& out) const override;

  // Replaces policy sampling with fixed availability facts (testing, replay).
  void set_availability_source(AvailabilitySource source) { source_ = std::move(source); }

  const PolicyTable& policy() const { return policy_; }
  const ValueTable& values() const { return values_; }
  PolicyTable& policy() { return policy_; }
  ValueTable& values() { return values_; }
  int maxstamp() const { return maxstamp_; }

 private:
  const Environment& env_;
  HyperParams hyper_;
  int maxstamp_;
  Rng rng_;
  PolicyTable policy_;
  ValueTable values_;
  PlanningProblem problem_;
  std::optional<AvailabilitySource> source_;
};

// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::string env = "fourrooms";     // fourrooms | taxi | line
  std::string algorithm = "pacman";  // pacman | ac_hf | tamer_rl | bql_shaping
  std::optional<Intent> intent = Intent::helpful;  // nullopt: no feedback
  FeedbackCase fcase = FeedbackCase::ideal;
  HyperParams hyper;
  int maxstamp = 0;    // 0: environment default
  int maxepisode = 0;  // 0: environment default
  int runs = 10;
  std::vector<std::uint64_t> seeds;  // empty: 1..runs
  std::string output;                // empty: no files written
  double epsilon = 0.1;
  ShapingWeights weights;
  bool danger_terminal = true;
  std::string map;       // optional map / instance file
  std::string scenario;  // optional scenario file (its p_give/p_flip override `case`)
  bool step_log = true;

  // `key = value` lines; '#' or '%' start comments. Unknown keys are errors.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);
  // Canonical text with every key, including resolved defaults.
  std::string to_text() const;
  // Fills environment defaults and seeds; validates. Throws std::invalid_argument.
  void resolve(const Environment& env);
};

std::unique_ptr<Environment> make_environment(const ExperimentConfig& config);
std::unique_ptr<Learner> make_learner(const ExperimentConfig& config, const Environment& env, std::uint64_t seed);
std::unique_ptr<FeedbackSource> make_feedback_source(const ExperimentConfig& config, const Environment& env,
                                                     std::uint64_t seed);

struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> variance;  // population variance across runs
};

// Throws std::invalid_argument for no runs or runs of unequal length.
AggregateCurve aggregate_curves(const std::vector<std::vector<double>>& runs);

struct EpisodeSummary {
  double total_return = 0.0;
  int steps = 0;
  int policy_updates = 0;
  int feedback_used = 0;
  bool planner_failed = false;
  bool timed_out = false;
  int improper_actions = 0;
};

struct ExperimentResult {
  ExperimentConfig config;  // resolved
  std::vector<std::vector<EpisodeSummary>> episodes;  // [run][episode]
  std::vector<std::vector<double>> returns;           // [run][episode]
  AggregateCurve aggregate;
};

// Runs config.runs seeded repetitions of config.maxepisode episodes. When
// config.output is set, writes config.txt, run_<i>.csv, aggregate.csv,
// run.log and (with step_log) steps_<i>.csv into that directory.
ExperimentResult run_experiment(ExperimentConfig config);

// Mean of the last `count` entries (all entries if fewer).
double tail_mean(const std::vector<double>& series, std::size_t count);
double head_mean(const std::vector<double>& series, std::size_t count);

// Plot-ready table from an output directory: episode, mean, variance, std,
// mean - std, mean + std, and each run's return.
std::string curves_table(const std::filesystem::path& dir);

}  // namespace pacman
