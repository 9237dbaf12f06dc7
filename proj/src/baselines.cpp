#include "pacman/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pacman/text_util.hpp"

namespace pacman {

void ShapingWeights::validate() const {
  if (!std::isfinite(w_tamer) || w_tamer < 0.0) throw std::invalid_argument("w_tamer must be finite and >= 0");
  if (!std::isfinite(w_bql) || w_bql < 0.0) throw std::invalid_argument("w_bql must be finite and >= 0");
  if (!(tamer_lr > 0.0 && tamer_lr <= 1.0)) throw std::invalid_argument("tamer_lr must be in (0, 1]");
}

ActionValueTable::ActionValueTable(std::size_t num_states, std::size_t num_actions)
    : num_states_(num_states), num_actions_(num_actions), q_(num_states * num_actions, 0.0) {
  if (num_actions == 0) throw std::invalid_argument("ActionValueTable: no actions");
}

std::size_t ActionValueTable::index(StateId s, std::size_t a) const {
  if (s >= num_states_) throw std::out_of_range("ActionValueTable: unknown state " + std::to_string(s));
  if (a >= num_actions_) throw std::out_of_range("ActionValueTable: unknown action " + std::to_string(a));
  return s * num_actions_ + a;
}

double ActionValueTable::max_value(StateId s) const {
  const auto begin = q_.begin() + static_cast<std::ptrdiff_t>(index(s, 0));
  return *std::max_element(begin, begin + static_cast<std::ptrdiff_t>(num_actions_));
}

UpdateRecord ac_hf_step(PolicyTable& policy, ValueTable& values, const TransitionSample& sample,
                        std::optional<int> feedback, const HyperParams& hyper) {
  return actor_critic_update(policy, values, sample, feedback, hyper);
}

double q_learning_update(QTable& q, const TransitionSample& sample, double shaped_reward, const HyperParams& hyper) {
  const double bootstrap = sample.terminal ? 0.0 : hyper.gamma * q.max_value(sample.next_state);
  const double old = q.get(sample.state, sample.action);
  const double delta = shaped_reward + bootstrap - old;
  q.set(sample.state, sample.action, old + hyper.alpha * delta);
  return delta;
}

double tamer_rl_step(QTable& q, HumanModel& h, const TransitionSample& sample, std::optional<int> feedback,
                     const ShapingWeights& weights, const HyperParams& hyper) {
  if (feedback) {
    const double old = h.get(sample.state, sample.action);
    h.set(sample.state, sample.action, old + weights.tamer_lr * (*feedback - old));
  }
  const double shaped = sample.reward + weights.w_tamer * h.get(sample.state, sample.action);
  q_learning_update(q, sample, shaped, hyper);
  return shaped;
}

double bql_shaping_step(QTable& q, const TransitionSample& sample, std::optional<int> feedback,
                        const ShapingWeights& weights, const HyperParams& hyper) {
  const double shaped = sample.reward + (feedback ? weights.w_bql * *feedback : 0.0);
  q_learning_update(q, sample, shaped, hyper);
  return shaped;
}

namespace {

std::vector<std::size_t> greedy_actions(const QTable& q, StateId s) {
  const double best = q.max_value(s);
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < q.num_actions(); ++a) {
    if (q.get(s, a) == best) out.push_back(a);
  }
  return out;
}

}  // namespace

std::size_t epsilon_greedy(const QTable& q, StateId s, double epsilon, Rng& rng) {
  const double u = uniform01(rng);
  if (u < epsilon) return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(q.num_actions()));
  const auto best = greedy_actions(q, s);
  return best[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(best.size()))];
}

std::vector<double> epsilon_greedy_probs(const QTable& q, StateId s, double epsilon) {
  const auto best = greedy_actions(q, s);
  const double n = static_cast<double>(q.num_actions());
  std::vector<double> p(q.num_actions(), epsilon / n);
  for (auto a : best) p[a] += (1.0 - epsilon) / static_cast<double>(best.size());
  return p;
}

namespace {

// Step-by-step episode shared by the planner-free learners. `update` fills
// the learning fields of the record.
EpisodeResult run_stepwise_episode(const Environment& env, int episode, FeedbackSource& feedback,
                                   StepObserver* observer, const std::function<std::size_t(StateId)>& choose,
                                   const std::function<void(const TransitionSample&, StepRecord&)>& update) {
  EpisodeResult result;
  StateId s = env.reset();
  if (observer) observer->on_episode_start(episode, s);
  bool terminal = false;
  for (int step = 1; step <= env.episode_cap() && !terminal; ++step) {
    const std::size_t a = choose(s);
    const EnvStep es = env.step(s, a);
    StepRecord rec;
    rec.step = step;
    rec.state = s;
    rec.action = a;
    rec.reward = es.reward;
    rec.next_state = es.next_state;
    rec.terminal = es.terminal;
    rec.improper = es.improper;
    if (observer) observer->on_executed(episode, rec);
    rec.feedback = feedback.feedback(episode, step, s, a);
    update(TransitionSample{s, a, es.reward, es.next_state, es.terminal}, rec);
    if (observer) observer->on_updated(episode, rec);
    result.total_return += es.reward;
    result.improper_actions += es.improper ? 1 : 0;
    ++result.steps;
    ++result.policy_updates;
    result.records.push_back(rec);
    s = es.next_state;
    terminal = es.terminal;
  }
  result.timed_out = !terminal;
  if (observer) observer->on_episode_end(episode, result);
  return result;
}

}  // namespace

AcHfLearner::AcHfLearner(const Environment& env, HyperParams hyper, Rng rng)
    : env_(env), hyper_(hyper), rng_(rng), policy_(env.num_states(), env.num_actions()), values_(env.num_states()) {
  hyper_.validate();
}

EpisodeResult AcHfLearner::run_episode(int episode, FeedbackSource& feedback, StepObserver* observer) {
  return run_stepwise_episode(
      env_, episode, feedback, observer,
      [&](StateId s) {
        const auto p = policy_.action_probs(s);
        return sample_categorical(p, rng_);
      },
      [&](const TransitionSample& sample, StepRecord& rec) {
        const UpdateRecord u = ac_hf_step(policy_, values_, sample, rec.feedback, hyper_);
        rec.td_error = u.td_error;
        rec.advantage = u.advantage;
        rec.used_feedback = u.used_feedback;
      });
}

void AcHfLearner::write_snapshot(std::ostream& out) const {
  pacman::write_snapshot(out, policy_);
  pacman::write_snapshot(out, values_);
}

ShapedQLearner::ShapedQLearner(Kind kind, const Environment& env, HyperParams hyper, ShapingWeights weights,
                               double epsilon, Rng rng)
    : kind_(kind),
      env_(env),
      hyper_(hyper),
      weights_(weights),
      epsilon_(epsilon),
      rng_(rng),
      q_(env.num_states(), env.num_actions()),
      h_(env.num_states(), env.num_actions()) {
  hyper_.validate();
  weights_.validate();
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must be in [0, 1]");
}

EpisodeResult ShapedQLearner::run_episode(int episode, FeedbackSource& feedback, StepObserver* observer) {
  return run_stepwise_episode(
      env_, episode, feedback, observer, [&](StateId s) { return epsilon_greedy(q_, s, epsilon_, rng_); },
      [&](const TransitionSample& sample, StepRecord& rec) {
        const double before = q_.get(sample.state, sample.action);
        const double bootstrap = sample.terminal ? 0.0 : hyper_.gamma * q_.max_value(sample.next_state);
        const double shaped = kind_ == Kind::tamer_rl
                                  ? tamer_rl_step(q_, h_, sample, rec.feedback, weights_, hyper_)
                                  : bql_shaping_step(q_, sample, rec.feedback, weights_, hyper_);
        rec.td_error = shaped + bootstrap - before;
        rec.advantage = shaped;
        rec.used_feedback = rec.feedback.has_value();
      });
}

void ShapedQLearner::write_snapshot(std::ostream& out) const {
  pacman::write_snapshot(out, q_, "q");
  if (kind_ == Kind::tamer_rl) pacman::write_snapshot(out, h_, "h");
}

void write_snapshot(std::ostream& out, const ActionValueTable& table, const char* kind) {
  out << "# " << kind << ' ' << table.num_states() << ' ' << table.num_actions() << '\n';
  for (StateId s = 0; s < table.num_states(); ++s) {
    for (std::size_t a = 0; a < table.num_actions(); ++a) {
      out << s << ' ' << a << ' ' << format_double(table.get(s, a)) << '\n';
    }
  }
}

ActionValueTable read_action_value_snapshot(std::istream& in, const char* kind) {
  std::string line;
  while (std::getline(in, line) && trim(line).empty()) {
  }
  std::istringstream hs(line);
  std::string hash, k;
  std::size_t ns = 0, na = 0;
  if (!(hs >> hash >> k >> ns >> na) || hash != "#" || k != kind) {
    throw std::runtime_error(std::string("snapshot: expected '# ") + kind + " S A' header");
  }
  ActionValueTable table(ns, na);
  for (std::size_t i = 0; i < ns * na; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("snapshot: truncated table");
    std::istringstream ls(line);
    std::size_t s = 0, a = 0;
    std::string value;
    if (!(ls >> s >> a >> value)) throw std::runtime_error("snapshot: malformed line '" + line + "'");
    table.set(s, a, parse_double(value));
  }
  return table;
}

}  // namespace pacman
