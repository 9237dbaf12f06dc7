#include "pacman/planner.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pacman {

AvailabilityFragment sample_availability(const PolicyFn& policy, std::span<const WorldState> states,
                                         int timestamp, Rng& rng) {
  AvailabilityFragment out;
  out.timestamp = timestamp;
  out.actions.reserve(states.size());
  for (const auto& s : states) {
    const std::vector<double> probs = policy(s);
    out.actions.push_back(sample_categorical(probs, rng));
  }
  return out;
}

AvailabilitySample::AvailabilitySample(std::vector<WorldState> states) : states_(std::move(states)) {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (!index_.emplace(states_[i], i).second) {
      throw std::invalid_argument("AvailabilitySample: duplicate state");
    }
  }
}

void AvailabilitySample::add(AvailabilityFragment fragment) {
  if (fragment.timestamp != horizon() + 1) {
    throw std::invalid_argument("AvailabilitySample: expected timestamp " +
                                std::to_string(horizon() + 1) + ", got " +
                                std::to_string(fragment.timestamp));
  }
  if (fragment.actions.size() != states_.size()) {
    throw std::invalid_argument("AvailabilitySample: fragment size does not match the state list");
  }
  by_time_.push_back(std::move(fragment.actions));
}

std::optional<std::size_t> AvailabilitySample::index_of(const WorldState& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ActionId AvailabilitySample::action_at(int timestamp, std::size_t state_index) const {
  return by_time_.at(static_cast<std::size_t>(timestamp - 1)).at(state_index);
}

std::optional<ActionId> AvailabilitySample::action_at(int timestamp, const WorldState& s) const {
  if (timestamp < 1 || timestamp > horizon()) return std::nullopt;
  auto idx = index_of(s);
  if (!idx) return std::nullopt;
  return action_at(timestamp, *idx);
}

std::size_t Plan::num_actions() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const PlanStep& s) { return s.action.has_value(); }));
}

TransitionCache::TransitionCache(std::shared_ptr<const ActionDescription> description)
    : description_(std::move(description)) {
  if (!description_) throw std::invalid_argument("TransitionCache: null description");
}

std::size_t TransitionCache::intern(const WorldState& s) {
  auto [it, inserted] = index_.emplace(s, states_.size());
  if (inserted) {
    states_.push_back(s);
    successors_.emplace_back(description_->actions.size());
  }
  return it->second;
}

std::size_t TransitionCache::successor(std::size_t id, ActionId a) {
  auto& slot = successors_.at(id).at(a);
  if (!slot) {
    WorldState next = apply(states_[id], a, *description_);
    const std::size_t nid = intern(next);
    successors_[id][a] = nid;  // intern may have reallocated successors_
    return nid;
  }
  return *slot;
}

namespace {

constexpr int kUnreachable = std::numeric_limits<int>::max() / 2;

// Layered reachability over (timestamp, state). layers_[t-1] holds the cache
// ids occupiable at time t (before acting at timestamp t).
class TimestampedSearch {
 public:
  TimestampedSearch(TransitionCache& cache, const AvailabilitySample& availability,
                    const WorldState& initial, std::span<const FluentAtom> goal)
      : cache_(cache), availability_(availability), goal_(goal.begin(), goal.end()) {
    initial_ = cache_.intern(initial);
    layers_.push_back({initial_});
  }

  int horizon() const { return static_cast<int>(layers_.size()) - 1; }

  // Adds layer horizon()+2 using the facts of timestamp horizon()+1.
  void extend() {
    const int t = horizon() + 1;
    const auto& cur = layers_.back();
    std::vector<std::size_t> next = cur;
    std::vector<char> seen(cache_.size(), 0);
    for (std::size_t id : cur) seen[id] = 1;
    for (std::size_t id : cur) {
      auto a = available(t, id);
      if (!a) continue;
      const std::size_t nid = cache_.successor(id, *a);
      if (nid >= seen.size()) seen.resize(cache_.size(), 0);
      if (!seen[nid]) {
        seen[nid] = 1;
        next.push_back(nid);
      }
    }
    layers_.push_back(std::move(next));
  }

  bool goal_reachable() {
    return std::any_of(layers_.back().begin(), layers_.back().end(),
                       [this](std::size_t id) { return is_goal(id); });
  }

  Plan extract() {
    const int k = horizon();
    const std::size_t n = cache_.size();
    // cost[t-1][id]: fewest actions from id at time t to a goal state at time k+1.
    std::vector<std::vector<int>> cost(static_cast<std::size_t>(k) + 1,
                                       std::vector<int>(n, kUnreachable));
    for (std::size_t id : layers_[static_cast<std::size_t>(k)]) {
      if (is_goal(id)) cost[static_cast<std::size_t>(k)][id] = 0;
    }
    for (int t = k; t >= 1; --t) {
      const auto& later = cost[static_cast<std::size_t>(t)];
      auto& here = cost[static_cast<std::size_t>(t - 1)];
      for (std::size_t id : layers_[static_cast<std::size_t>(t - 1)]) {
        int best = later[id];
        if (auto a = available(t, id)) {
          const int via = later[cache_.successor(id, *a)];
          if (via < kUnreachable) best = std::min(best, via + 1);
        }
        here[id] = best;
      }
    }
    Plan plan;
    std::size_t cur = initial_;
    for (int t = 1; t <= k; ++t) {
      PlanStep step{t, cache_.state(cur), std::nullopt};
      const int here = cost[static_cast<std::size_t>(t - 1)][cur];
      if (auto a = available(t, cur)) {
        const std::size_t nid = cache_.successor(cur, *a);
        if (cost[static_cast<std::size_t>(t)][nid] + 1 == here) {
          step.action = *a;
          cur = nid;
        }
      }
      plan.steps.push_back(std::move(step));
    }
    plan.terminal = cache_.state(cur);
    return plan;
  }

 private:
  std::optional<ActionId> available(int t, std::size_t id) {
    if (sample_index_.size() < cache_.size()) {
      const std::size_t old = sample_index_.size();
      sample_index_.resize(cache_.size());
      for (std::size_t i = old; i < cache_.size(); ++i) {
        sample_index_[i] = availability_.index_of(cache_.state(i));
      }
    }
    const auto& idx = sample_index_[id];
    if (!idx) return std::nullopt;
    return availability_.action_at(t, *idx);
  }

  bool is_goal(std::size_t id) {
    if (goal_flag_.size() < cache_.size()) {
      const std::size_t old = goal_flag_.size();
      goal_flag_.resize(cache_.size());
      for (std::size_t i = old; i < cache_.size(); ++i) {
        goal_flag_[i] = cache_.state(i).holds_all(goal_) ? 1 : 0;
      }
    }
    return goal_flag_[id] != 0;
  }

  TransitionCache& cache_;
  const AvailabilitySample& availability_;
  std::vector<FluentAtom> goal_;
  std::size_t initial_ = 0;
  std::vector<std::vector<std::size_t>> layers_;
  std::vector<std::optional<std::size_t>> sample_index_;
  std::vector<char> goal_flag_;
};

}  // namespace

std::optional<Plan> plan_search(const ActionDescription& description,
                                const AvailabilitySample& availability,
                                std::span<const FluentAtom> initial, std::span<const FluentAtom> goal,
                                int horizon) {
  if (horizon < 1) throw std::invalid_argument("plan_search: horizon must be >= 1");
  if (availability.horizon() < horizon) {
    throw std::invalid_argument("plan_search: availability does not cover the horizon");
  }
  // Non-owning alias; the cache does not outlive this call.
  TransitionCache cache(std::shared_ptr<const ActionDescription>(&description, [](const auto*) {}));
  const WorldState init = complete_state(description, initial);
  TimestampedSearch search(cache, availability, init, goal);
  for (int t = 1; t <= horizon; ++t) search.extend();
  if (!search.goal_reachable()) return std::nullopt;
  return search.extract();
}

std::optional<Plan> solve(const PlanningProblem& problem, int maxstamp, Rng& rng,
                          AvailabilitySample* trace) {
  const PolicyFn& policy = problem.policy;
  const auto& states = problem.states;
  return solve(
      problem, maxstamp, rng,
      [&](int t, Rng& r) { return sample_availability(policy, states, t, r); }, trace);
}

std::optional<Plan> solve(const PlanningProblem& problem, int maxstamp, Rng& rng,
                          const AvailabilitySource& source, AvailabilitySample* trace) {
  if (maxstamp < 1) throw std::invalid_argument("solve: maxstamp must be >= 1");
  if (!problem.description) throw std::invalid_argument("solve: missing action description");
  auto cache = problem.cache ? problem.cache : std::make_shared<TransitionCache>(problem.description);
  if (&cache->description() != problem.description.get()) {
    throw std::invalid_argument("solve: transition cache belongs to a different description");
  }
  const WorldState init = complete_state(*problem.description, problem.initial);
  AvailabilitySample availability(problem.states);
  TimestampedSearch search(*cache, availability, init, problem.goal);
  std::optional<Plan> plan;
  for (int k = 1; k < maxstamp && !plan; ++k) {
    availability.add(source(k, rng));
    search.extend();
    if (search.goal_reachable()) plan = search.extract();
  }
  if (trace) *trace = std::move(availability);
  return plan;
}

std::string plan_to_string(const ActionDescription& d, const Plan& plan) {
  std::ostringstream out;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    if (i) out << ", ";
    if (step.action) {
      out << d.actions.at(*step.action) << '@' << step.timestamp;
    } else {
      out << "skip@" << step.timestamp;
    }
  }
  return out.str();
}

namespace {

std::string asp_name(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[0])));
  return out;
}

std::string asp_value(const FluentDecl& decl, int value) {
  const std::string label = decl.value_label(value);
  return decl.kind == FluentDecl::Kind::integer_range ? label : asp_name(label);
}

std::string asp_atom(const ActionDescription& d, const FluentAtom& a, std::string_view t) {
  const FluentDecl& decl = d.fluents.at(a.fluent);
  return "holds(" + asp_name(decl.name) + "," + asp_value(decl, a.value) + "," + std::string(t) + ")";
}

}  // namespace

std::string dump_timestamped_program(const ActionDescription& d, const AvailabilitySample& availability,
                                     std::span<const FluentAtom> initial,
                                     std::span<const FluentAtom> goal, int horizon) {
  std::ostringstream out;
  out << "% timestamped program, horizon " << horizon << "\n";
  out << "#const k=" << horizon << ".\n";
  out << "time(1..k).\n";
  for (const auto& a : d.actions) out << "action(" << asp_name(a) << ").\n";
  out << "\n% sampled states\n";
  const auto& states = availability.states();
  for (std::size_t i = 0; i < states.size(); ++i) {
    out << "% s" << i << " = " << state_to_string(d, states[i]) << "\n";
    out << "in(s" << i << ",T) :- ";
    for (FluentId f = 0; f < states[i].values.size(); ++f) {
      out << asp_atom(d, FluentAtom{f, states[i].values[f]}, "T") << ", ";
    }
    out << "T=1..k+1.\n";
  }
  out << "\n% availability facts p(s,a,t)\n";
  for (int t = 1; t <= std::min(horizon, availability.horizon()); ++t) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      out << "p(s" << i << "," << asp_name(d.actions[availability.action_at(t, i)]) << "," << t
          << ").\n";
    }
  }
  out << "\n% at most one action per timestamp, only if available in the current state\n";
  out << "{ occurs(A,T) : action(A) } 1 :- time(T).\n";
  out << ":- occurs(A,T), not avail(A,T).\n";
  out << "avail(A,T) :- in(S,T), p(S,A,T).\n";
  out << "\n% static laws\n";
  for (const auto& law : d.statics) {
    out << asp_atom(d, law.head, "T") << " :- ";
    for (const auto& b : law.body) out << asp_atom(d, b, "T") << ", ";
    out << "T=1..k+1.\n";
  }
  out << "\n% dynamic laws\n";
  for (const auto& law : d.dynamics) {
    out << asp_atom(d, law.effect, "T+1") << " :- occurs(" << asp_name(d.actions[law.action])
        << ",T)";
    for (const auto& p : law.preconditions) out << ", " << asp_atom(d, p, "T");
    out << ".\n";
  }
  out << "\n% inertia and uniqueness\n";
  for (const auto& f : d.fluents) {
    for (int v = 0; v < f.size(); ++v) {
      out << "fvalue(" << asp_name(f.name) << "," << asp_value(f, v) << ").\n";
    }
  }
  out << "-holds(F,V,T) :- holds(F,W,T), fvalue(F,V), V != W.\n";
  out << "holds(F,V,T+1) :- holds(F,V,T), time(T), not -holds(F,V,T+1).\n";
  out << ":- holds(F,V,T), holds(F,W,T), V != W.\n";
  out << "\n% initial condition and goal\n";
  for (const auto& a : initial) out << asp_atom(d, a, "1") << ".\n";
  out << "goal :- ";
  for (std::size_t i = 0; i < goal.size(); ++i) out << (i ? ", " : "") << asp_atom(d, goal[i], "k+1");
  if (goal.empty()) out << "time(1)";
  out << ".\n:- not goal.\n";
  out << "#minimize { 1,T : occurs(A,T) }.\n";
  return out.str();
}

}  // namespace pacman
