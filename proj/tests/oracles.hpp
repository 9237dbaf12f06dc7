#pragma once

// Independent test-side oracles. These re-derive results from definitions
// (exhaustive search, direct state application) without using the library's
// search or caching code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pacman/action_lang.hpp"
#include "pacman/planner.hpp"
#include "pacman/random.hpp"

namespace oracle {

using pacman::ActionDescription;
using pacman::AvailabilitySample;
using pacman::FluentAtom;
using pacman::Plan;
using pacman::WorldState;

// Fewest executed actions over all availability-constrained timestamped
// paths of `horizon` timestamps from `initial` to a goal state; nullopt if
// none. Exhaustive layer-by-layer breadth-first expansion.
inline std::optional<int> min_actions(const ActionDescription& d, const AvailabilitySample& avail,
                                      const WorldState& initial, const std::vector<FluentAtom>& goal,
                                      int horizon) {
  std::map<WorldState, int> layer{{initial, 0}};
  for (int t = 1; t <= horizon; ++t) {
    std::map<WorldState, int> next;
    auto relax = [&](const WorldState& s, int cost) {
      auto it = next.find(s);
      if (it == next.end() || cost < it->second) next[s] = cost;
    };
    for (const auto& [s, cost] : layer) {
      relax(s, cost);  // skip timestamp t
      if (auto a = avail.action_at(t, s)) relax(pacman::apply(s, *a, d), cost + 1);
    }
    layer = std::move(next);
  }
  std::optional<int> best;
  for (const auto& [s, cost] : layer) {
    if (s.holds_all(goal) && (!best || cost < *best)) best = cost;
  }
  return best;
}

// Empty string when `plan` is a valid plan for the given availability,
// otherwise a description of the first violation.
inline std::string validate_plan(const ActionDescription& d, const AvailabilitySample& avail, const Plan& plan,
                                 const std::vector<FluentAtom>& initial, const std::vector<FluentAtom>& goal) {
  if (plan.steps.empty()) return "plan has no timestamps";
  WorldState s = plan.steps.front().before;
  if (!s.holds_all(initial)) return "first state does not satisfy the initial condition";
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    if (step.timestamp != static_cast<int>(i) + 1) return "timestamps are not 1..k";
    if (step.before != s) return "state chain broken at t=" + std::to_string(step.timestamp);
    if (step.action) {
      const auto allowed = avail.action_at(step.timestamp, s);
      if (!allowed || *allowed != *step.action) {
        return "action at t=" + std::to_string(step.timestamp) + " not in the availability facts";
      }
      s = pacman::apply(s, *step.action, d);
    }
  }
  if (s != plan.terminal) return "terminal state does not match execution";
  if (!s.holds_all(goal)) return "terminal state does not satisfy the goal";
  return {};
}

// Brute-force enumeration of every action/skip choice sequence over the
// horizon (2^k paths), returning the lexicographically smallest vector of
// action timestamps among plans with the fewest actions.
inline std::optional<std::vector<int>> brute_force_best_timestamps(const ActionDescription& d,
                                                                    const AvailabilitySample& avail,
                                                                    const WorldState& initial,
                                                                    const std::vector<FluentAtom>& goal,
                                                                    int horizon) {
  std::optional<std::vector<int>> best;
  for (unsigned mask = 0; mask < (1u << horizon); ++mask) {
    WorldState s = initial;
    std::vector<int> times;
    bool ok = true;
    for (int t = 1; t <= horizon && ok; ++t) {
      if (!(mask & (1u << (t - 1)))) continue;
      auto a = avail.action_at(t, s);
      if (!a) {
        ok = false;
        break;
      }
      s = pacman::apply(s, *a, d);
      times.push_back(t);
    }
    if (!ok || !s.holds_all(goal)) continue;
    if (!best || times.size() < best->size() || (times.size() == best->size() && times < *best)) best = times;
  }
  return best;
}

inline std::vector<int> action_timestamps(const Plan& plan) {
  std::vector<int> out;
  for (const auto& st : plan.steps) {
    if (st.action) out.push_back(st.timestamp);
  }
  return out;
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

// Central finite difference of f at x along coordinate i.
template <typename F>
double central_difference(F&& f, std::vector<double> x, std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}


// Random small planning problem: 1-3 integer fluents (at most 200 states),
// 2-4 actions, each action writing one fluent under conflict-free
// preconditions, random softmax policy, random goal atom.
struct RandomProblem {
  pacman::PlanningProblem problem;
  int maxstamp = 0;
};

inline RandomProblem random_problem(pacman::Rng& rng) {
  using namespace pacman;
  auto draw = [&rng](int n) { return static_cast<int>(uniform01(rng) * n); };
  auto d = std::make_shared<ActionDescription>();
  const int nf = 1 + draw(3);
  int total = 1;
  for (int f = 0; f < nf; ++f) {
    int size = 2 + draw(nf == 1 ? 30 : (nf == 2 ? 12 : 4));
    while (total * size > 200) --size;
    total *= size;
    d->fluents.push_back(FluentDecl::integer("F" + std::to_string(f), 0, size - 1));
  }
  const int na = 2 + draw(3);
  for (int a = 0; a < na; ++a) {
    d->actions.push_back("a" + std::to_string(a));
    const FluentId target = static_cast<FluentId>(draw(nf));
    const FluentId guard = static_cast<FluentId>(draw(nf));
    const int tsize = d->fluents[target].size();
    const int gsize = d->fluents[guard].size();
    const bool shift = uniform01(rng) < 0.5;
    const int step = uniform01(rng) < 0.5 ? 1 : -1;
    for (int u = 0; u < tsize; ++u) {
      for (int w = 0; w < (guard == target ? 1 : gsize); ++w) {
        if (uniform01(rng) < 0.25) continue;
        int effect = shift ? u + step : draw(tsize);
        if (effect < 0 || effect >= tsize) continue;
        DynamicLaw law;
        law.action = static_cast<ActionId>(a);
        law.effect = {target, effect};
        law.preconditions.push_back({target, u});
        if (guard != target) law.preconditions.push_back({guard, w});
        d->dynamics.push_back(law);
      }
    }
  }
  d->validate();

  std::vector<FluentAtom> initial;
  for (FluentId f = 0; f < d->fluents.size(); ++f) initial.push_back({f, draw(d->fluents[f].size())});
  const FluentId gf = static_cast<FluentId>(draw(nf));
  std::vector<FluentAtom> goal{{gf, draw(d->fluents[gf].size())}};

  const WorldState start = complete_state(*d, initial);
  auto states = reachable_states(*d, start);
  std::map<WorldState, std::vector<double>> table;
  for (const auto& s : states) {
    std::vector<double> prefs(static_cast<std::size_t>(na));
    double z = 0.0;
    for (auto& p : prefs) {
      p = std::exp(3.0 * (uniform01(rng) - 0.5));
      z += p;
    }
    for (auto& p : prefs) p /= z;
    table[s] = prefs;
  }
  RandomProblem out;
  out.problem.description = d;
  out.problem.initial = initial;
  out.problem.goal = goal;
  out.problem.states = std::move(states);
  out.problem.policy = [table](const WorldState& s) { return table.at(s); };
  out.maxstamp = 2 + draw(12);  // horizons 1..maxstamp-1 <= 12
  return out;
}

// Checks one solve() call against the exhaustive oracle. Empty string on
// agreement, otherwise the disagreement.
inline std::string check_against_oracle(const RandomProblem& rp, std::uint64_t seed) {
  using namespace pacman;
  const auto& p = rp.problem;
  const auto& d = *p.description;
  auto rng = make_rng(seed);
  AvailabilitySample trace(p.states);
  const auto plan = solve(p, rp.maxstamp, rng, &trace);
  const WorldState start = complete_state(d, p.initial);
  const int searched = trace.horizon();
  for (int k = 1; k < searched; ++k) {
    if (min_actions(d, trace, start, p.goal, k)) return "oracle finds a plan at an earlier horizon " + std::to_string(k);
  }
  const auto best = searched > 0 ? min_actions(d, trace, start, p.goal, searched) : std::nullopt;
  if (!plan) {
    if (best) return "solve found no plan but the oracle did at horizon " + std::to_string(searched);
    if (searched != rp.maxstamp - 1) return "solve stopped before maxstamp - 1";
    return {};
  }
  if (!best) return "solve returned a plan the oracle cannot reproduce";
  if (plan->horizon() != searched) return "plan horizon differs from the searched horizon";
  if (static_cast<int>(plan->num_actions()) != *best) return "plan is not the fewest-action plan";
  return validate_plan(d, trace, *plan, p.initial, p.goal);
}

}  // namespace oracle
