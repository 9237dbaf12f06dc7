#include <doctest.h>

#include "oracles.hpp"
#include "pacman/planner.hpp"

using namespace pacman;

namespace {

const char* kThreeGrid =
    "fluent Loc : 1..3.\n"
    "action moveleft, moveright.\n"
    "moveleft causes Loc=L-1 if Loc=L.\n"
    "moveright causes Loc=L+1 if Loc=L.\n";

struct ThreeGrid {
  std::shared_ptr<const ActionDescription> d =
      std::make_shared<const ActionDescription>(parse_action_description(kThreeGrid));
  ActionId left = d->action("moveleft");
  ActionId right = d->action("moveright");
  std::vector<WorldState> states = reachable_states(*d, at(1));

  WorldState at(int loc) const {
    return complete_state(*d, std::vector<FluentAtom>{d->atom("Loc", std::to_string(loc))});
  }
  std::size_t index(int loc) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i] == at(loc)) return i;
    }
    throw std::logic_error("no such state");
  }
  PlanningProblem problem(PolicyFn policy, int from = 1, int to = 3) const {
    PlanningProblem p;
    p.description = d;
    p.initial = {d->atom("Loc", std::to_string(from))};
    p.goal = {d->atom("Loc", std::to_string(to))};
    p.states = states;
    p.policy = std::move(policy);
    return p;
  }
  // Fragment in which state Loc=i has action by_loc[i-1].
  AvailabilityFragment fragment(int t, std::array<ActionId, 3> by_loc) const {
    AvailabilityFragment f;
    f.timestamp = t;
    f.actions.resize(states.size());
    for (int l = 1; l <= 3; ++l) f.actions[index(l)] = by_loc[static_cast<std::size_t>(l - 1)];
    return f;
  }
};

PolicyFn constant_policy(std::vector<double> probs) {
  return [probs](const WorldState&) { return probs; };
}

}  // namespace

TEST_CASE("sampling is reproducible under a fixed seed") {
  ThreeGrid g;
  const auto policy = constant_policy({0.5, 0.5});
  auto r1 = make_rng(42);
  auto r2 = make_rng(42);
  const auto a = sample_availability(policy, g.states, 1, r1);
  const auto b = sample_availability(policy, g.states, 1, r2);
  CHECK(a.actions.size() == 3);
  CHECK(a.actions == b.actions);
  CHECK(a.timestamp == 1);
}

TEST_CASE("point-mass policy samples only its action") {
  ThreeGrid g;
  auto rng = make_rng(3);
  for (int t = 1; t <= 50; ++t) {
    for (auto a : sample_availability(constant_policy({0.0, 1.0}), g.states, t, rng).actions) CHECK(a == g.right);
  }
}

TEST_CASE("sampled frequency matches the policy probability") {
  ThreeGrid g;
  const std::vector<WorldState> one{g.at(1)};
  auto rng = make_rng(7);
  int right = 0;
  const int n = 10000;
  for (int t = 1; t <= n; ++t) {
    right += sample_availability(constant_policy({0.1, 0.9}), one, t, rng).actions[0] == g.right;
  }
  CHECK(std::abs(right / static_cast<double>(n) - 0.9) <= 0.02);
}

TEST_CASE("figure replay: moveright@1, skip@2, moveright@3") {
  ThreeGrid g;
  // p(1,moveright,1), p(2,moveleft,2), p(2,moveright,3); other cells hold moveleft.
  const std::vector<AvailabilityFragment> facts{
      g.fragment(1, {g.right, g.left, g.left}),
      g.fragment(2, {g.left, g.left, g.left}),
      g.fragment(3, {g.left, g.right, g.left}),
  };
  const AvailabilitySource source = [&](int t, Rng&) { return facts.at(static_cast<std::size_t>(t - 1)); };
  auto rng = make_rng(1);
  const auto plan = solve(g.problem(constant_policy({0.5, 0.5})), 8, rng, source);
  REQUIRE(plan.has_value());
  CHECK(plan_to_string(*g.d, *plan) == "moveright@1, skip@2, moveright@3");
  CHECK(plan->num_actions() == 2);
  CHECK(plan->terminal == g.at(3));
}

TEST_CASE("initial state satisfying the goal gives an empty plan at k=1") {
  ThreeGrid g;
  auto rng = make_rng(1);
  const auto plan = solve(g.problem(constant_policy({0.5, 0.5}), 3, 3), 8, rng);
  REQUIRE(plan.has_value());
  CHECK(plan->horizon() == 1);
  CHECK(plan->num_actions() == 0);
}

TEST_CASE("policy that always moves away from the goal finds nothing") {
  ThreeGrid g;
  auto rng = make_rng(1);
  AvailabilitySample trace(g.states);
  CHECK_FALSE(solve(g.problem(constant_policy({1.0, 0.0})), 10, rng, &trace).has_value());
  CHECK(trace.horizon() == 9);
  for (int k = 1; k <= 9; ++k) CHECK_FALSE(oracle::min_actions(*g.d, trace, g.at(1), g.problem({}).goal, k));
}

TEST_CASE("moveright everywhere gives the two-action plan at k=2") {
  ThreeGrid g;
  AvailabilitySample avail(g.states);
  avail.add(g.fragment(1, {g.right, g.right, g.right}));
  avail.add(g.fragment(2, {g.right, g.right, g.right}));
  const auto p = g.problem({});
  const auto plan = plan_search(*g.d, avail, p.initial, p.goal, 2);
  REQUIRE(plan.has_value());
  CHECK(plan_to_string(*g.d, *plan) == "moveright@1, moveright@2");
  CHECK(plan->steps[1].before == g.at(2));
  CHECK_FALSE(plan_search(*g.d, avail, p.initial, p.goal, 1).has_value());
}

TEST_CASE("walled-off goal is unreachable at every horizon") {
  const auto d = std::make_shared<const ActionDescription>(parse_action_description(
      "fluent Loc : 1..4.\naction moveleft, moveright.\n"
      "moveleft causes Loc=L-1 if Loc=L.\nmoveright causes Loc=2 if Loc=1.\nmoveright causes Loc=3 if Loc=2.\n"));
  PlanningProblem p;
  p.description = d;
  p.initial = {d->atom("Loc", "1")};
  p.goal = {d->atom("Loc", "4")};
  p.states = reachable_states(*d, complete_state(*d, p.initial));
  p.policy = constant_policy({0.5, 0.5});
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto rng = make_rng(seed);
    CHECK_FALSE(solve(p, 13, rng).has_value());
  }
}

TEST_CASE("equal-length plans: the earliest action timestamps win") {
  ThreeGrid g;
  AvailabilitySample avail(g.states);
  for (int t = 1; t <= 3; ++t) avail.add(g.fragment(t, {g.right, g.right, g.right}));
  const auto p = g.problem({});
  const auto plan = plan_search(*g.d, avail, p.initial, p.goal, 3);
  REQUIRE(plan.has_value());
  CHECK(plan_to_string(*g.d, *plan) == "moveright@1, moveright@2, skip@3");
  const auto brute = oracle::brute_force_best_timestamps(*g.d, avail, g.at(1), p.goal, 3);
  REQUIRE(brute.has_value());
  CHECK(oracle::action_timestamps(*plan) == *brute);
}

TEST_CASE("property: tie-break agrees with brute-force enumeration") {
  auto rng = make_rng(99);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto rp = oracle::random_problem(rng);
    const auto& p = rp.problem;
    const int k = std::min(rp.maxstamp - 1, 10);
    AvailabilitySample avail(p.states);
    for (int t = 1; t <= k; ++t) avail.add(sample_availability(p.policy, p.states, t, rng));
    const auto start = complete_state(*p.description, p.initial);
    const auto plan = plan_search(*p.description, avail, p.initial, p.goal, k);
    const auto brute = oracle::brute_force_best_timestamps(*p.description, avail, start, p.goal, k);
    REQUIRE(plan.has_value() == brute.has_value());
    if (plan) {
      CHECK(oracle::action_timestamps(*plan) == *brute);
      ++compared;
    }
  }
  CHECK(compared > 50);
}

TEST_CASE("property: solve agrees with the exhaustive oracle and plans validate") {
  auto rng = make_rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto rp = oracle::random_problem(rng);
    CHECK(oracle::check_against_oracle(rp, 1000 + static_cast<std::uint64_t>(trial)) == "");
  }
}

TEST_CASE("property: feasibility is monotone in the accumulated horizon") {
  auto rng = make_rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto rp = oracle::random_problem(rng);
    const auto& p = rp.problem;
    AvailabilitySample avail(p.states);
    bool feasible = false;
    for (int k = 1; k <= 12; ++k) {
      avail.add(sample_availability(p.policy, p.states, k, rng));
      const bool now = plan_search(*p.description, avail, p.initial, p.goal, k).has_value();
      if (feasible) CHECK(now);
      feasible = feasible || now;
    }
  }
}

TEST_CASE("property: identical seeds give identical plans") {
  auto rng = make_rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rp = oracle::random_problem(rng);
    auto r1 = make_rng(static_cast<std::uint64_t>(trial));
    auto r2 = make_rng(static_cast<std::uint64_t>(trial));
    CHECK(solve(rp.problem, rp.maxstamp, r1) == solve(rp.problem, rp.maxstamp, r2));
  }
}

TEST_CASE("transition cache matches apply") {
  ThreeGrid g;
  TransitionCache cache(g.d);
  const auto id = cache.intern(g.at(1));
  CHECK(cache.intern(g.at(1)) == id);
  CHECK(cache.state(cache.successor(id, g.right)) == g.at(2));
  CHECK(cache.state(cache.successor(id, g.left)) == g.at(1));
}

TEST_CASE("timestamped program dump lists the availability facts") {
  ThreeGrid g;
  AvailabilitySample avail(g.states);
  avail.add(g.fragment(1, {g.right, g.left, g.left}));
  const auto p = g.problem({});
  const auto text = dump_timestamped_program(*g.d, avail, p.initial, p.goal, 1);
  CHECK(text.find("moveright") != std::string::npos);
  CHECK(text.find("p(") != std::string::npos);
}
