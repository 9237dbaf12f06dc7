#include <doctest.h>

#include <set>

#include "pacman/action_lang.hpp"
#include "pacman/envs.hpp"
#include "pacman/random.hpp"

using namespace pacman;

namespace {

const char* kThreeGrid =
    "fluent Loc : 1..3.\n"
    "action moveleft, moveright.\n"
    "moveleft causes Loc=L-1 if Loc=L.\n"
    "moveright causes Loc=L+1 if Loc=L.\n";

WorldState loc(const ActionDescription& d, int value) {
  return complete_state(d, std::vector<FluentAtom>{d.atom("Loc", std::to_string(value))});
}

// Random ground description over a few small fluents, with one derived boolean
// fluent fully determined by the first fluent through static laws.
ActionDescription random_description(Rng& rng) {
  ActionDescription d;
  const int nf = 1 + static_cast<int>(uniform01(rng) * 3);
  for (int f = 0; f < nf; ++f) {
    d.fluents.push_back(FluentDecl::integer("F" + std::to_string(f), 0, 1 + static_cast<int>(uniform01(rng) * 4)));
  }
  d.fluents.push_back(FluentDecl::boolean_fluent("Low"));
  const FluentId low = d.fluents.size() - 1;
  for (int v = 0; v < d.fluents[0].size(); ++v) {
    d.statics.push_back({{low, v == 0 ? 1 : 0}, {{0, v}}});
  }
  const int na = 1 + static_cast<int>(uniform01(rng) * 4);
  for (int a = 0; a < na; ++a) {
    d.actions.push_back("a" + std::to_string(a));
    const int nl = 1 + static_cast<int>(uniform01(rng) * 4);
    std::set<std::pair<FluentId, std::vector<FluentAtom>>> used;
    for (int l = 0; l < nl; ++l) {
      const FluentId f = static_cast<FluentId>(uniform01(rng) * nf);
      const FluentId g = static_cast<FluentId>(uniform01(rng) * nf);
      DynamicLaw law;
      law.action = static_cast<ActionId>(a);
      law.effect = {f, static_cast<int>(uniform01(rng) * d.fluents[f].size())};
      law.preconditions = {{g, static_cast<int>(uniform01(rng) * d.fluents[g].size())}};
      // One effect fluent per precondition keeps effects conflict-free.
      if (!used.insert({f, law.preconditions}).second) continue;
      bool clash = false;
      for (const auto& other : d.dynamics) {
        if (other.action == law.action && other.effect.fluent == f && other.effect != law.effect) clash = true;
      }
      if (!clash) d.dynamics.push_back(law);
    }
  }
  d.validate();
  return d;
}

}  // namespace

TEST_CASE("schematic moveright grounds one law per in-range successor") {
  const auto d = parse_action_description(kThreeGrid);
  const auto right = d.action("moveright");
  std::vector<DynamicLaw> laws;
  for (const auto& law : d.dynamics) {
    if (law.action == right) laws.push_back(law);
  }
  REQUIRE(laws.size() == 2);
  const auto loc_id = d.fluent("Loc");
  CHECK(laws[0].preconditions == std::vector<FluentAtom>{{loc_id, 0}});
  CHECK(laws[0].effect == FluentAtom{loc_id, 1});
  CHECK(laws[1].preconditions == std::vector<FluentAtom>{{loc_id, 1}});
  CHECK(laws[1].effect == FluentAtom{loc_id, 2});
}

TEST_CASE("empty input yields an empty description") {
  const auto d = parse_action_description("");
  CHECK(d.fluents.empty());
  CHECK(d.actions.empty());
  CHECK(d.statics.empty());
  CHECK(d.dynamics.empty());
  const auto only_signatures = parse_action_description("fluent A : bool.\naction go.\n");
  CHECK(only_signatures.fluents.size() == 1);
  CHECK(only_signatures.dynamics.empty());
}

TEST_CASE("pickup law grounds with two preconditions per location") {
  const auto d = parse_action_description(
      "fluent TaxiLoc : 0..2.\nfluent PassLoc : 0..2.\nfluent InTaxi : bool.\naction pickup.\n"
      "pickup causes InTaxi if TaxiLoc=P, PassLoc=P.\n");
  REQUIRE(d.dynamics.size() == 3);
  const auto taxi = d.fluent("TaxiLoc");
  const auto pass = d.fluent("PassLoc");
  std::set<int> locations;
  for (const auto& law : d.dynamics) {
    CHECK(law.effect == d.atom("InTaxi", "true"));
    REQUIRE(law.preconditions.size() == 2);
    CHECK(law.preconditions[0].fluent == taxi);
    CHECK(law.preconditions[1].fluent == pass);
    CHECK(law.preconditions[0].value == law.preconditions[1].value);
    locations.insert(law.preconditions[0].value);
  }
  CHECK(locations == std::set<int>{0, 1, 2});
}

TEST_CASE("closure examples") {
  const auto d = parse_action_description(
      "fluent A : bool.\nfluent B : bool.\nfluent C : bool.\nB if A.\nC if B.\n");
  const FluentAtom a = d.atom("A", "true"), b = d.atom("B", "true"), c = d.atom("C", "true");
  const std::vector<FluentAtom> input{a};

  SUBCASE("no statics is the identity") {
    CHECK(closure(input, {}) == input);
  }
  SUBCASE("single forward application") {
    const std::vector<StaticLaw> one{d.statics[0]};
    CHECK(closure(input, one) == std::vector<FluentAtom>{a, b});
  }
  SUBCASE("chained statics reach the fixpoint") {
    CHECK(closure(input, d.statics) == std::vector<FluentAtom>{a, b, c});
  }
  SUBCASE("inconsistent closure throws") {
    const std::vector<FluentAtom> clash{a, d.atom("B", "false")};
    CHECK_THROWS_AS(closure(clash, d.statics), SemanticError);
  }
}

TEST_CASE("apply examples") {
  const auto d = parse_action_description(kThreeGrid);
  CHECK(apply(loc(d, 1), d.action("moveright"), d) == loc(d, 2));
  CHECK(apply(loc(d, 3), d.action("moveright"), d) == loc(d, 3));
  CHECK(apply(loc(d, 1), d.action("moveleft"), d) == loc(d, 1));

  SUBCASE("conflicting effects are an error") {
    const auto bad = parse_action_description(
        "fluent A : 0..2.\naction go.\ngo causes A=1 if A=0.\ngo causes A=2 if A=0.\n");
    const auto s = complete_state(bad, std::vector<FluentAtom>{bad.atom("A", "0")});
    CHECK_THROWS_AS(apply(s, bad.action("go"), bad), SemanticError);
  }
}

TEST_CASE("taxi pickup away from the passenger leaves the state unchanged, as the env does") {
  TaxiEnv env;
  const auto d = env.to_action_description();
  const auto& inst = env.instance();
  const Cell pass = inst.passenger_cell();
  for (int r = 0; r < inst.rows; ++r) {
    for (int c = 0; c < inst.cols; ++c) {
      const Cell here{r, c};
      if (here == pass) continue;
      const StateId s = env.id(here, TaxiEnv::Passenger::waiting);
      const auto w = env.to_world(s);
      const auto next = apply(w, TaxiEnv::pickup, *d);
      CHECK(next == w);
      const auto step = env.step(s, TaxiEnv::pickup);
      CHECK(step.next_state == s);
      CHECK(step.improper);
    }
  }
}

TEST_CASE("every exported pickup law requires the taxi at the passenger") {
  TaxiEnv env;
  const auto d = env.to_action_description();
  const auto taxi = d->fluent("TaxiLoc");
  const auto pass = d->fluent("PassLoc");
  int count = 0;
  for (const auto& law : d->dynamics) {
    if (law.action != TaxiEnv::pickup) continue;
    ++count;
    std::optional<int> t, p;
    for (const auto& pre : law.preconditions) {
      if (pre.fluent == taxi) t = pre.value;
      if (pre.fluent == pass) p = pre.value;
    }
    REQUIRE(t.has_value());
    REQUIRE(p.has_value());
    CHECK(*t == *p);
  }
  CHECK(count > 0);
}

TEST_CASE("parse errors carry positions") {
  SUBCASE("syntax") {
    try {
      parse_action_description("fluent A : bool.\naction go\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() >= 1);
    }
  }
  SUBCASE("undeclared fluent") {
    CHECK_THROWS_AS(parse_action_description("fluent A : bool.\naction go.\ngo causes B.\n"), ParseError);
  }
  SUBCASE("out of domain value") {
    CHECK_THROWS_AS(parse_action_description("fluent A : 0..2.\naction go.\ngo causes A=7.\n"), ParseError);
  }
  SUBCASE("undeclared action") {
    CHECK_THROWS_AS(parse_action_description("fluent A : bool.\njump causes A.\n"), ParseError);
  }
}

TEST_CASE("complete_state rejects partial assignments") {
  const auto d = parse_action_description("fluent A : bool.\nfluent B : bool.\n");
  CHECK_THROWS_AS(complete_state(d, std::vector<FluentAtom>{d.atom("A", "true")}), SemanticError);
}

TEST_CASE("property: closure idempotent, apply total and inertial, printing round-trips") {
  auto rng = make_rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = random_description(rng);
    CHECK(parse_action_description(to_text(d)) == d);

    std::vector<FluentAtom> base;
    for (FluentId f = 0; f + 1 < d.fluents.size(); ++f) {
      base.push_back({f, static_cast<int>(uniform01(rng) * d.fluents[f].size())});
    }
    const auto once = closure(base, d.statics);
    CHECK(closure(once, d.statics) == once);

    const auto s = complete_state(d, base);
    CHECK(is_closed(s, d.statics));
    for (ActionId a = 0; a < d.actions.size(); ++a) {
      const auto next = apply(s, a, d);
      REQUIRE(next.values.size() == d.fluents.size());
      for (FluentId f = 0; f < d.fluents.size(); ++f) {
        CHECK(next.values[f] >= 0);
        CHECK(next.values[f] < d.fluents[f].size());
      }
      CHECK(is_closed(next, d.statics));
      std::set<FluentId> touched;
      for (const auto& law : d.dynamics) {
        if (law.action == a && s.holds_all(law.preconditions)) touched.insert(law.effect.fluent);
      }
      // Only the derived fluent (last) is forced by statics.
      for (FluentId f = 0; f + 1 < d.fluents.size(); ++f) {
        if (!touched.count(f)) CHECK(next.values[f] == s.values[f]);
      }
    }
  }
}

TEST_CASE("environment descriptions round-trip through text") {
  for (const char* id : {"fourrooms", "taxi", "line"}) {
    const auto env = make_environment(id);
    const auto& d = *env->to_action_description();
    CHECK(parse_action_description(to_text(d)) == d);
  }
}

TEST_CASE("reachable_states on the 3-grid") {
  const auto d = parse_action_description(kThreeGrid);
  const auto states = reachable_states(d, loc(d, 1));
  CHECK(states.size() == 3);
  CHECK(state_to_string(d, loc(d, 2)) == "{Loc=2}");
  CHECK(parse_condition(d, "Loc=3") == std::vector<FluentAtom>{d.atom("Loc", "3")});
}
