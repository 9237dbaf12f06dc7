#include <doctest.h>

#include <fstream>
#include <sstream>

#include "pacman/envs.hpp"
#include "pacman/feedback.hpp"

using namespace pacman;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Counts {
  int given = 0;
  int positive = 0;
};

// Queries the oracle n times at a preferred (state, action) pair.
Counts query_preferred(FeedbackCase fcase, int n, std::uint64_t seed) {
  FourRoomsEnv env;
  const auto sc = build_scenario(env, Intent::helpful, fcase);
  const StateId s = env.reset();
  const std::size_t a = *sc.preferred_at(s).begin();
  auto rng = make_rng(seed);
  Counts c;
  for (int i = 0; i < n; ++i) {
    if (auto f = oracle_feedback(sc, s, a, rng)) {
      ++c.given;
      c.positive += *f == 1;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("case parameters and names") {
  CHECK(case_params(FeedbackCase::ideal).p_give == 1.0);
  CHECK(case_params(FeedbackCase::ideal).p_flip == 0.0);
  CHECK(case_params(FeedbackCase::infrequent).p_give == 0.5);
  CHECK(case_params(FeedbackCase::inconsistent).p_flip == 0.3);
  CHECK(case_params(FeedbackCase::infrequent_inconsistent).p_give == 0.5);
  CHECK(case_params(FeedbackCase::infrequent_inconsistent).p_flip == 0.3);
  for (auto c : {FeedbackCase::ideal, FeedbackCase::infrequent, FeedbackCase::inconsistent,
                 FeedbackCase::infrequent_inconsistent}) {
    CHECK(parse_feedback_case(to_string(c)) == c);
    CHECK(case_from_params(case_params(c).p_give, case_params(c).p_flip) == c);
  }
  CHECK(parse_intent("misleading") == Intent::misleading);
  CHECK_THROWS_AS(parse_intent("rude"), std::invalid_argument);
  CHECK_THROWS_AS(case_from_params(0.7, 0.0), std::invalid_argument);
}

TEST_CASE("ideal case always approves a preferred action and disapproves others") {
  FourRoomsEnv env;
  const auto sc = build_scenario(env, Intent::helpful, FeedbackCase::ideal);
  auto rng = make_rng(1);
  for (StateId s : env.enumerate_states()) {
    for (std::size_t a = 0; a < env.num_actions(); ++a) {
      CHECK(oracle_feedback(sc, s, a, rng) == (sc.preferred_at(s).count(a) ? 1 : -1));
    }
  }
}

TEST_CASE("oracle frequencies match the case parameters") {
  const int n = 10000;
  const auto infrequent = query_preferred(FeedbackCase::infrequent, n, 3);
  CHECK(std::abs(infrequent.given / double(n) - 0.5) <= 0.02);
  const auto inconsistent = query_preferred(FeedbackCase::inconsistent, n, 4);
  CHECK(inconsistent.given == n);
  CHECK(std::abs(inconsistent.positive / double(n) - 0.7) <= 0.02);
  CHECK(std::abs((n - inconsistent.positive) / double(n) - 0.3) <= 0.02);
}

TEST_CASE("seeded oracles reproduce their trace") {
  CHECK(query_preferred(FeedbackCase::infrequent_inconsistent, 500, 9).given ==
        query_preferred(FeedbackCase::infrequent_inconsistent, 500, 9).given);
  FourRoomsEnv env;
  const auto sc = build_scenario(env, Intent::helpful, FeedbackCase::infrequent_inconsistent);
  OracleFeedback a(sc, make_rng(5)), b(sc, make_rng(5));
  for (int i = 0; i < 200; ++i) CHECK(a.feedback(0, i, env.reset(), i % 4) == b.feedback(0, i, env.reset(), i % 4));
}

TEST_CASE("four rooms scenario examples") {
  FourRoomsEnv env;
  const auto helpful = build_scenario(env, Intent::helpful, FeedbackCase::ideal);
  const auto misleading = build_scenario(env, Intent::misleading, FeedbackCase::ideal);
  CHECK(helpful.preferred_at(env.id({1, 9})).count(FourRoomsEnv::up));
  CHECK(helpful.preferred_at(env.id({0, 8})).count(FourRoomsEnv::right));
  CHECK(misleading.preferred_at(env.id({2, 7})) == std::set<std::size_t>{FourRoomsEnv::down});
  for (StateId s : env.enumerate_states()) {
    for (std::size_t a : helpful.preferred_at(s)) CHECK_FALSE(env.layout().is_danger(env.move(env.cell(s), a)));
    bool next_to_danger = false;
    for (std::size_t a = 0; a < 4; ++a) next_to_danger |= env.layout().is_danger(env.move(env.cell(s), a));
    if (next_to_danger) {
      for (std::size_t a : misleading.preferred_at(s)) CHECK(env.layout().is_danger(env.move(env.cell(s), a)));
    }
  }
}

TEST_CASE("taxi misleading scenario prefers pickup at the wrong location") {
  TaxiEnv env;
  const Cell wrong = *env.instance().wrong_location;
  CHECK(wrong != env.instance().passenger_cell());
  const auto sc = build_scenario(env, Intent::misleading, FeedbackCase::ideal);
  CHECK(sc.preferred_at(env.id(wrong, TaxiEnv::Passenger::waiting)) == std::set<std::size_t>{TaxiEnv::pickup});
  const auto helpful = build_scenario(env, Intent::helpful, FeedbackCase::ideal);
  CHECK(helpful.preferred_at(env.id(env.instance().passenger_cell(), TaxiEnv::Passenger::waiting))
            .count(TaxiEnv::pickup));
}

TEST_CASE("scenario maps are total and round-trip through text") {
  for (const char* id : {"fourrooms", "taxi", "line"}) {
    const auto env = make_environment(id);
    for (auto intent : {Intent::helpful, Intent::misleading}) {
      const auto sc = build_scenario(*env, intent, FeedbackCase::infrequent);
      CHECK_NOTHROW(sc.validate(*env));
      for (StateId s : env->enumerate_states()) CHECK_FALSE(sc.preferred_at(s).empty());
      const auto back = parse_scenario(scenario_to_text(sc, *env), *env);
      CHECK(back.preferred == sc.preferred);
      CHECK(back.intent == sc.intent);
      CHECK(back.fcase == sc.fcase);
    }
  }
}

TEST_CASE("shipped scenario files match the built-in defaults") {
  for (const char* env_id : {"fourrooms", "taxi"}) {
    const auto env = make_environment(env_id);
    for (auto intent : {Intent::helpful, Intent::misleading}) {
      const std::string path =
          std::string(PACMAN_SOURCE_DIR "/data/scenarios/") + env_id + "_" + to_string(intent) + ".scenario";
      const auto sc = parse_scenario(read_file(path), *env);
      CHECK(sc.preferred == build_scenario(*env, intent, FeedbackCase::ideal).preferred);
    }
  }
}

TEST_CASE("scenario parse errors") {
  FourRoomsEnv env;
  CHECK_THROWS(parse_scenario("intent helpful\nprefer 99,99 up\n", env));
  CHECK_THROWS(parse_scenario("intent helpful\nprefer 5,2 jump\n", env));
  CHECK_THROWS(parse_scenario("intent helpful\np_give 0.7\n", env));
  // Not total over the reachable states.
  CHECK_THROWS(parse_scenario("intent helpful\nprefer 5,2 up\n", env));
}

TEST_CASE("live channel attribution") {
  LiveFeedbackChannel ch(1.0);

  SUBCASE("no clicks yields nothing") {
    ch.mark_displayed(0, 1, 10.0);
    CHECK_FALSE(ch.poll(0, 1).has_value());
  }
  SUBCASE("click 300 ms after display is attributed to that step") {
    ch.mark_displayed(0, 4, 10.0);
    const auto r = ch.submit(1, 10.3);
    CHECK(r.status == LiveFeedbackChannel::SubmitStatus::accepted);
    CHECK(r.step == 4);
    const auto ev = ch.poll(0, 4);
    REQUIRE(ev.has_value());
    CHECK(ev->value == 1);
    CHECK_FALSE(ch.poll(0, 4).has_value());
    CHECK(ch.accepted_count() == 1);
  }
  SUBCASE("click 2 s after display is dropped and counted") {
    ch.mark_displayed(0, 4, 10.0);
    CHECK(ch.submit(1, 12.0).status == LiveFeedbackChannel::SubmitStatus::dropped_late);
    CHECK(ch.dropped_count() == 1);
    CHECK_FALSE(ch.poll(0, 4).has_value());
  }
  SUBCASE("last writer wins within one window") {
    ch.mark_displayed(1, 2, 0.0);
    ch.submit(1, 0.2);
    ch.submit(-1, 0.6);
    CHECK(ch.poll(1, 2)->value == -1);
  }
  SUBCASE("clicks before any step are dropped") {
    CHECK(ch.submit(-1, 0.0).status == LiveFeedbackChannel::SubmitStatus::dropped_no_step);
    CHECK(ch.dropped_count() == 1);
  }
  SUBCASE("a newer display takes over attribution") {
    ch.mark_displayed(0, 1, 0.0);
    ch.mark_displayed(0, 2, 0.5);
    CHECK(ch.submit(1, 0.7).step == 2);
    CHECK_FALSE(ch.poll(0, 1).has_value());
    CHECK(ch.poll(0, 2).has_value());
  }
  SUBCASE("values other than +/-1 are rejected, closed channels refuse") {
    CHECK_THROWS_AS(ch.submit(2, 0.0), std::invalid_argument);
    ch.close();
    CHECK(ch.submit(1, 0.0).status == LiveFeedbackChannel::SubmitStatus::closed);
    CHECK_THROWS_AS(ch.poll(0, 0), std::runtime_error);
  }
}

TEST_CASE("live feedback source reads the channel") {
  LiveFeedbackChannel ch(1.0);
  LiveFeedback live(ch);
  ch.mark_displayed(3, 7, 1.0);
  ch.submit(-1, 1.5);
  CHECK(live.feedback(3, 7, 0, 0) == -1);
  CHECK_FALSE(live.feedback(3, 8, 0, 0).has_value());
}
