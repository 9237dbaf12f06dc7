#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pacman/baselines.hpp"
#include "pacman/envs.hpp"
#include "pacman/feedback.hpp"

using namespace pacman;

namespace {

// Q* of the shaped MDP r'(s,a) = r(s,a) + w * f(s,a) by value iteration.
QTable q_iteration(const Environment& env, const std::function<double(StateId, std::size_t)>& shaping,
                   double gamma) {
  QTable q(env.num_states(), env.num_actions());
  const auto states = env.enumerate_states();
  for (int sweep = 0; sweep < 2000; ++sweep) {
    for (StateId s : states) {
      for (std::size_t a = 0; a < env.num_actions(); ++a) {
        const auto st = env.step(s, a);
        const double next = st.terminal ? 0.0 : q.max_value(st.next_state);
        q.set(s, a, st.reward + shaping(s, a) + gamma * next);
      }
    }
  }
  return q;
}

std::size_t argmax(const std::vector<double>& xs) {
  return static_cast<std::size_t>(std::max_element(xs.begin(), xs.end()) - xs.begin());
}

class PunishLeft final : public FeedbackSource {
 public:
  std::optional<int> feedback(int, int, StateId, std::size_t a) override {
    if (a == LineWorldEnv::moveleft) return -1;
    return std::nullopt;
  }
};

}  // namespace

TEST_CASE("ac-hf step is the shared actor-critic update") {
  const HyperParams hyper{0.4, 0.3, 0.9};
  PolicyTable p1(3, 2), p2(3, 2);
  ValueTable v1(3), v2(3);
  v1.set_value(1, 2.0);
  v2.set_value(1, 2.0);
  const TransitionSample sample{0, 1, -1.0, 1, false};
  const auto r1 = ac_hf_step(p1, v1, sample, 1, hyper);
  const auto r2 = actor_critic_update(p2, v2, sample, 1, hyper);
  CHECK(p1 == p2);
  CHECK(v1 == v2);
  CHECK(r1.advantage == r2.advantage);
  CHECK(p1.preference(0, 1) == doctest::Approx(0.3 * 0.5));
}

TEST_CASE("ac-hf without feedback is plain actor-critic") {
  LineWorldEnv env(5);
  const HyperParams hyper;
  AcHfLearner learner(env, hyper, make_rng(12));
  NoFeedback none;

  auto rng = make_rng(12);
  PolicyTable pi(env.num_states(), env.num_actions());
  ValueTable v(env.num_states());
  for (int ep = 0; ep < 30; ++ep) {
    learner.run_episode(ep, none);
    StateId s = env.reset();
    for (int step = 0; step < env.episode_cap(); ++step) {
      const std::size_t a = sample_categorical(pi.action_probs(s), rng);
      const auto st = env.step(s, a);
      actor_critic_update(pi, v, {s, a, st.reward, st.next_state, st.terminal}, std::nullopt, hyper);
      s = st.next_state;
      if (st.terminal) break;
    }
  }
  CHECK(learner.policy() == pi);
  CHECK(learner.values() == v);
}

TEST_CASE("ac-hf on the 2-state chain learns the optimal action") {
  LineWorldEnv env(3);
  AcHfLearner learner(env, HyperParams{}, make_rng(2));
  OracleFeedback oracle(build_scenario(env, Intent::helpful, FeedbackCase::ideal), make_rng(3));
  for (int ep = 0; ep < 500; ++ep) learner.run_episode(ep, oracle);
  // Value iteration on the chain: moving right is optimal in both non-terminal cells.
  const auto q = q_iteration(env, [](StateId, std::size_t) { return 0.0; }, 0.95);
  for (StateId s : env.enumerate_states()) {
    CHECK(argmax({q.get(s, 0), q.get(s, 1)}) == LineWorldEnv::moveright);
    CHECK(argmax(learner.action_probs(s)) == LineWorldEnv::moveright);
  }
}

TEST_CASE("tamer human model converges geometrically to constant feedback") {
  QTable q(2, 2);
  HumanModel h(2, 2);
  const ShapingWeights w;
  const HyperParams hyper;
  for (int n = 1; n <= 40; ++n) {
    tamer_rl_step(q, h, {0, 1, 0.0, 1, false}, 1, w, hyper);
    CHECK(std::abs(h.get(0, 1) - (1.0 - std::pow(1.0 - w.tamer_lr, n))) < 1e-12);
  }
  CHECK(h.get(0, 0) == 0.0);
  CHECK(h.get(1, 1) == 0.0);
}

TEST_CASE("no feedback: shaping reduces to Q-learning and both variants agree") {
  FourRoomsEnv env;
  NoFeedback none;
  ShapedQLearner tamer(ShapedQLearner::Kind::tamer_rl, env, HyperParams{}, ShapingWeights{}, 0.1, make_rng(6));
  ShapedQLearner bql(ShapedQLearner::Kind::bql_shaping, env, HyperParams{}, ShapingWeights{}, 0.1, make_rng(6));
  for (int ep = 0; ep < 50; ++ep) {
    const auto a = tamer.run_episode(ep, none);
    const auto b = bql.run_episode(ep, none);
    CHECK(a.total_return == b.total_return);
  }
  CHECK(tamer.q() == bql.q());
  CHECK(tamer.human_model() == HumanModel(env.num_states(), env.num_actions()));

  QTable plain(2, 2), shaped(2, 2);
  const HyperParams hyper;
  const TransitionSample sample{0, 1, -1.0, 1, false};
  q_learning_update(plain, sample, sample.reward, hyper);
  bql_shaping_step(shaped, sample, std::nullopt, ShapingWeights{}, hyper);
  CHECK(plain == shaped);
}

TEST_CASE("zero shaping weight ignores feedback") {
  ShapingWeights w;
  w.w_bql = 0.0;
  QTable a(2, 2), b(2, 2);
  const HyperParams hyper;
  const TransitionSample sample{0, 0, -1.0, 1, false};
  bql_shaping_step(a, sample, 1, w, hyper);
  bql_shaping_step(b, sample, std::nullopt, w, hyper);
  CHECK(a == b);
}

TEST_CASE("shaped learners match Q-iteration on the shaped 3-state toy") {
  LineWorldEnv env(4);
  const auto sc = build_scenario(env, Intent::misleading, FeedbackCase::ideal);
  const HyperParams hyper;
  auto f = [&](StateId s, std::size_t a) { return sc.preferred_at(s).count(a) ? 1.0 : -1.0; };
  const auto oracle_q = q_iteration(env, f, hyper.gamma);
  for (auto kind : {ShapedQLearner::Kind::bql_shaping, ShapedQLearner::Kind::tamer_rl}) {
    ShapedQLearner learner(kind, env, hyper, ShapingWeights{}, 0.3, make_rng(21));
    OracleFeedback oracle(sc, make_rng(22));
    for (int ep = 0; ep < 500; ++ep) learner.run_episode(ep, oracle);
    for (StateId s : env.enumerate_states()) {
      const std::vector<double> want{oracle_q.get(s, 0), oracle_q.get(s, 1)};
      const std::vector<double> got{learner.q().get(s, 0), learner.q().get(s, 1)};
      CHECK(argmax(got) == argmax(want));
      if (kind == ShapedQLearner::Kind::bql_shaping) {
        CHECK(std::abs(got[0] - want[0]) < 1e-3);
        CHECK(std::abs(got[1] - want[1]) < 1e-3);
      }
    }
  }
}

TEST_CASE("persistent punishment of moveleft makes moveright greedy on the 3-grid") {
  LineWorldEnv env(3);
  ShapedQLearner learner(ShapedQLearner::Kind::bql_shaping, env, HyperParams{}, ShapingWeights{}, 0.1, make_rng(1));
  PunishLeft punish;
  for (int ep = 0; ep < 200; ++ep) learner.run_episode(ep, punish);
  const auto oracle_q = q_iteration(
      env, [](StateId, std::size_t a) { return a == LineWorldEnv::moveleft ? -1.0 : 0.0; }, 0.95);
  for (StateId s : env.enumerate_states()) {
    CHECK(learner.q().get(s, LineWorldEnv::moveright) > learner.q().get(s, LineWorldEnv::moveleft));
    CHECK(oracle_q.get(s, LineWorldEnv::moveright) > oracle_q.get(s, LineWorldEnv::moveleft));
  }
}

TEST_CASE("epsilon-greedy distribution") {
  QTable q(1, 4);
  q.set(0, 2, 1.0);
  const auto p = epsilon_greedy_probs(q, 0, 0.1);
  CHECK(p[2] == doctest::Approx(0.925));
  CHECK(p[0] == doctest::Approx(0.025));
  auto rng = make_rng(10);
  int greedy = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) greedy += epsilon_greedy(q, 0, 0.1, rng) == 2;
  CHECK(std::abs(greedy / double(n) - 0.925) <= 0.02);

  QTable ties(1, 2);
  int first = 0;
  for (int i = 0; i < n; ++i) first += epsilon_greedy(ties, 0, 0.0, rng) == 0;
  CHECK(std::abs(first / double(n) - 0.5) <= 0.02);
}

TEST_CASE("weights validation and snapshots") {
  ShapingWeights w;
  CHECK_NOTHROW(w.validate());
  w.tamer_lr = 0.0;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  w = ShapingWeights{};
  w.w_tamer = -1.0;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);

  QTable q(3, 2);
  q.set(1, 1, -0.1);
  q.set(2, 0, 1e-300);
  std::stringstream ss;
  write_snapshot(ss, q, "q");
  CHECK(read_action_value_snapshot(ss, "q") == q);
}
