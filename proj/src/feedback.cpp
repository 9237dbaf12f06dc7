#include "pacman/feedback.hpp"

#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pacman/text_util.hpp"

namespace pacman {

std::string to_string(Intent intent) { return intent == Intent::helpful ? "helpful" : "misleading"; }

std::string to_string(FeedbackCase fcase) {
  switch (fcase) {
    case FeedbackCase::ideal: return "ideal";
    case FeedbackCase::infrequent: return "infrequent";
    case FeedbackCase::inconsistent: return "inconsistent";
    case FeedbackCase::infrequent_inconsistent: return "infrequent_inconsistent";
  }
  throw std::logic_error("unknown feedback case");
}

Intent parse_intent(std::string_view text) {
  if (text == "helpful") return Intent::helpful;
  if (text == "misleading") return Intent::misleading;
  throw std::invalid_argument("unknown intent '" + std::string(text) + "'");
}

FeedbackCase parse_feedback_case(std::string_view text) {
  for (auto c : {FeedbackCase::ideal, FeedbackCase::infrequent, FeedbackCase::inconsistent,
                 FeedbackCase::infrequent_inconsistent}) {
    if (text == to_string(c)) return c;
  }
  throw std::invalid_argument("unknown feedback case '" + std::string(text) + "'");
}

CaseParams case_params(FeedbackCase fcase) {
  switch (fcase) {
    case FeedbackCase::ideal: return {1.0, 0.0};
    case FeedbackCase::infrequent: return {0.5, 0.0};
    case FeedbackCase::inconsistent: return {1.0, 0.3};
    case FeedbackCase::infrequent_inconsistent: return {0.5, 0.3};
  }
  throw std::logic_error("unknown feedback case");
}

FeedbackCase case_from_params(double p_give, double p_flip) {
  for (auto c : {FeedbackCase::ideal, FeedbackCase::infrequent, FeedbackCase::inconsistent,
                 FeedbackCase::infrequent_inconsistent}) {
    const CaseParams p = case_params(c);
    if (p.p_give == p_give && p.p_flip == p_flip) return c;
  }
  throw std::invalid_argument("(p_give, p_flip) = (" + format_double(p_give) + ", " + format_double(p_flip) +
                              ") is not one of the feedback cases");
}

void FeedbackScenario::set_case(FeedbackCase c) {
  fcase = c;
  const CaseParams p = case_params(c);
  p_give = p.p_give;
  p_flip = p.p_flip;
}

const std::set<std::size_t>& FeedbackScenario::preferred_at(StateId s) const {
  auto it = preferred.find(s);
  if (it == preferred.end()) throw std::out_of_range("scenario does not cover state " + std::to_string(s));
  return it->second;
}

void FeedbackScenario::validate(const Environment& env) const {
  if (case_from_params(p_give, p_flip) != fcase) throw std::invalid_argument("scenario: case does not match p_give/p_flip");
  for (const auto& [s, actions] : preferred) {
    if (!env.is_valid(s)) throw std::invalid_argument("scenario: invalid state id " + std::to_string(s));
    if (actions.empty()) throw std::invalid_argument("scenario: no preferred action at " + env.state_label(s));
    for (auto a : actions) {
      if (a >= env.num_actions()) throw std::invalid_argument("scenario: unknown action id " + std::to_string(a));
    }
  }
  for (StateId s : env.enumerate_states()) {
    if (!covers(s)) throw std::invalid_argument("scenario: state " + env.state_label(s) + " is not covered");
  }
}

std::optional<int> oracle_feedback(const FeedbackScenario& scenario, StateId s, std::size_t a, Rng& rng) {
  const auto& preferred = scenario.preferred_at(s);
  const double u_give = uniform01(rng);
  const double u_flip = uniform01(rng);
  if (u_give >= scenario.p_give) return std::nullopt;
  int f = preferred.count(a) ? 1 : -1;
  if (u_flip < scenario.p_flip) f = -f;
  return f;
}

// ---------------------------------------------------------------------------

namespace {

// Lexicographic (steps, penalty) cost-to-go over grid cells.
using Cost = std::pair<int, int>;
constexpr Cost kInfinite{std::numeric_limits<int>::max() / 2, 0};

struct GridGraph {
  int num_cells = 0;
  std::size_t num_moves = 0;
  // Successor cell index, or -1 when the move is not allowed.
  std::function<int(int cell, std::size_t move)> successor;
  std::function<int(int cell)> penalty;  // paid on entering the cell
};

std::vector<Cost> cost_to_go(const GridGraph& g, const std::set<int>& targets) {
  std::vector<Cost> cost(static_cast<std::size_t>(g.num_cells), kInfinite);
  for (int t : targets) cost[static_cast<std::size_t>(t)] = {0, 0};
  for (bool changed = true; changed;) {
    changed = false;
    for (int c = 0; c < g.num_cells; ++c) {
      if (targets.count(c)) continue;
      for (std::size_t m = 0; m < g.num_moves; ++m) {
        const int n = g.successor(c, m);
        if (n < 0 || n == c || cost[static_cast<std::size_t>(n)] == kInfinite) continue;
        const Cost via{cost[static_cast<std::size_t>(n)].first + 1,
                       cost[static_cast<std::size_t>(n)].second + g.penalty(n)};
        if (via < cost[static_cast<std::size_t>(c)]) {
          cost[static_cast<std::size_t>(c)] = via;
          changed = true;
        }
      }
    }
  }
  return cost;
}

std::set<std::size_t> best_moves(const GridGraph& g, const std::vector<Cost>& cost, int cell) {
  std::set<std::size_t> out;
  if (cost[static_cast<std::size_t>(cell)] == kInfinite) return out;
  for (std::size_t m = 0; m < g.num_moves; ++m) {
    const int n = g.successor(cell, m);
    if (n < 0 || n == cell || cost[static_cast<std::size_t>(n)] == kInfinite) continue;
    const Cost via{cost[static_cast<std::size_t>(n)].first + 1,
                   cost[static_cast<std::size_t>(n)].second + g.penalty(n)};
    if (via == cost[static_cast<std::size_t>(cell)]) out.insert(m);
  }
  return out;
}

FeedbackScenario four_rooms_scenario(const FourRoomsEnv& env, Intent intent) {
  const auto& layout = env.layout();
  auto index = [&](Cell c) { return c.row * layout.cols + c.col; };
  auto cell_of = [&](int i) { return Cell{i / layout.cols, i % layout.cols}; };
  auto danger_adjacent = [&](Cell c) {
    for (std::size_t m = 0; m < 4; ++m) {
      if (layout.is_danger(FourRoomsEnv::neighbor(c, m))) return true;
    }
    return false;
  };

  GridGraph g;
  g.num_cells = layout.rows * layout.cols;
  g.num_moves = 4;
  const bool avoid_danger = intent == Intent::helpful;
  g.successor = [&](int i, std::size_t m) {
    const Cell c = cell_of(i);
    if (layout.is_wall(c)) return -1;
    const Cell n = env.move(c, m);
    if (avoid_danger && layout.is_danger(n)) return -1;
    return index(n);
  };
  g.penalty = [&](int i) { return avoid_danger && danger_adjacent(cell_of(i)) ? 1 : 0; };
  const auto cost = cost_to_go(g, {index(layout.goal)});

  FeedbackScenario sc;
  sc.intent = intent;
  for (StateId s : env.enumerate_states()) {
    const Cell c = env.cell(s);
    std::set<std::size_t> prefer;
    if (intent == Intent::misleading) {
      for (std::size_t m = 0; m < 4; ++m) {
        if (layout.is_danger(env.move(c, m))) prefer.insert(m);
      }
    }
    if (prefer.empty()) prefer = best_moves(g, cost, index(c));
    if (prefer.empty()) throw std::runtime_error("fourrooms scenario: goal unreachable from " + env.state_label(s));
    sc.preferred[s] = std::move(prefer);
  }
  return sc;
}

FeedbackScenario taxi_scenario(const TaxiEnv& env, Intent intent) {
  const auto& inst = env.instance();
  auto index = [&](Cell c) { return c.row * inst.cols + c.col; };
  auto cell_of = [&](int i) { return Cell{i / inst.cols, i % inst.cols}; };

  GridGraph g;
  g.num_cells = inst.rows * inst.cols;
  g.num_moves = 4;  // north, south, east, west share ids with TaxiEnv::Action
  g.successor = [&](int i, std::size_t m) { return index(env.move(cell_of(i), m)); };
  const bool avoid_traffic = intent == Intent::helpful;
  g.penalty = [&](int i) { return avoid_traffic && inst.traffic.count(cell_of(i)) ? 1 : 0; };

  const Cell pass = inst.passenger_cell();
  const Cell dest = inst.destination_cell();
  const auto to_passenger = cost_to_go(g, {index(pass)});
  const auto to_destination = cost_to_go(g, {index(dest)});

  FeedbackScenario sc;
  sc.intent = intent;
  for (StateId s : env.enumerate_states()) {
    const Cell c = env.taxi_cell(s);
    std::set<std::size_t> prefer;
    if (env.passenger(s) == TaxiEnv::Passenger::waiting) {
      const bool lured = intent == Intent::misleading && inst.wrong_location && c == *inst.wrong_location;
      if (c == pass || lured) {
        prefer = {TaxiEnv::pickup};
      } else {
        prefer = best_moves(g, to_passenger, index(c));
      }
    } else {
      prefer = c == dest ? std::set<std::size_t>{TaxiEnv::dropoff} : best_moves(g, to_destination, index(c));
    }
    if (prefer.empty()) throw std::runtime_error("taxi scenario: no route from " + env.state_label(s));
    sc.preferred[s] = std::move(prefer);
  }
  return sc;
}

}  // namespace

FeedbackScenario build_scenario(const Environment& env, Intent intent, FeedbackCase fcase) {
  FeedbackScenario sc;
  if (const auto* fr = dynamic_cast<const FourRoomsEnv*>(&env)) {
    sc = four_rooms_scenario(*fr, intent);
  } else if (const auto* taxi = dynamic_cast<const TaxiEnv*>(&env)) {
    sc = taxi_scenario(*taxi, intent);
  } else if (dynamic_cast<const LineWorldEnv*>(&env)) {
    sc.intent = intent;
    const std::size_t a = intent == Intent::helpful ? LineWorldEnv::moveright : LineWorldEnv::moveleft;
    for (StateId s : env.enumerate_states()) sc.preferred[s] = {a};
  } else {
    throw std::invalid_argument("no default scenario for environment '" + env.name() + "'");
  }
  sc.set_case(fcase);
  return sc;
}

FeedbackScenario parse_scenario(std::string_view text, const Environment& env) {
  FeedbackScenario sc;
  std::optional<double> p_give, p_flip;
  bool have_intent = false;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line(trim(std::string_view(raw).substr(0, raw.find('%'))));
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string key;
    in >> key;
    auto fail = [&](const std::string& what) {
      return std::invalid_argument("scenario line " + std::to_string(line_no) + ": " + what);
    };
    std::string a, b, extra;
    in >> a >> b >> extra;
    if (key == "intent") {
      if (a.empty() || !b.empty()) throw fail("expected 'intent <helpful|misleading>'");
      sc.intent = parse_intent(a);
      have_intent = true;
    } else if (key == "p_give" || key == "p_flip") {
      if (a.empty() || !b.empty()) throw fail("expected '" + key + " <probability>'");
      (key == "p_give" ? p_give : p_flip) = parse_double(a);
    } else if (key == "prefer") {
      if (b.empty() || !extra.empty()) throw fail("expected 'prefer <state> <action>'");
      const auto s = env.parse_state_label(a);
      if (!s) throw fail("unknown state '" + a + "'");
      const auto act = env.find_action(b);
      if (!act) throw fail("unknown action '" + b + "'");
      sc.preferred[*s].insert(*act);
    } else {
      throw fail("unknown key '" + key + "'");
    }
  }
  if (!have_intent || !p_give || !p_flip) throw std::invalid_argument("scenario: missing intent/p_give/p_flip header");
  sc.set_case(case_from_params(*p_give, *p_flip));
  sc.validate(env);
  return sc;
}

std::string scenario_to_text(const FeedbackScenario& scenario, const Environment& env) {
  std::ostringstream out;
  out << "intent " << to_string(scenario.intent) << '\n';
  out << "p_give " << format_double(scenario.p_give) << '\n';
  out << "p_flip " << format_double(scenario.p_flip) << '\n';
  for (const auto& [s, actions] : scenario.preferred) {
    for (auto a : actions) out << "prefer " << env.state_label(s) << ' ' << env.action_names().at(a) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

std::optional<int> OracleFeedback::feedback(int, int, StateId state, std::size_t action) {
  return oracle_feedback(scenario_, state, action, rng_);
}

LiveFeedbackChannel::LiveFeedbackChannel(double window_seconds) : window_(window_seconds) {
  if (!(window_seconds > 0.0)) throw std::invalid_argument("attribution window must be > 0");
}

void LiveFeedbackChannel::mark_displayed(int episode, int step, double time) {
  std::lock_guard lock(mutex_);
  displayed_ = std::pair{episode, step};
  displayed_time_ = time;
}

std::optional<FeedbackEvent> LiveFeedbackChannel::poll(int episode, int step) {
  std::lock_guard lock(mutex_);
  if (closed_) throw std::runtime_error("feedback channel closed");
  auto it = pending_.find({episode, step});
  if (it == pending_.end()) return std::nullopt;
  FeedbackEvent ev{it->second, episode, step};
  pending_.erase(pending_.begin(), std::next(it));
  return ev;
}

LiveFeedbackChannel::SubmitResult LiveFeedbackChannel::submit(int value, double time) {
  if (value != 1 && value != -1) throw std::invalid_argument("feedback value must be +1 or -1");
  std::lock_guard lock(mutex_);
  SubmitResult r;
  if (closed_) {
    r.status = SubmitStatus::closed;
    return r;
  }
  if (!displayed_) {
    r.status = SubmitStatus::dropped_no_step;
    ++dropped_;
    return r;
  }
  r.episode = displayed_->first;
  r.step = displayed_->second;
  if (time - displayed_time_ > window_) {
    r.status = SubmitStatus::dropped_late;
    ++dropped_;
    return r;
  }
  pending_[{r.episode, r.step}] = value;
  ++accepted_;
  return r;
}

void LiveFeedbackChannel::close() {
  std::lock_guard lock(mutex_);
  closed_ = true;
}

bool LiveFeedbackChannel::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::size_t LiveFeedbackChannel::accepted_count() const {
  std::lock_guard lock(mutex_);
  return accepted_;
}

std::size_t LiveFeedbackChannel::dropped_count() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

std::optional<int> LiveFeedback::feedback(int episode, int step, StateId, std::size_t) {
  auto ev = channel_.poll(episode, step);
  if (!ev) return std::nullopt;
  return ev->value;
}

}  // namespace pacman
