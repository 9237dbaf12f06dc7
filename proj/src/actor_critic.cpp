#include "pacman/actor_critic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pacman/text_util.hpp"

namespace pacman {

void HyperParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in [0, 1)");
}

PolicyTable::PolicyTable(std::size_t num_states, std::size_t num_actions)
    : num_states_(num_states), num_actions_(num_actions), theta_(num_states * num_actions, 0.0) {
  if (num_actions == 0) throw std::invalid_argument("PolicyTable: no actions");
}

std::size_t PolicyTable::index(StateId s, std::size_t a) const {
  if (s >= num_states_) throw std::out_of_range("PolicyTable: unknown state " + std::to_string(s));
  if (a >= num_actions_) throw std::out_of_range("PolicyTable: unknown action " + std::to_string(a));
  return s * num_actions_ + a;
}

std::span<const double> PolicyTable::preferences(StateId s) const {
  return std::span<const double>(theta_).subspan(index(s, 0), num_actions_);
}

std::vector<double> PolicyTable::action_probs(StateId s) const {
  auto prefs = preferences(s);
  const double top = *std::max_element(prefs.begin(), prefs.end());
  std::vector<double> p(num_actions_);
  double z = 0.0;
  for (std::size_t a = 0; a < num_actions_; ++a) {
    p[a] = std::exp(prefs[a] - top);
    z += p[a];
  }
  for (double& x : p) x /= z;
  return p;
}

std::vector<double> PolicyTable::grad_log_policy(StateId s, std::size_t a) const {
  std::vector<double> g = action_probs(s);
  for (double& x : g) x = -x;
  g.at(a) += 1.0;
  return g;
}

void PolicyTable::update(StateId s, std::size_t a, double advantage, double beta) {
  if (!std::isfinite(advantage)) throw std::invalid_argument("PolicyTable::update: non-finite advantage");
  const std::vector<double> g = grad_log_policy(s, a);
  const std::size_t base = index(s, 0);
  for (std::size_t b = 0; b < num_actions_; ++b) theta_[base + b] += beta * advantage * g[b];
}

ValueTable::ValueTable(std::size_t num_states) : v_(num_states, 0.0) {}

void ValueTable::update(StateId s, double delta, double alpha) { v_.at(s) += alpha * delta; }

double td_error(const TransitionSample& sample, const ValueTable& values, double gamma) {
  const double bootstrap = sample.terminal ? 0.0 : gamma * values.value(sample.next_state);
  return sample.reward + bootstrap - values.value(sample.state);
}

UpdateRecord actor_critic_update(PolicyTable& policy, ValueTable& values,
                                 const TransitionSample& sample, std::optional<int> feedback,
                                 const HyperParams& hyper) {
  UpdateRecord rec;
  rec.td_error = td_error(sample, values, hyper.gamma);
  values.update(sample.state, rec.td_error, hyper.alpha);
  rec.used_feedback = feedback.has_value();
  rec.advantage = feedback ? static_cast<double>(*feedback) : rec.td_error;
  policy.update(sample.state, sample.action, rec.advantage, hyper.beta);
  return rec;
}

void write_snapshot(std::ostream& out, const PolicyTable& policy) {
  out << "# policy " << policy.num_states() << ' ' << policy.num_actions() << '\n';
  for (StateId s = 0; s < policy.num_states(); ++s) {
    for (std::size_t a = 0; a < policy.num_actions(); ++a) {
      out << s << ' ' << a << ' ' << format_double(policy.preference(s, a)) << '\n';
    }
  }
}

void write_snapshot(std::ostream& out, const ValueTable& values) {
  out << "# values " << values.num_states() << '\n';
  for (StateId s = 0; s < values.num_states(); ++s) {
    out << s << " - " << format_double(values.value(s)) << '\n';
  }
}

namespace {

std::vector<std::string> read_header(std::istream& in, const std::string& kind) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream hs(line);
    std::string hash, k;
    hs >> hash >> k;
    if (hash != "#" || k != kind) throw std::runtime_error("snapshot: expected '# " + kind + "' header");
    std::vector<std::string> rest;
    std::string w;
    while (hs >> w) rest.push_back(w);
    return rest;
  }
  throw std::runtime_error("snapshot: empty input");
}

// Reads exactly `count` non-empty entry lines following the header.
std::vector<std::string> read_entries(std::istream& in, std::size_t count) {
  std::vector<std::string> lines;
  std::string line;
  while (lines.size() < count && std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.size() != count) throw std::runtime_error("snapshot: truncated table");
  return lines;
}

}  // namespace

PolicyTable read_policy_snapshot(std::istream& in) {
  auto dims = read_header(in, "policy");
  if (dims.size() != 2) throw std::runtime_error("snapshot: malformed policy header");
  PolicyTable table(std::stoul(dims[0]), std::stoul(dims[1]));
  std::vector<bool> seen(table.num_states() * table.num_actions(), false);
  for (const auto& line : read_entries(in, seen.size())) {
    std::istringstream ls(line);
    std::size_t s = 0, a = 0;
    std::string value;
    if (!(ls >> s >> a >> value) || s >= table.num_states() || a >= table.num_actions() ||
        seen[s * table.num_actions() + a]) {
      throw std::runtime_error("snapshot: malformed line '" + line + "'");
    }
    seen[s * table.num_actions() + a] = true;
    table.set_preference(s, a, parse_double(value));
  }
  return table;
}

ValueTable read_value_snapshot(std::istream& in) {
  auto dims = read_header(in, "values");
  if (dims.size() != 1) throw std::runtime_error("snapshot: malformed values header");
  ValueTable table(std::stoul(dims[0]));
  std::vector<bool> seen(table.num_states(), false);
  for (const auto& line : read_entries(in, seen.size())) {
    std::istringstream ls(line);
    std::size_t s = 0;
    std::string dash, value;
    if (!(ls >> s >> dash >> value) || dash != "-" || s >= table.num_states() || seen[s]) {
      throw std::runtime_error("snapshot: malformed line '" + line + "'");
    }
    seen[s] = true;
    table.set_value(s, parse_double(value));
  }
  return table;
}

}  // namespace pacman
