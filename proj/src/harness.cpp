#include "pacman/harness.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pacman/text_util.hpp"

namespace pacman {

PlanningProblem make_planning_problem(const Environment& env, const PolicyTable& policy) {
  PlanningProblem p;
  p.description = env.to_action_description();
  const WorldState init = env.to_world(env.reset());
  for (std::size_t f = 0; f < init.values.size(); ++f) p.initial.push_back(FluentAtom{f, init.values[f]});
  p.goal = env.goal_condition();
  for (StateId s : env.enumerate_states()) p.states.push_back(env.to_world(s));
  p.policy = [&env, &policy](const WorldState& w) {
    const auto id = env.from_world(w);
    if (!id) throw std::out_of_range("policy: state outside the environment");
    return policy.action_probs(*id);
  };
  p.cache = std::make_shared<TransitionCache>(p.description);
  return p;
}

EpisodeResult run_pacman_episode(const Environment& env, PolicyTable& policy, ValueTable& values,
                                 const PlanningProblem& problem, int maxstamp, const HyperParams& hyper,
                                 FeedbackSource& feedback, int episode, Rng& rng, StepObserver* observer,
                                 const AvailabilitySource* source) {
  EpisodeResult result;
  StateId s = env.reset();
  if (observer) observer->on_episode_start(episode, s);

  const auto plan = source ? solve(problem, maxstamp, rng, *source) : solve(problem, maxstamp, rng);
  if (!plan) {
    result.planner_failed = true;
    result.timed_out = true;
    result.total_return = -static_cast<double>(env.episode_cap());
    if (observer) observer->on_episode_end(episode, result);
    return result;
  }
  result.plan = plan_to_string(*problem.description, *plan);
  if (observer) {
    std::vector<std::optional<std::size_t>> actions;
    std::vector<StateId> states;
    for (const auto& st : plan->steps) {
      actions.push_back(st.action);
      states.push_back(env.from_world(st.before).value_or(0));
    }
    states.push_back(env.from_world(plan->terminal).value_or(0));
    observer->on_plan(episode, actions, states);
  }

  for (std::size_t i = 0; i < plan->steps.size(); ++i) {
    const PlanStep& ps = plan->steps[i];
    if (!ps.action) continue;
    if (env.from_world(ps.before) != s) break;
    if (result.steps >= env.episode_cap()) {
      result.timed_out = true;
      break;
    }
    const std::size_t a = *ps.action;
    const WorldState& predicted = i + 1 < plan->steps.size() ? plan->steps[i + 1].before : plan->terminal;
    const EnvStep es = env.step(s, a);

    StepRecord rec;
    rec.step = result.steps + 1;
    rec.state = s;
    rec.action = a;
    rec.reward = es.reward;
    rec.next_state = es.next_state;
    rec.terminal = es.terminal;
    rec.improper = es.improper;
    if (observer) observer->on_executed(episode, rec);
    rec.feedback = feedback.feedback(episode, rec.step, s, a);
    const UpdateRecord u =
        actor_critic_update(policy, values, TransitionSample{s, a, es.reward, es.next_state, es.terminal},
                            rec.feedback, hyper);
    rec.td_error = u.td_error;
    rec.advantage = u.advantage;
    rec.used_feedback = u.used_feedback;
    if (observer) observer->on_updated(episode, rec);

    result.total_return += es.reward;
    result.improper_actions += es.improper ? 1 : 0;
    ++result.steps;
    ++result.policy_updates;
    result.records.push_back(rec);
    s = es.next_state;
    if (es.terminal || env.from_world(predicted) != es.next_state) break;
  }
  if (observer) observer->on_episode_end(episode, result);
  return result;
}

PacmanLearner::PacmanLearner(const Environment& env, HyperParams hyper, int maxstamp, Rng rng)
    : env_(env),
      hyper_(hyper),
      maxstamp_(maxstamp),
      rng_(rng),
      policy_(env.num_states(), env.num_actions()),
      values_(env.num_states()),
      problem_(make_planning_problem(env, policy_)) {
  hyper_.validate();
  if (maxstamp < 1) throw std::invalid_argument("maxstamp must be >= 1");
}

EpisodeResult PacmanLearner::run_episode(int episode, FeedbackSource& feedback, StepObserver* observer) {
  return run_pacman_episode(env_, policy_, values_, problem_, maxstamp_, hyper_, feedback, episode, rng_, observer,
                            source_ ? &*source_ : nullptr);
}

void PacmanLearner::write_snapshot(std::ostream& out) const {
  pacman::write_snapshot(out, policy_);
  pacman::write_snapshot(out, values_);
}

// ---------------------------------------------------------------------------

namespace {

bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(key + ": expected true/false, got '" + std::string(v) + "'");
}

int parse_int(const std::string& key, std::string_view v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(std::string(v), &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": expected an integer, got '" + std::string(v) + "'");
  }
}

double parse_real(const std::string& key, std::string_view v) {
  try {
    return parse_double(v);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": expected a number, got '" + std::string(v) + "'");
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig c;
  std::map<std::string, int> seen;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    line = trim(line.substr(0, std::min(line.find('#'), line.find('%'))));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (seen[key]++) throw std::invalid_argument("config: duplicate key '" + key + "'");
    if (key == "env") {
      c.env = value;
    } else if (key == "algorithm") {
      c.algorithm = value;
    } else if (key == "intent") {
      c.intent = value == "none" ? std::nullopt : std::optional<Intent>(parse_intent(value));
    } else if (key == "case") {
      c.fcase = parse_feedback_case(value);
    } else if (key == "alpha") {
      c.hyper.alpha = parse_real(key, value);
    } else if (key == "beta") {
      c.hyper.beta = parse_real(key, value);
    } else if (key == "gamma") {
      c.hyper.gamma = parse_real(key, value);
    } else if (key == "maxstamp") {
      c.maxstamp = parse_int(key, value);
    } else if (key == "maxepisode") {
      c.maxepisode = parse_int(key, value);
    } else if (key == "runs") {
      c.runs = parse_int(key, value);
    } else if (key == "seeds") {
      c.seeds.clear();
      for (const auto& item : split(value, ',')) {
        if (item.empty()) continue;
        try {
          std::size_t used = 0;
          c.seeds.push_back(std::stoull(item, &used));
          if (used != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw std::invalid_argument("seeds: bad seed '" + item + "'");
        }
      }
    } else if (key == "output") {
      c.output = value;
    } else if (key == "epsilon") {
      c.epsilon = parse_real(key, value);
    } else if (key == "w_tamer") {
      c.weights.w_tamer = parse_real(key, value);
    } else if (key == "w_bql") {
      c.weights.w_bql = parse_real(key, value);
    } else if (key == "tamer_lr") {
      c.weights.tamer_lr = parse_real(key, value);
    } else if (key == "danger_terminal") {
      c.danger_terminal = parse_bool(key, value);
    } else if (key == "map") {
      c.map = value;
    } else if (key == "scenario") {
      c.scenario = value;
    } else if (key == "step_log") {
      c.step_log = parse_bool(key, value);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  out << "env = " << env << '\n';
  out << "algorithm = " << algorithm << '\n';
  out << "intent = " << (intent ? to_string(*intent) : "none") << '\n';
  out << "case = " << to_string(fcase) << '\n';
  out << "alpha = " << format_double(hyper.alpha) << '\n';
  out << "beta = " << format_double(hyper.beta) << '\n';
  out << "gamma = " << format_double(hyper.gamma) << '\n';
  out << "maxstamp = " << maxstamp << '\n';
  out << "maxepisode = " << maxepisode << '\n';
  out << "runs = " << runs << '\n';
  out << "seeds = ";
  for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
  out << '\n';
  out << "output = " << output << '\n';
  out << "epsilon = " << format_double(epsilon) << '\n';
  out << "w_tamer = " << format_double(weights.w_tamer) << '\n';
  out << "w_bql = " << format_double(weights.w_bql) << '\n';
  out << "tamer_lr = " << format_double(weights.tamer_lr) << '\n';
  out << "danger_terminal = " << (danger_terminal ? "true" : "false") << '\n';
  out << "map = " << map << '\n';
  out << "scenario = " << scenario << '\n';
  out << "step_log = " << (step_log ? "true" : "false") << '\n';
  return out.str();
}

void ExperimentConfig::resolve(const Environment& e) {
  if (algorithm != "pacman" && algorithm != "ac_hf" && algorithm != "tamer_rl" && algorithm != "bql_shaping") {
    throw std::invalid_argument("unknown algorithm '" + algorithm + "'");
  }
  hyper.validate();
  weights.validate();
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must be in [0, 1]");
  if (maxstamp == 0) maxstamp = e.default_maxstamp();
  if (maxepisode == 0) maxepisode = e.default_maxepisode();
  if (maxstamp < 1) throw std::invalid_argument("maxstamp must be >= 1");
  if (maxepisode < 1) throw std::invalid_argument("maxepisode must be >= 1");
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (seeds.empty()) {
    for (int i = 1; i <= runs; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
  }
  if (static_cast<int>(seeds.size()) != runs) throw std::invalid_argument("runs must equal the number of seeds");
}

std::unique_ptr<Environment> make_environment(const ExperimentConfig& config) {
  return make_environment(config.env, config.map, config.danger_terminal);
}

std::unique_ptr<Learner> make_learner(const ExperimentConfig& config, const Environment& env, std::uint64_t seed) {
  Rng rng = make_rng(seed, 1);
  if (config.algorithm == "pacman") {
    const int maxstamp = config.maxstamp > 0 ? config.maxstamp : env.default_maxstamp();
    return std::make_unique<PacmanLearner>(env, config.hyper, maxstamp, rng);
  }
  if (config.algorithm == "ac_hf") return std::make_unique<AcHfLearner>(env, config.hyper, rng);
  if (config.algorithm == "tamer_rl") {
    return std::make_unique<ShapedQLearner>(ShapedQLearner::Kind::tamer_rl, env, config.hyper, config.weights,
                                            config.epsilon, rng);
  }
  if (config.algorithm == "bql_shaping") {
    return std::make_unique<ShapedQLearner>(ShapedQLearner::Kind::bql_shaping, env, config.hyper, config.weights,
                                            config.epsilon, rng);
  }
  throw std::invalid_argument("unknown algorithm '" + config.algorithm + "'");
}

std::unique_ptr<FeedbackSource> make_feedback_source(const ExperimentConfig& config, const Environment& env,
                                                     std::uint64_t seed) {
  if (!config.scenario.empty()) {
    std::ifstream in(config.scenario);
    if (!in) throw std::runtime_error("cannot open scenario '" + config.scenario + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::make_unique<OracleFeedback>(parse_scenario(ss.str(), env), make_rng(seed, 2));
  }
  if (!config.intent) return std::make_unique<NoFeedback>();
  return std::make_unique<OracleFeedback>(build_scenario(env, *config.intent, config.fcase), make_rng(seed, 2));
}

AggregateCurve aggregate_curves(const std::vector<std::vector<double>>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_curves: no runs");
  const std::size_t n = runs.front().size();
  for (const auto& r : runs) {
    if (r.size() != n) throw std::invalid_argument("aggregate_curves: runs have different lengths");
  }
  AggregateCurve out;
  out.mean.resize(n);
  out.variance.resize(n);
  const double k = static_cast<double>(runs.size());
  for (std::size_t e = 0; e < n; ++e) {
    double sum = 0.0;
    for (const auto& r : runs) sum += r[e];
    const double mean = sum / k;
    double sq = 0.0;
    for (const auto& r : runs) sq += (r[e] - mean) * (r[e] - mean);
    out.mean[e] = mean;
    out.variance[e] = sq / k;
  }
  return out;
}

double tail_mean(const std::vector<double>& series, std::size_t count) {
  if (series.empty()) throw std::invalid_argument("tail_mean: empty series");
  count = std::min(count, series.size());
  double sum = 0.0;
  for (std::size_t i = series.size() - count; i < series.size(); ++i) sum += series[i];
  return sum / static_cast<double>(count);
}

double head_mean(const std::vector<double>& series, std::size_t count) {
  if (series.empty()) throw std::invalid_argument("head_mean: empty series");
  count = std::min(count, series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) sum += series[i];
  return sum / static_cast<double>(count);
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string step_line(int episode, const StepRecord& r, const Environment& env) {
  std::ostringstream out;
  out << episode << ',' << r.step << ',' << env.state_label(r.state) << ',' << env.action_names().at(r.action)
      << ',' << format_double(r.reward) << ',' << env.state_label(r.next_state) << ',' << (r.terminal ? 1 : 0)
      << ',' << (r.feedback ? std::to_string(*r.feedback) : "") << ',' << format_double(r.td_error) << ','
      << format_double(r.advantage) << ',' << (r.used_feedback ? "feedback" : "delta") << '\n';
  return out.str();
}

}  // namespace

ExperimentResult run_experiment(ExperimentConfig config) {
  auto env = make_environment(config);
  config.resolve(*env);

  ExperimentResult result;
  result.config = config;
  const bool write = !config.output.empty();
  const std::filesystem::path dir(config.output);
  std::ostringstream log;
  if (write) {
    std::filesystem::create_directories(dir);
    std::string echo = config.to_text();
    if (config.algorithm == "tamer_rl" || config.algorithm == "bql_shaping") {
      echo += "% baseline implementation: reconstruction (tabular Q-learning core with reward shaping)\n";
    }
    write_file(dir / "config.txt", echo);
  }
  log << "env " << env->name() << " algorithm " << config.algorithm << " intent "
      << (config.intent ? to_string(*config.intent) : "none") << " case " << to_string(config.fcase) << '\n';

  for (int run = 0; run < config.runs; ++run) {
    const std::uint64_t seed = config.seeds[static_cast<std::size_t>(run)];
    auto learner = make_learner(config, *env, seed);
    auto feedback = make_feedback_source(config, *env, seed);
    std::vector<EpisodeSummary> summaries;
    std::vector<double> returns;
    std::ostringstream run_csv, steps_csv;
    run_csv << "episode,return,steps,policy_updates,feedback_used,planner_failed,timed_out,improper_actions\n";
    if (config.step_log) {
      steps_csv << "episode,step,state,action,reward,next_state,terminal,feedback,td_error,advantage,driver\n";
    }
    int failures = 0;
    for (int ep = 1; ep <= config.maxepisode; ++ep) {
      const EpisodeResult r = learner->run_episode(ep, *feedback);
      EpisodeSummary s;
      s.total_return = r.total_return;
      s.steps = r.steps;
      s.policy_updates = r.policy_updates;
      for (const auto& rec : r.records) s.feedback_used += rec.used_feedback ? 1 : 0;
      s.planner_failed = r.planner_failed;
      s.timed_out = r.timed_out;
      s.improper_actions = r.improper_actions;
      failures += r.planner_failed ? 1 : 0;
      summaries.push_back(s);
      returns.push_back(r.total_return);
      if (write) {
        run_csv << ep << ',' << format_double(s.total_return) << ',' << s.steps << ',' << s.policy_updates << ','
                << s.feedback_used << ',' << (s.planner_failed ? 1 : 0) << ',' << (s.timed_out ? 1 : 0) << ','
                << s.improper_actions << '\n';
        if (config.step_log) {
          for (const auto& rec : r.records) steps_csv << step_line(ep, rec, *env);
        }
      }
    }
    log << "run " << run + 1 << " seed " << seed << " first20_mean " << format_double(head_mean(returns, 20))
        << " last50_mean " << format_double(tail_mean(returns, 50)) << " planner_failures " << failures << '\n';
    if (write) {
      write_file(dir / ("run_" + std::to_string(run + 1) + ".csv"), run_csv.str());
      if (config.step_log) write_file(dir / ("steps_" + std::to_string(run + 1) + ".csv"), steps_csv.str());
    }
    result.episodes.push_back(std::move(summaries));
    result.returns.push_back(std::move(returns));
  }

  result.aggregate = aggregate_curves(result.returns);
  if (write) {
    std::ostringstream agg;
    agg << "episode,mean,variance\n";
    for (std::size_t e = 0; e < result.aggregate.mean.size(); ++e) {
      agg << e + 1 << ',' << format_double(result.aggregate.mean[e]) << ','
          << format_double(result.aggregate.variance[e]) << '\n';
    }
    write_file(dir / "aggregate.csv", agg.str());
    write_file(dir / "run.log", log.str());
  }
  return result;
}

std::string curves_table(const std::filesystem::path& dir) {
  auto read_csv = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open '" + p.string() + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (!trim(line).empty()) rows.push_back(split(line, ','));
    }
    return rows;
  };
  const auto agg = read_csv(dir / "aggregate.csv");
  std::vector<std::vector<std::vector<std::string>>> runs;
  for (int i = 1; std::filesystem::exists(dir / ("run_" + std::to_string(i) + ".csv")); ++i) {
    runs.push_back(read_csv(dir / ("run_" + std::to_string(i) + ".csv")));
  }
  std::ostringstream out;
  out << "episode,mean,variance,std,lower,upper";
  for (std::size_t i = 0; i < runs.size(); ++i) out << ",run_" << i + 1;
  out << '\n';
  for (std::size_t e = 0; e < agg.size(); ++e) {
    const double mean = parse_double(agg[e].at(1));
    const double var = parse_double(agg[e].at(2));
    const double sd = std::sqrt(var);
    out << agg[e].at(0) << ',' << format_double(mean) << ',' << format_double(var) << ',' << format_double(sd) << ','
        << format_double(mean - sd) << ',' << format_double(mean + sd);
    for (const auto& r : runs) out << ',' << r.at(e).at(1);
    out << '\n';
  }
  return out.str();
}

}  // namespace pacman
