// pacman-lab: experiment runner, one-shot planner, trainer service and
// curve export.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pacman/action_lang.hpp"
#include "pacman/envs.hpp"
#include "pacman/feedback.hpp"
#include "pacman/harness.hpp"
#include "pacman/planner.hpp"
#include "pacman/text_util.hpp"
#include "pacman/trainer_service.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

int cmd_run(const std::string& config_path, const std::string& output) {
  auto config = pacman::ExperimentConfig::load(config_path);
  if (!output.empty()) config.output = output;
  const auto result = pacman::run_experiment(config);
  const auto& c = result.config;
  std::cout << "env " << c.env << ", algorithm " << c.algorithm << ", " << c.runs << " runs x " << c.maxepisode
            << " episodes\n";
  std::cout << "final-50 mean return: " << pacman::format_double(pacman::tail_mean(result.aggregate.mean, 50))
            << '\n';
  if (!c.output.empty()) std::cout << "outputs written to " << c.output << '\n';
  return 0;
}

int cmd_plan(const std::string& domain_path, std::uint64_t seed, const std::string& init_text,
             const std::string& goal_text, int maxstamp, const std::string& dump_path) {
  auto d = std::make_shared<const pacman::ActionDescription>(pacman::parse_action_description(read_file(domain_path)));
  pacman::PlanningProblem p;
  p.description = d;
  p.initial = pacman::parse_condition(*d, init_text);
  p.goal = pacman::parse_condition(*d, goal_text);
  const auto start = pacman::complete_state(*d, p.initial);
  p.states = pacman::reachable_states(*d, start);
  const std::size_t n = d->actions.size();
  p.policy = [n](const pacman::WorldState&) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); };
  auto rng = pacman::make_rng(seed);
  pacman::AvailabilitySample trace(p.states);
  const auto plan = pacman::solve(p, maxstamp, rng, &trace);
  std::cout << "states sampled: " << p.states.size() << ", horizon reached: " << trace.horizon() << '\n';
  if (!plan) {
    std::cout << "no plan within maxstamp " << maxstamp << '\n';
  } else {
    std::cout << "plan (" << plan->num_actions() << " actions, " << plan->horizon()
              << " timestamps): " << pacman::plan_to_string(*d, *plan) << '\n';
    for (const auto& step : plan->steps) {
      std::cout << "  t=" << step.timestamp << "  " << pacman::state_to_string(*d, step.before) << "  -> "
                << (step.action ? d->actions.at(*step.action) : std::string("skip")) << '\n';
    }
    std::cout << "  end  " << pacman::state_to_string(*d, plan->terminal) << '\n';
  }
  if (!dump_path.empty()) {
    write_output(dump_path, pacman::dump_timestamped_program(*d, trace, p.initial, p.goal, trace.horizon()));
  }
  return plan ? 0 : 2;
}

pacman::TrainerServer* g_server = nullptr;

int cmd_serve(const std::string& host, int port) {
  pacman::TrainerService service;
  pacman::TrainerServer server(service);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::cout << "serving on http://" << host << ':' << port << "/v1" << std::endl;
  server.run(host, port);
  g_server = nullptr;
  return 0;
}

int cmd_scenario(const std::string& env_id, const std::string& map, const std::string& intent,
                 const std::string& fcase, const std::string& output) {
  auto env = pacman::make_environment(env_id, map);
  const auto sc = pacman::build_scenario(*env, pacman::parse_intent(intent), pacman::parse_feedback_case(fcase));
  write_output(output, "% default " + intent + " scenario for " + env_id + "\n" + pacman::scenario_to_text(sc, *env));
  return 0;
}

int cmd_domain(const std::string& env_id, const std::string& map, const std::string& output) {
  auto env = pacman::make_environment(env_id, map);
  write_output(output, pacman::to_text(*env->to_action_description()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pacman-lab: planner-actor-critic experiments"};
  app.require_subcommand(1);

  std::string config_path, output;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
  run->add_option("--output", output, "output directory (overrides the config)");

  std::string domain_path, init_text, goal_text, dump_path;
  std::uint64_t seed = 1;
  int maxstamp = 16;
  auto* plan = app.add_subcommand("plan", "one-shot planning under a uniform policy");
  plan->add_option("--domain", domain_path, "action description file")->required()->check(CLI::ExistingFile);
  plan->add_option("--seed", seed, "sampling seed");
  plan->add_option("--init", init_text, "initial condition, e.g. \"Loc=1\"")->required();
  plan->add_option("--goal", goal_text, "goal condition, e.g. \"Loc=3\"")->required();
  plan->add_option("--maxstamp", maxstamp, "planning horizon bound")->check(CLI::PositiveNumber);
  plan->add_option("--dump", dump_path, "write the timestamped program ('-' for stdout)");

  std::string host = "127.0.0.1";
  int port = 8765;
  auto* serve = app.add_subcommand("serve", "run the trainer service");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));

  std::string curves_dir;
  auto* curves = app.add_subcommand("curves", "emit plot-ready learning curves from an output directory");
  curves->add_option("dir", curves_dir, "experiment output directory")->required()->check(CLI::ExistingDirectory);
  curves->add_option("--output", output, "output file (default stdout)");

  std::string env_id = "fourrooms", map, intent = "helpful", fcase = "ideal";
  auto* scenario = app.add_subcommand("scenario", "export a default feedback scenario file");
  scenario->add_option("--env", env_id, "fourrooms | taxi | line");
  scenario->add_option("--map", map, "map or instance file");
  scenario->add_option("--intent", intent, "helpful | misleading");
  scenario->add_option("--case", fcase, "ideal | infrequent | inconsistent | infrequent_inconsistent");
  scenario->add_option("--output", output, "output file (default stdout)");

  auto* domain = app.add_subcommand("domain", "export an environment as an action description");
  domain->add_option("--env", env_id, "fourrooms | taxi | line");
  domain->add_option("--map", map, "map or instance file");
  domain->add_option("--output", output, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, output);
    if (*plan) return cmd_plan(domain_path, seed, init_text, goal_text, maxstamp, dump_path);
    if (*serve) return cmd_serve(host, port);
    if (*curves) {
      write_output(output, pacman::curves_table(curves_dir));
      return 0;
    }
    if (*scenario) return cmd_scenario(env_id, map, intent, fcase, output);
    if (*domain) return cmd_domain(env_id, map, output);
  } catch (const pacman::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
