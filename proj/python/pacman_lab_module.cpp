// Python bindings: planning, environments, policy tables, experiments and the
// trainer service.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pacman/action_lang.hpp"
#include "pacman/envs.hpp"
#include "pacman/feedback.hpp"
#include "pacman/harness.hpp"
#include "pacman/planner.hpp"
#include "pacman/trainer_service.hpp"

namespace py = pybind11;
using namespace pacman;

namespace {

// Plan under a uniform policy; None when no plan exists below maxstamp.
std::optional<py::dict> plan_text(const std::string& domain, const std::string& init, const std::string& goal,
                                  int maxstamp, std::uint64_t seed) {
  auto d = std::make_shared<const ActionDescription>(parse_action_description(domain));
  PlanningProblem p;
  p.description = d;
  p.initial = parse_condition(*d, init);
  p.goal = parse_condition(*d, goal);
  p.states = reachable_states(*d, complete_state(*d, p.initial));
  const std::size_t n = d->actions.size();
  p.policy = [n](const WorldState&) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); };
  auto rng = make_rng(seed);
  const auto plan = solve(p, maxstamp, rng);
  if (!plan) return std::nullopt;
  py::dict out;
  out["plan"] = plan_to_string(*d, *plan);
  out["actions"] = plan->num_actions();
  out["horizon"] = plan->horizon();
  return out;
}

py::dict experiment(const std::string& config_text, const std::string& output) {
  auto config = ExperimentConfig::parse(config_text);
  if (!output.empty()) config.output = output;
  ExperimentResult result;
  {
    py::gil_scoped_release release;
    result = run_experiment(config);
  }
  py::dict out;
  out["config"] = result.config.to_text();
  out["returns"] = result.returns;
  out["mean"] = result.aggregate.mean;
  out["variance"] = result.aggregate.variance;
  return out;
}

// Owns a service and its HTTP front end.
class Server {
 public:
  Server() : server_(service_) {}
  int start(const std::string& host, int port) { return server_.start(host, port); }
  void stop() { server_.stop(); }
  std::size_t sessions() const { return service_.size(); }

 private:
  TrainerService service_;
  TrainerServer server_;
};

}  // namespace

PYBIND11_MODULE(pacman_lab, m) {
  m.doc() = "Planner-actor-critic learning with human feedback";

  m.def("plan", &plan_text, py::arg("domain"), py::arg("init"), py::arg("goal"), py::arg("maxstamp") = 16,
        py::arg("seed") = 0);
  m.def(
      "domain_text",
      [](const std::string& env, const std::string& map) { return to_text(*make_environment(env, map)->to_action_description()); },
      py::arg("env"), py::arg("map") = "");
  m.def(
      "scenario_text",
      [](const std::string& env, const std::string& intent, const std::string& fcase) {
        auto e = make_environment(env);
        return scenario_to_text(build_scenario(*e, parse_intent(intent), parse_feedback_case(fcase)), *e);
      },
      py::arg("env"), py::arg("intent") = "helpful", py::arg("case") = "ideal");
  m.def("run_experiment", &experiment, py::arg("config"), py::arg("output") = "");

  py::class_<Environment, std::shared_ptr<Environment>>(m, "Environment")
      .def(py::init([](const std::string& id, const std::string& map) {
             return std::shared_ptr<Environment>(make_environment(id, map));
           }),
           py::arg("env"), py::arg("map") = "")
      .def_property_readonly("name", &Environment::name)
      .def_property_readonly("num_states", &Environment::num_states)
      .def_property_readonly("action_names", &Environment::action_names)
      .def_property_readonly("default_maxstamp", &Environment::default_maxstamp)
      .def("reset", &Environment::reset)
      .def("step",
           [](const Environment& e, StateId s, std::size_t a) {
             const auto st = e.step(s, a);
             return py::make_tuple(st.next_state, st.reward, st.terminal);
           })
      .def("states", &Environment::enumerate_states)
      .def("is_terminal", &Environment::is_terminal)
      .def("label", &Environment::state_label);

  py::class_<PolicyTable>(m, "PolicyTable")
      .def(py::init<std::size_t, std::size_t>(), py::arg("num_states"), py::arg("num_actions"))
      .def("preference", &PolicyTable::preference)
      .def("set_preference", &PolicyTable::set_preference)
      .def("action_probs", &PolicyTable::action_probs)
      .def("grad_log_policy", &PolicyTable::grad_log_policy)
      .def("update", &PolicyTable::update, py::arg("state"), py::arg("action"), py::arg("advantage"),
           py::arg("beta"));

  py::class_<Server>(m, "TrainerServer")
      .def(py::init<>())
      .def("start", &Server::start, py::arg("host") = "127.0.0.1", py::arg("port") = 0)
      .def("stop", &Server::stop, py::call_guard<py::gil_scoped_release>())
      .def_property_readonly("sessions", &Server::sessions);
}
