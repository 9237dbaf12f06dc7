#pragma once

// Benchmark MDPs (Four Rooms, Taxi, and a 1-D line world) with deterministic
// transitions, plus their export as action descriptions for the planner.

#include <array>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pacman/action_lang.hpp"
#include "pacman/actor_critic.hpp"

namespace pacman {

// Default planning horizon is this multiple of the shortest plan length; with
// a uniform policy, shorter horizons rarely contain a sampled plan.
inline constexpr int kMaxstampFactor = 8;

struct EnvStep {
  StateId next_state = 0;
  double reward = 0.0;
  bool terminal = false;
  bool improper = false;  // Taxi: pickup/dropoff attempted where it is not allowed
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  // Size of the state-id space (ids may include walls and terminal states).
  virtual std::size_t num_states() const = 0;
  virtual const std::vector<std::string>& action_names() const = 0;
  std::size_t num_actions() const { return action_names().size(); }

  virtual StateId reset() const = 0;
  // Deterministic. Throws std::invalid_argument for malformed ids or actions
  // and std::logic_error when stepping from a terminal state.
  virtual EnvStep step(StateId s, std::size_t action) const = 0;
  virtual bool is_valid(StateId s) const = 0;
  virtual bool is_terminal(StateId s) const = 0;

  // Non-terminal states reachable from reset(), ascending.
  std::vector<StateId> enumerate_states() const;

  // Action order matches action_names().
  virtual std::shared_ptr<const ActionDescription> to_action_description() const = 0;
  virtual WorldState to_world(StateId s) const = 0;
  virtual std::optional<StateId> from_world(const WorldState& w) const = 0;
  virtual std::vector<FluentAtom> goal_condition() const = 0;

  virtual std::string state_label(StateId s) const = 0;
  virtual std::optional<StateId> parse_state_label(std::string_view label) const = 0;

  virtual int episode_cap() const = 0;
  virtual int default_maxstamp() const = 0;
  virtual int default_maxepisode() const = 0;
  virtual double reward_bound() const = 0;

  std::optional<std::size_t> find_action(std::string_view name) const;
};

// ---------------------------------------------------------------------------

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

struct FourRoomsLayout {
  int rows = 0;
  int cols = 0;
  std::vector<std::string> grid;  // '#', '.', 'X', 'S', 'G'
  Cell start;
  Cell goal;

  // Text grid: one row per line; blank lines and '%' comments ignored.
  static FourRoomsLayout parse(std::string_view text);
  static FourRoomsLayout default_layout();
  std::string to_text() const;

  bool in_bounds(Cell c) const { return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols; }
  char at(Cell c) const { return grid.at(static_cast<std::size_t>(c.row)).at(static_cast<std::size_t>(c.col)); }
  bool is_wall(Cell c) const { return !in_bounds(c) || at(c) == '#'; }
  bool is_danger(Cell c) const { return in_bounds(c) && at(c) == 'X'; }
};

class FourRoomsEnv final : public Environment {
 public:
  static constexpr double kStepReward = -1.0;
  static constexpr double kGoalReward = 5.0;
  static constexpr double kDangerReward = -10.0;
  enum Action : std::size_t { up = 0, down = 1, left = 2, right = 3 };

  explicit FourRoomsEnv(FourRoomsLayout layout = FourRoomsLayout::default_layout(),
                        bool danger_terminal = true);

  std::string name() const override { return "fourrooms"; }
  std::size_t num_states() const override;
  const std::vector<std::string>& action_names() const override { return actions_; }
  StateId reset() const override { return id(layout_.start); }
  EnvStep step(StateId s, std::size_t action) const override;
  bool is_valid(StateId s) const override;
  bool is_terminal(StateId s) const override;
  std::shared_ptr<const ActionDescription> to_action_description() const override { return description_; }
  WorldState to_world(StateId s) const override;
  std::optional<StateId> from_world(const WorldState& w) const override;
  std::vector<FluentAtom> goal_condition() const override;
  std::string state_label(StateId s) const override;
  std::optional<StateId> parse_state_label(std::string_view label) const override;
  int episode_cap() const override { return 200; }
  int default_maxstamp() const override;
  int default_maxepisode() const override { return 500; }
  double reward_bound() const override { return 11.0; }

  const FourRoomsLayout& layout() const { return layout_; }
  bool danger_terminal() const { return danger_terminal_; }
  StateId id(Cell c) const { return static_cast<StateId>(c.row * layout_.cols + c.col); }
  Cell cell(StateId s) const;
  // Target of a move ignoring walls' blocking (may be out of bounds or a wall).
  static Cell neighbor(Cell c, std::size_t action);
  // Position after attempting a move (walls and borders block).
  Cell move(Cell c, std::size_t action) const;

 private:
  std::string description_text() const;

  FourRoomsLayout layout_;
  bool danger_terminal_;
  std::vector<std::string> actions_{"up", "down", "left", "right"};
  std::shared_ptr<const ActionDescription> description_;
};

// ---------------------------------------------------------------------------

struct TaxiInstance {
  int rows = 5;
  int cols = 5;
  std::set<Cell> east_walls;  // wall between (r,c) and (r,c+1)
  std::vector<std::pair<std::string, Cell>> landmarks;
  Cell taxi_start;
  std::string passenger;    // landmark name
  std::string destination;  // landmark name
  // Scenario annotations used by the default feedback scenarios.
  std::optional<Cell> wrong_location;  // where a misleading passenger claims to be
  std::set<Cell> traffic;              // cells a helpful passenger routes around

  static TaxiInstance parse(std::string_view text);
  static TaxiInstance default_instance();
  std::string to_text() const;

  Cell landmark(std::string_view name) const;
  Cell passenger_cell() const { return landmark(passenger); }
  Cell destination_cell() const { return landmark(destination); }
};

class TaxiEnv final : public Environment {
 public:
  static constexpr double kStepReward = -1.0;
  static constexpr double kDropoffReward = 20.0;
  static constexpr double kImproperReward = -10.0;
  enum Action : std::size_t { north = 0, south = 1, east = 2, west = 3, pickup = 4, dropoff = 5 };
  enum class Passenger : int { waiting = 0, riding = 1, delivered = 2 };

  explicit TaxiEnv(TaxiInstance instance = TaxiInstance::default_instance());

  std::string name() const override { return "taxi"; }
  std::size_t num_states() const override;
  const std::vector<std::string>& action_names() const override { return actions_; }
  StateId reset() const override { return id(instance_.taxi_start, Passenger::waiting); }
  EnvStep step(StateId s, std::size_t action) const override;
  bool is_valid(StateId s) const override { return s < num_states(); }
  bool is_terminal(StateId s) const override;
  std::shared_ptr<const ActionDescription> to_action_description() const override { return description_; }
  WorldState to_world(StateId s) const override;
  std::optional<StateId> from_world(const WorldState& w) const override;
  std::vector<FluentAtom> goal_condition() const override;
  std::string state_label(StateId s) const override;
  std::optional<StateId> parse_state_label(std::string_view label) const override;
  int episode_cap() const override { return 400; }
  int default_maxstamp() const override;
  int default_maxepisode() const override { return 1000; }
  double reward_bound() const override { return 20.0; }

  const TaxiInstance& instance() const { return instance_; }
  StateId id(Cell taxi, Passenger p) const;
  Cell taxi_cell(StateId s) const;
  Passenger passenger(StateId s) const;
  // Taxi position after a navigation action (walls and borders block).
  Cell move(Cell c, std::size_t action) const;
  bool is_move(std::size_t action) const { return action <= west; }

 private:
  int cell_index(Cell c) const { return c.row * instance_.cols + c.col; }
  std::string description_text() const;

  TaxiInstance instance_;
  std::vector<std::string> actions_{"north", "south", "east", "west", "pickup", "dropoff"};
  std::shared_ptr<const ActionDescription> description_;
};

// ---------------------------------------------------------------------------

// Horizontal corridor of cells 1..n; start at 1, goal at n. With n = 3 this is
// the 3-grid planning example (moveleft / moveright).
class LineWorldEnv final : public Environment {
 public:
  static constexpr double kStepReward = -1.0;
  static constexpr double kGoalReward = 5.0;
  enum Action : std::size_t { moveleft = 0, moveright = 1 };

  explicit LineWorldEnv(int length = 3);

  std::string name() const override { return "line"; }
  std::size_t num_states() const override { return static_cast<std::size_t>(length_); }
  const std::vector<std::string>& action_names() const override { return actions_; }
  StateId reset() const override { return 0; }
  EnvStep step(StateId s, std::size_t action) const override;
  bool is_valid(StateId s) const override { return s < num_states(); }
  bool is_terminal(StateId s) const override { return s + 1 == num_states(); }
  std::shared_ptr<const ActionDescription> to_action_description() const override { return description_; }
  WorldState to_world(StateId s) const override;
  std::optional<StateId> from_world(const WorldState& w) const override;
  std::vector<FluentAtom> goal_condition() const override;
  std::string state_label(StateId s) const override;
  std::optional<StateId> parse_state_label(std::string_view label) const override;
  int episode_cap() const override { return 50; }
  int default_maxstamp() const override { return kMaxstampFactor * (length_ - 1); }
  int default_maxepisode() const override { return 200; }
  double reward_bound() const override { return 4.0; }

  int length() const { return length_; }
  static std::string description_text(int length);

 private:
  int length_;
  std::vector<std::string> actions_{"moveleft", "moveright"};
  std::shared_ptr<const ActionDescription> description_;
};

// "fourrooms" | "taxi" | "line"; map_path / instance_path override the default
// layouts when non-empty.
std::unique_ptr<Environment> make_environment(std::string_view env_id, const std::string& map_path = {},
                                              bool danger_terminal = true);

}  // namespace pacman
