#include "pacman/envs.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pacman/text_util.hpp"

namespace pacman {

std::vector<StateId> Environment::enumerate_states() const {
  std::vector<StateId> out;
  std::vector<char> seen(num_states(), 0);
  std::deque<StateId> queue{reset()};
  seen.at(reset()) = 1;
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    if (is_terminal(s)) continue;
    out.push_back(s);
    for (std::size_t a = 0; a < num_actions(); ++a) {
      const StateId n = step(s, a).next_state;
      if (!seen.at(n)) {
        seen[n] = 1;
        queue.push_back(n);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::size_t> Environment::find_action(std::string_view name) const {
  const auto& names = action_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

namespace {

// Fewest actions from reset() to a goal-satisfying state, over the env's own
// transitions. Used to size the default planning horizon.
int shortest_plan_length(const Environment& env) {
  const auto goal = env.goal_condition();
  std::vector<int> dist(env.num_states(), -1);
  std::deque<StateId> queue{env.reset()};
  dist[env.reset()] = 0;
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    if (env.to_world(s).holds_all(goal)) return dist[s];
    if (env.is_terminal(s)) continue;
    for (std::size_t a = 0; a < env.num_actions(); ++a) {
      const StateId n = env.step(s, a).next_state;
      if (dist[n] < 0) {
        dist[n] = dist[s] + 1;
        queue.push_back(n);
      }
    }
  }
  throw std::runtime_error(env.name() + ": goal is unreachable from the start state");
}

std::vector<std::string> content_lines(std::string_view text) {
  std::vector<std::string> out;
  for (auto& raw : split(text, '\n')) {
    std::string line = raw.substr(0, raw.find('%'));
    line = std::string(trim(line));
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Four Rooms

FourRoomsLayout FourRoomsLayout::parse(std::string_view text) {
  FourRoomsLayout layout;
  bool have_start = false, have_goal = false;
  for (const auto& raw : content_lines(text)) {
    std::string row;
    for (char c : raw) {
      if (c == ' ' || c == '\t') continue;
      if (c != '#' && c != '.' && c != 'X' && c != 'S' && c != 'G') {
        throw std::invalid_argument(std::string("map: unexpected character '") + c + "'");
      }
      row.push_back(c);
    }
    if (!layout.grid.empty() && row.size() != layout.grid.front().size()) {
      throw std::invalid_argument("map: rows have different lengths");
    }
    const int r = static_cast<int>(layout.grid.size());
    for (int c = 0; c < static_cast<int>(row.size()); ++c) {
      if (row[static_cast<std::size_t>(c)] == 'S') {
        if (have_start) throw std::invalid_argument("map: more than one start cell");
        layout.start = {r, c};
        have_start = true;
      } else if (row[static_cast<std::size_t>(c)] == 'G') {
        if (have_goal) throw std::invalid_argument("map: more than one goal cell");
        layout.goal = {r, c};
        have_goal = true;
      }
    }
    layout.grid.push_back(std::move(row));
  }
  if (!have_start || !have_goal) throw std::invalid_argument("map: needs exactly one S and one G");
  layout.rows = static_cast<int>(layout.grid.size());
  layout.cols = static_cast<int>(layout.grid.front().size());
  return layout;
}

FourRoomsLayout FourRoomsLayout::default_layout() {
  // Reconstructed layout: vertical wall at column 5 with doorways at rows 2
  // and 7, horizontal walls at row 4 (left, doorway column 2) and row 5
  // (right, doorway column 8). Two danger cells in the top-right room.
  return parse(
      ".....#...G\n"
      ".....#....\n"
      "..........\n"
      ".....#.XX.\n"
      "##.###....\n"
      "..S..###.#\n"
      ".....#....\n"
      "..........\n"
      ".....#....\n"
      ".....#....\n");
}

std::string FourRoomsLayout::to_text() const {
  std::string out;
  for (const auto& row : grid) out += row + "\n";
  return out;
}

FourRoomsEnv::FourRoomsEnv(FourRoomsLayout layout, bool danger_terminal)
    : layout_(std::move(layout)), danger_terminal_(danger_terminal) {
  if (layout_.start == layout_.goal) throw std::invalid_argument("fourrooms: start equals goal");
  if (layout_.is_wall(layout_.start) || layout_.is_wall(layout_.goal)) {
    throw std::invalid_argument("fourrooms: start and goal must be free cells");
  }
  description_ = std::make_shared<const ActionDescription>(parse_action_description(description_text()));
}

std::size_t FourRoomsEnv::num_states() const {
  return static_cast<std::size_t>(layout_.rows * layout_.cols);
}

Cell FourRoomsEnv::cell(StateId s) const {
  if (s >= num_states()) throw std::invalid_argument("fourrooms: state id out of range");
  return {static_cast<int>(s) / layout_.cols, static_cast<int>(s) % layout_.cols};
}

bool FourRoomsEnv::is_valid(StateId s) const {
  return s < num_states() && !layout_.is_wall(cell(s));
}

bool FourRoomsEnv::is_terminal(StateId s) const {
  const Cell c = cell(s);
  return c == layout_.goal || (danger_terminal_ && layout_.is_danger(c));
}

Cell FourRoomsEnv::neighbor(Cell c, std::size_t action) {
  switch (action) {
    case up: return {c.row - 1, c.col};
    case down: return {c.row + 1, c.col};
    case left: return {c.row, c.col - 1};
    case right: return {c.row, c.col + 1};
    default: throw std::invalid_argument("fourrooms: unknown action");
  }
}

Cell FourRoomsEnv::move(Cell c, std::size_t action) const {
  const Cell n = neighbor(c, action);
  return layout_.is_wall(n) ? c : n;
}

EnvStep FourRoomsEnv::step(StateId s, std::size_t action) const {
  if (!is_valid(s)) throw std::invalid_argument("fourrooms: malformed state id " + std::to_string(s));
  if (action >= actions_.size()) throw std::invalid_argument("fourrooms: unknown action");
  if (is_terminal(s)) throw std::logic_error("fourrooms: step from a terminal state");
  const Cell next = move(cell(s), action);
  EnvStep out;
  out.next_state = id(next);
  out.reward = kStepReward;
  if (next == layout_.goal) {
    out.reward += kGoalReward;
    out.terminal = true;
  } else if (layout_.is_danger(next)) {
    out.reward += kDangerReward;
    out.terminal = danger_terminal_;
  }
  return out;
}

std::string FourRoomsEnv::description_text() const {
  std::ostringstream out;
  out << "% Four Rooms: wall-aware movement over (Row, Col)\n";
  out << "fluent Row : 0.." << layout_.rows - 1 << ".\n";
  out << "fluent Col : 0.." << layout_.cols - 1 << ".\n";
  for (const auto& a : actions_) out << "action " << a << ".\n";
  for (int r = 0; r < layout_.rows; ++r) {
    for (int c = 0; c < layout_.cols; ++c) {
      if (layout_.is_wall({r, c})) continue;
      for (std::size_t a = 0; a < actions_.size(); ++a) {
        const Cell n = neighbor({r, c}, a);
        if (layout_.is_wall(n)) continue;
        out << actions_[a] << " causes ";
        if (n.row != r) {
          out << "Row=" << n.row;
        } else {
          out << "Col=" << n.col;
        }
        out << " if Row=" << r << ", Col=" << c << ".\n";
      }
    }
  }
  return out.str();
}

WorldState FourRoomsEnv::to_world(StateId s) const {
  const Cell c = cell(s);
  return WorldState{{c.row, c.col}};
}

std::optional<StateId> FourRoomsEnv::from_world(const WorldState& w) const {
  if (w.values.size() != 2) return std::nullopt;
  const Cell c{w.values[0], w.values[1]};
  if (layout_.is_wall(c)) return std::nullopt;
  return id(c);
}

std::vector<FluentAtom> FourRoomsEnv::goal_condition() const {
  return {FluentAtom{0, layout_.goal.row}, FluentAtom{1, layout_.goal.col}};
}

std::string FourRoomsEnv::state_label(StateId s) const {
  const Cell c = cell(s);
  return std::to_string(c.row) + "," + std::to_string(c.col);
}

std::optional<StateId> FourRoomsEnv::parse_state_label(std::string_view label) const {
  auto parts = split(label, ',');
  if (parts.size() != 2) return std::nullopt;
  try {
    const Cell c{std::stoi(parts[0]), std::stoi(parts[1])};
    if (layout_.is_wall(c)) return std::nullopt;
    return id(c);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int FourRoomsEnv::default_maxstamp() const { return kMaxstampFactor * shortest_plan_length(*this); }

// ---------------------------------------------------------------------------
// Taxi

TaxiInstance TaxiInstance::parse(std::string_view text) {
  TaxiInstance inst;
  inst.landmarks.clear();
  bool have_taxi = false;
  for (const auto& line : content_lines(text)) {
    std::istringstream in(line);
    std::string key;
    in >> key;
    auto read_cell = [&]() {
      Cell c;
      if (!(in >> c.row >> c.col)) throw std::invalid_argument("taxi instance: bad cell in '" + line + "'");
      return c;
    };
    if (key == "grid") {
      if (!(in >> inst.rows >> inst.cols) || inst.rows <= 0 || inst.cols <= 0) {
        throw std::invalid_argument("taxi instance: bad grid size");
      }
    } else if (key == "wall") {
      inst.east_walls.insert(read_cell());
    } else if (key == "landmark") {
      std::string name;
      in >> name;
      inst.landmarks.emplace_back(name, read_cell());
    } else if (key == "taxi") {
      inst.taxi_start = read_cell();
      have_taxi = true;
    } else if (key == "passenger") {
      in >> inst.passenger;
    } else if (key == "destination") {
      in >> inst.destination;
    } else if (key == "wrong_location") {
      inst.wrong_location = read_cell();
    } else if (key == "traffic") {
      inst.traffic.insert(read_cell());
    } else {
      throw std::invalid_argument("taxi instance: unknown key '" + key + "'");
    }
  }
  if (!have_taxi) throw std::invalid_argument("taxi instance: missing taxi start");
  const Cell p = inst.passenger_cell();
  const Cell d = inst.destination_cell();
  if (p == d) throw std::invalid_argument("taxi instance: passenger location equals destination");
  for (const auto& [name, c] : inst.landmarks) {
    if (c.row < 0 || c.row >= inst.rows || c.col < 0 || c.col >= inst.cols) {
      throw std::invalid_argument("taxi instance: landmark " + name + " out of bounds");
    }
  }
  return inst;
}

TaxiInstance TaxiInstance::default_instance() {
  // Classic 5x5 layout; instance reconstructed: taxi starts mid-grid,
  // passenger waits at R, destination is B.
  return parse(
      "grid 5 5\n"
      "wall 0 1\n"
      "wall 1 1\n"
      "wall 3 0\n"
      "wall 4 0\n"
      "wall 3 2\n"
      "wall 4 2\n"
      "landmark R 0 0\n"
      "landmark G 0 4\n"
      "landmark Y 4 0\n"
      "landmark B 4 3\n"
      "taxi 2 3\n"
      "passenger R\n"
      "destination B\n"
      "wrong_location 1 1\n"
      "traffic 1 0\n");
}

std::string TaxiInstance::to_text() const {
  std::ostringstream out;
  out << "grid " << rows << ' ' << cols << '\n';
  for (const auto& w : east_walls) out << "wall " << w.row << ' ' << w.col << '\n';
  for (const auto& [name, c] : landmarks) out << "landmark " << name << ' ' << c.row << ' ' << c.col << '\n';
  out << "taxi " << taxi_start.row << ' ' << taxi_start.col << '\n';
  out << "passenger " << passenger << '\n';
  out << "destination " << destination << '\n';
  if (wrong_location) out << "wrong_location " << wrong_location->row << ' ' << wrong_location->col << '\n';
  for (const auto& c : traffic) out << "traffic " << c.row << ' ' << c.col << '\n';
  return out.str();
}

Cell TaxiInstance::landmark(std::string_view name) const {
  for (const auto& [n, c] : landmarks) {
    if (n == name) return c;
  }
  throw std::invalid_argument("taxi instance: unknown landmark '" + std::string(name) + "'");
}

TaxiEnv::TaxiEnv(TaxiInstance instance) : instance_(std::move(instance)) {
  description_ = std::make_shared<const ActionDescription>(parse_action_description(description_text()));
}

std::size_t TaxiEnv::num_states() const {
  return static_cast<std::size_t>(instance_.rows * instance_.cols * 3);
}

StateId TaxiEnv::id(Cell taxi, Passenger p) const {
  return static_cast<StateId>(cell_index(taxi) + instance_.rows * instance_.cols * static_cast<int>(p));
}

Cell TaxiEnv::taxi_cell(StateId s) const {
  if (!is_valid(s)) throw std::invalid_argument("taxi: state id out of range");
  const int k = static_cast<int>(s) % (instance_.rows * instance_.cols);
  return {k / instance_.cols, k % instance_.cols};
}

TaxiEnv::Passenger TaxiEnv::passenger(StateId s) const {
  if (!is_valid(s)) throw std::invalid_argument("taxi: state id out of range");
  return static_cast<Passenger>(static_cast<int>(s) / (instance_.rows * instance_.cols));
}

bool TaxiEnv::is_terminal(StateId s) const { return passenger(s) == Passenger::delivered; }

Cell TaxiEnv::move(Cell c, std::size_t action) const {
  Cell n = c;
  switch (action) {
    case north: n.row -= 1; break;
    case south: n.row += 1; break;
    case east:
      if (instance_.east_walls.count(c)) return c;
      n.col += 1;
      break;
    case west:
      if (instance_.east_walls.count({c.row, c.col - 1})) return c;
      n.col -= 1;
      break;
    default: throw std::invalid_argument("taxi: not a move action");
  }
  if (n.row < 0 || n.row >= instance_.rows || n.col < 0 || n.col >= instance_.cols) return c;
  return n;
}

EnvStep TaxiEnv::step(StateId s, std::size_t action) const {
  if (!is_valid(s)) throw std::invalid_argument("taxi: malformed state id " + std::to_string(s));
  if (action >= actions_.size()) throw std::invalid_argument("taxi: unknown action");
  if (is_terminal(s)) throw std::logic_error("taxi: step from a terminal state");
  const Cell c = taxi_cell(s);
  const Passenger p = passenger(s);
  EnvStep out;
  out.next_state = s;
  out.reward = kStepReward;
  if (is_move(action)) {
    out.next_state = id(move(c, action), p);
  } else if (action == pickup) {
    if (p == Passenger::waiting && c == instance_.passenger_cell()) {
      out.next_state = id(c, Passenger::riding);
    } else {
      out.reward = kImproperReward;
      out.improper = true;
    }
  } else {
    if (p == Passenger::riding && c == instance_.destination_cell()) {
      out.next_state = id(c, Passenger::delivered);
      out.reward = kDropoffReward;
      out.terminal = true;
    } else {
      out.reward = kImproperReward;
      out.improper = true;
    }
  }
  return out;
}

std::string TaxiEnv::description_text() const {
  const int n = instance_.rows * instance_.cols;
  std::ostringstream out;
  out << "% Taxi: cells are numbered row * " << instance_.cols << " + col\n";
  out << "fluent TaxiLoc : 0.." << n - 1 << ".\n";
  out << "fluent PassLoc : 0.." << n - 1 << ".\n";
  out << "fluent Dest : 0.." << n - 1 << ".\n";
  out << "fluent InTaxi : bool.\n";
  out << "fluent Delivered : bool.\n";
  for (const auto& a : actions_) out << "action " << a << ".\n";
  for (int r = 0; r < instance_.rows; ++r) {
    for (int c = 0; c < instance_.cols; ++c) {
      for (std::size_t a = north; a <= west; ++a) {
        const Cell to = move({r, c}, a);
        if (to == Cell{r, c}) continue;
        out << actions_[a] << " causes TaxiLoc=" << cell_index(to) << " if TaxiLoc=" << cell_index({r, c})
            << ".\n";
      }
    }
  }
  out << "pickup causes InTaxi if TaxiLoc=P, PassLoc=P, ~InTaxi, ~Delivered.\n";
  out << "dropoff causes Delivered if InTaxi, TaxiLoc=D, Dest=D.\n";
  out << "dropoff causes ~InTaxi if InTaxi, TaxiLoc=D, Dest=D.\n";
  return out.str();
}

WorldState TaxiEnv::to_world(StateId s) const {
  const Passenger p = passenger(s);
  return WorldState{{cell_index(taxi_cell(s)), cell_index(instance_.passenger_cell()),
                     cell_index(instance_.destination_cell()), p == Passenger::riding ? 1 : 0,
                     p == Passenger::delivered ? 1 : 0}};
}

std::optional<StateId> TaxiEnv::from_world(const WorldState& w) const {
  if (w.values.size() != 5) return std::nullopt;
  const int n = instance_.rows * instance_.cols;
  if (w.values[0] < 0 || w.values[0] >= n) return std::nullopt;
  if (w.values[1] != cell_index(instance_.passenger_cell())) return std::nullopt;
  if (w.values[2] != cell_index(instance_.destination_cell())) return std::nullopt;
  const bool in_taxi = w.values[3] != 0;
  const bool delivered = w.values[4] != 0;
  if (in_taxi && delivered) return std::nullopt;
  const Passenger p = delivered ? Passenger::delivered : in_taxi ? Passenger::riding : Passenger::waiting;
  const Cell c{w.values[0] / instance_.cols, w.values[0] % instance_.cols};
  return id(c, p);
}

std::vector<FluentAtom> TaxiEnv::goal_condition() const { return {FluentAtom{4, 1}}; }

std::string TaxiEnv::state_label(StateId s) const {
  static constexpr std::array<const char*, 3> names{"waiting", "riding", "delivered"};
  const Cell c = taxi_cell(s);
  return std::to_string(c.row) + "," + std::to_string(c.col) + "," +
         names[static_cast<std::size_t>(passenger(s))];
}

std::optional<StateId> TaxiEnv::parse_state_label(std::string_view label) const {
  auto parts = split(label, ',');
  if (parts.size() != 3) return std::nullopt;
  Passenger p;
  if (parts[2] == "waiting") {
    p = Passenger::waiting;
  } else if (parts[2] == "riding") {
    p = Passenger::riding;
  } else if (parts[2] == "delivered") {
    p = Passenger::delivered;
  } else {
    return std::nullopt;
  }
  try {
    const Cell c{std::stoi(parts[0]), std::stoi(parts[1])};
    if (c.row < 0 || c.row >= instance_.rows || c.col < 0 || c.col >= instance_.cols) return std::nullopt;
    return id(c, p);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int TaxiEnv::default_maxstamp() const { return kMaxstampFactor * shortest_plan_length(*this); }

// ---------------------------------------------------------------------------
// Line world

LineWorldEnv::LineWorldEnv(int length) : length_(length) {
  if (length < 2) throw std::invalid_argument("line: length must be >= 2");
  description_ = std::make_shared<const ActionDescription>(parse_action_description(description_text(length)));
}

std::string LineWorldEnv::description_text(int length) {
  return "fluent Loc : 1.." + std::to_string(length) +
         ".\n"
         "action moveleft.\n"
         "action moveright.\n"
         "moveleft causes Loc=L-1 if Loc=L.\n"
         "moveright causes Loc=L+1 if Loc=L.\n";
}

EnvStep LineWorldEnv::step(StateId s, std::size_t action) const {
  if (!is_valid(s)) throw std::invalid_argument("line: malformed state id " + std::to_string(s));
  if (action >= actions_.size()) throw std::invalid_argument("line: unknown action");
  if (is_terminal(s)) throw std::logic_error("line: step from a terminal state");
  EnvStep out;
  out.reward = kStepReward;
  if (action == moveleft) {
    out.next_state = s == 0 ? 0 : s - 1;
  } else {
    out.next_state = s + 1;
  }
  if (is_terminal(out.next_state)) {
    out.reward += kGoalReward;
    out.terminal = true;
  }
  return out;
}

WorldState LineWorldEnv::to_world(StateId s) const {
  if (!is_valid(s)) throw std::invalid_argument("line: state id out of range");
  return WorldState{{static_cast<int>(s)}};
}

std::optional<StateId> LineWorldEnv::from_world(const WorldState& w) const {
  if (w.values.size() != 1 || w.values[0] < 0 || w.values[0] >= length_) return std::nullopt;
  return static_cast<StateId>(w.values[0]);
}

std::vector<FluentAtom> LineWorldEnv::goal_condition() const { return {FluentAtom{0, length_ - 1}}; }

std::string LineWorldEnv::state_label(StateId s) const { return std::to_string(s + 1); }

std::optional<StateId> LineWorldEnv::parse_state_label(std::string_view label) const {
  try {
    const int loc = std::stoi(std::string(label));
    if (loc < 1 || loc > length_) return std::nullopt;
    return static_cast<StateId>(loc - 1);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::unique_ptr<Environment> make_environment(std::string_view env_id, const std::string& map_path,
                                              bool danger_terminal) {
  if (env_id == "fourrooms") {
    auto layout = map_path.empty() ? FourRoomsLayout::default_layout()
                                   : FourRoomsLayout::parse(read_file(map_path));
    return std::make_unique<FourRoomsEnv>(std::move(layout), danger_terminal);
  }
  if (env_id == "taxi") {
    auto inst = map_path.empty() ? TaxiInstance::default_instance() : TaxiInstance::parse(read_file(map_path));
    return std::make_unique<TaxiEnv>(std::move(inst));
  }
  if (env_id == "line") return std::make_unique<LineWorldEnv>(3);
  throw std::invalid_argument("unknown environment '" + std::string(env_id) + "'");
}

}  // namespace pacman
