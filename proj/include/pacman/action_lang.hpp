#pragma once

// Restricted action language: fluent/action signatures, static laws
// ("A if A1,...,Am") and dynamic laws ("a causes A0 if A1,...,Am"), with
// transition semantics under universal inertia.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pacman {

using FluentId = std::size_t;
using ActionId = std::size_t;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Inconsistency, conflicting effects, undeclared symbols used programmatically.
class SemanticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FluentDecl {
  enum class Kind { integer_range, enumerated, boolean };

  std::string name;
  Kind kind = Kind::boolean;
  int lo = 0;  // integer_range only
  int hi = 1;
  std::vector<std::string> symbols;  // enumerated only

  static FluentDecl integer(std::string name, int lo, int hi);
  static FluentDecl enumeration(std::string name, std::vector<std::string> symbols);
  static FluentDecl boolean_fluent(std::string name);

  // Values are stored as dense indices 0..size()-1. For boolean fluents index
  // 1 is true; for integer ranges index i is lo + i.
  int size() const;
  std::string value_label(int value) const;
  std::optional<int> value_of_label(std::string_view label) const;

  bool operator==(const FluentDecl&) const = default;
};

struct FluentAtom {
  FluentId fluent = 0;
  int value = 0;

  auto operator<=>(const FluentAtom&) const = default;
};

struct StaticLaw {
  FluentAtom head;
  std::vector<FluentAtom> body;

  bool operator==(const StaticLaw&) const = default;
};

struct DynamicLaw {
  ActionId action = 0;
  FluentAtom effect;
  std::vector<FluentAtom> preconditions;

  bool operator==(const DynamicLaw&) const = default;
};

struct ActionDescription {
  std::vector<FluentDecl> fluents;
  std::vector<std::string> actions;
  std::vector<StaticLaw> statics;
  std::vector<DynamicLaw> dynamics;

  std::optional<FluentId> find_fluent(std::string_view name) const;
  std::optional<ActionId> find_action(std::string_view name) const;
  FluentId fluent(std::string_view name) const;  // throws SemanticError
  ActionId action(std::string_view name) const;  // throws SemanticError

  // Build an atom from a fluent name and a value label ("3", "red", "true").
  FluentAtom atom(std::string_view fluent, std::string_view value) const;

  std::string atom_to_string(const FluentAtom& atom) const;

  // Throws SemanticError if any law references an undeclared symbol or an
  // out-of-domain value, or if names are duplicated.
  void validate() const;

  bool operator==(const ActionDescription&) const = default;
};

// Total assignment: values[f] is the value index of fluent f.
struct WorldState {
  std::vector<int> values;

  bool holds(const FluentAtom& atom) const { return values.at(atom.fluent) == atom.value; }
  bool holds_all(std::span<const FluentAtom> atoms) const;

  auto operator<=>(const WorldState&) const = default;
};

struct WorldStateHash {
  std::size_t operator()(const WorldState& s) const noexcept;
};

// Parses the line-oriented surface syntax:
//   fluent <name> : <int>..<int> | {v1,...,vk} | bool.
//   action <name>.
//   <head-atom> [if <atom>, ...].
//   <action> causes <atom> [if <atom>, ...].
// Schema variables (capitalized identifiers in value position, e.g. Loc=L+1)
// are grounded over the domain of the fluent they are bound to; ground
// instances with an out-of-range value are dropped.
ActionDescription parse_action_description(std::string_view text);

// Ground pretty-printer; parse_action_description(to_text(d)) == d.
std::string to_text(const ActionDescription& d);

// Least fixpoint of forward application of static laws. Throws SemanticError
// if the input or the closure assigns a fluent two values. The result is
// sorted by fluent.
std::vector<FluentAtom> closure(std::span<const FluentAtom> partial,
                                std::span<const StaticLaw> statics);

// Unique closed total state extending `atoms`; throws SemanticError if the
// closure is inconsistent or leaves a fluent unassigned.
WorldState complete_state(const ActionDescription& d, std::span<const FluentAtom> atoms);

// True when every static law whose body holds in `s` also has its head hold.
bool is_closed(const WorldState& s, std::span<const StaticLaw> statics);

// Successor of `s` under action `a`: effects of every applicable dynamic law,
// inertia for everything else, then closure under static laws (static laws
// override inertia but never direct effects). Throws SemanticError on
// conflicting effects or an inconsistent closure.
WorldState apply(const WorldState& s, ActionId a, const ActionDescription& d);

// All states reachable from `initial` under any action sequence (BFS order).
std::vector<WorldState> reachable_states(const ActionDescription& d, const WorldState& initial);

std::string state_to_string(const ActionDescription& d, const WorldState& s);

// Parses a comma-separated atom list such as "Loc=1" or "InTaxi, TaxiLoc=3".
std::vector<FluentAtom> parse_condition(const ActionDescription& d, std::string_view text);

}  // namespace pacman
