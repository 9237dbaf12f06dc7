#include "pacman/action_lang.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>
#include <variant>

namespace pacman {

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + what),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// FluentDecl

FluentDecl FluentDecl::integer(std::string name, int lo, int hi) {
  FluentDecl d;
  d.name = std::move(name);
  d.kind = Kind::integer_range;
  d.lo = lo;
  d.hi = hi;
  return d;
}

FluentDecl FluentDecl::enumeration(std::string name, std::vector<std::string> symbols) {
  FluentDecl d;
  d.name = std::move(name);
  d.kind = Kind::enumerated;
  d.lo = 0;
  d.hi = static_cast<int>(symbols.size()) - 1;
  d.symbols = std::move(symbols);
  return d;
}

FluentDecl FluentDecl::boolean_fluent(std::string name) {
  FluentDecl d;
  d.name = std::move(name);
  d.kind = Kind::boolean;
  return d;
}

int FluentDecl::size() const {
  switch (kind) {
    case Kind::integer_range:
      return hi - lo + 1;
    case Kind::enumerated:
      return static_cast<int>(symbols.size());
    case Kind::boolean:
      return 2;
  }
  return 0;
}

std::string FluentDecl::value_label(int value) const {
  switch (kind) {
    case Kind::integer_range:
      return std::to_string(lo + value);
    case Kind::enumerated:
      return symbols.at(static_cast<std::size_t>(value));
    case Kind::boolean:
      return value != 0 ? "true" : "false";
  }
  return {};
}

std::optional<int> FluentDecl::value_of_label(std::string_view label) const {
  switch (kind) {
    case Kind::integer_range: {
      if (label.empty()) return std::nullopt;
      std::size_t pos = 0;
      int v = 0;
      try {
        v = std::stoi(std::string(label), &pos);
      } catch (const std::exception&) {
        return std::nullopt;
      }
      if (pos != label.size() || v < lo || v > hi) return std::nullopt;
      return v - lo;
    }
    case Kind::enumerated: {
      auto it = std::find(symbols.begin(), symbols.end(), label);
      if (it == symbols.end()) return std::nullopt;
      return static_cast<int>(it - symbols.begin());
    }
    case Kind::boolean:
      if (label == "true") return 1;
      if (label == "false") return 0;
      return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ActionDescription

std::optional<FluentId> ActionDescription::find_fluent(std::string_view name) const {
  for (FluentId i = 0; i < fluents.size(); ++i) {
    if (fluents[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<ActionId> ActionDescription::find_action(std::string_view name) const {
  for (ActionId i = 0; i < actions.size(); ++i) {
    if (actions[i] == name) return i;
  }
  return std::nullopt;
}

FluentId ActionDescription::fluent(std::string_view name) const {
  auto f = find_fluent(name);
  if (!f) throw SemanticError("undeclared fluent '" + std::string(name) + "'");
  return *f;
}

ActionId ActionDescription::action(std::string_view name) const {
  auto a = find_action(name);
  if (!a) throw SemanticError("undeclared action '" + std::string(name) + "'");
  return *a;
}

FluentAtom ActionDescription::atom(std::string_view fluent_name, std::string_view value) const {
  const FluentId f = fluent(fluent_name);
  auto v = fluents[f].value_of_label(value);
  if (!v) {
    throw SemanticError("value '" + std::string(value) + "' is outside the domain of fluent '" +
                        std::string(fluent_name) + "'");
  }
  return FluentAtom{f, *v};
}

std::string ActionDescription::atom_to_string(const FluentAtom& a) const {
  const FluentDecl& decl = fluents.at(a.fluent);
  if (decl.kind == FluentDecl::Kind::boolean) return (a.value != 0 ? "" : "~") + decl.name;
  return decl.name + "=" + decl.value_label(a.value);
}

void ActionDescription::validate() const {
  std::set<std::string> names;
  for (const auto& f : fluents) {
    if (!names.insert(f.name).second) throw SemanticError("duplicate symbol '" + f.name + "'");
    if (f.size() <= 0) throw SemanticError("fluent '" + f.name + "' has an empty domain");
  }
  for (const auto& a : actions) {
    if (!names.insert(a).second) throw SemanticError("duplicate symbol '" + a + "'");
  }
  auto check_atom = [&](const FluentAtom& atom) {
    if (atom.fluent >= fluents.size()) throw SemanticError("law references an undeclared fluent");
    if (atom.value < 0 || atom.value >= fluents[atom.fluent].size()) {
      throw SemanticError("value outside the domain of fluent '" + fluents[atom.fluent].name + "'");
    }
  };
  for (const auto& law : statics) {
    check_atom(law.head);
    for (const auto& b : law.body) check_atom(b);
  }
  for (const auto& law : dynamics) {
    if (law.action >= actions.size()) throw SemanticError("law references an undeclared action");
    check_atom(law.effect);
    for (const auto& p : law.preconditions) check_atom(p);
  }
}

bool WorldState::holds_all(std::span<const FluentAtom> atoms) const {
  return std::all_of(atoms.begin(), atoms.end(), [this](const FluentAtom& a) { return holds(a); });
}

std::size_t WorldStateHash::operator()(const WorldState& s) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (int v : s.values) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { ident, integer, dot, dotdot, comma, equals, plus, minus, tilde, colon, lbrace, rbrace };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

std::vector<Token> lex_line(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    const int col = static_cast<int>(i) + 1;
    if (c == '%') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) {
        ++j;
      }
      out.push_back({Tok::ident, std::string(line.substr(i, j - i)), line_no, col});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      out.push_back({Tok::integer, std::string(line.substr(i, j - i)), line_no, col});
      i = j;
      continue;
    }
    Tok kind;
    std::size_t len = 1;
    switch (c) {
      case '.':
        if (i + 1 < line.size() && line[i + 1] == '.') {
          kind = Tok::dotdot;
          len = 2;
        } else {
          kind = Tok::dot;
        }
        break;
      case ',': kind = Tok::comma; break;
      case '=': kind = Tok::equals; break;
      case '+': kind = Tok::plus; break;
      case '-': kind = Tok::minus; break;
      case '~': kind = Tok::tilde; break;
      case ':': kind = Tok::colon; break;
      case '{': kind = Tok::lbrace; break;
      case '}': kind = Tok::rbrace; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_no, col);
    }
    out.push_back({kind, std::string(line.substr(i, len)), line_no, col});
    i += len;
  }
  return out;
}

bool is_reserved(std::string_view s) {
  return s == "fluent" || s == "action" || s == "causes" || s == "if" || s == "bool" ||
         s == "true" || s == "false";
}

// A value term before grounding: either a constant value index or a schema
// variable plus integer offset.
struct RawValue {
  bool is_variable = false;
  int constant = 0;
  std::string variable;
  int offset = 0;
};

struct RawAtom {
  FluentId fluent = 0;
  RawValue value;
  int line = 0;
  int column = 0;
};

// Value assigned to a schema variable during grounding.
struct VarValue {
  bool is_int = false;
  int number = 0;
  std::string symbol;
};

class ClauseParser {
 public:
  ClauseParser(const std::vector<Token>& toks, ActionDescription& d) : toks_(toks), d_(d) {}

  void parse() {
    if (toks_.back().kind != Tok::dot) {
      fail("clause must end with '.'", toks_.back());
    }
    const Token& first = toks_.front();
    if (first.kind == Tok::ident && first.text == "fluent") {
      parse_fluent_decl();
    } else if (first.kind == Tok::ident && first.text == "action") {
      parse_action_decl();
    } else if (toks_.size() > 1 && toks_[1].kind == Tok::ident && toks_[1].text == "causes") {
      parse_dynamic();
    } else {
      parse_static();
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg, at.line, at.column);
  }

  const Token& peek() const { return toks_.at(pos_); }
  const Token& next() { return toks_.at(pos_++); }
  bool at_end() const { return pos_ + 1 == toks_.size(); }  // only the final '.' left

  const Token& expect(Tok kind, const char* what) {
    const Token& t = peek();
    if (t.kind != kind) fail(std::string("expected ") + what + ", found '" + t.text + "'", t);
    return next();
  }

  std::string expect_name(const char* what) {
    const Token& t = expect(Tok::ident, what);
    if (is_reserved(t.text)) fail("'" + t.text + "' is a reserved word", t);
    return t.text;
  }

  int expect_int() {
    bool neg = false;
    if (peek().kind == Tok::minus) {
      next();
      neg = true;
    }
    const Token& t = expect(Tok::integer, "integer");
    const int v = std::stoi(t.text);
    return neg ? -v : v;
  }

  void check_fresh(const std::string& name, const Token& at) const {
    if (d_.find_fluent(name) || d_.find_action(name)) fail("duplicate symbol '" + name + "'", at);
  }

  void parse_fluent_decl() {
    next();  // fluent
    const Token& name_tok = peek();
    const std::string name = expect_name("fluent name");
    check_fresh(name, name_tok);
    expect(Tok::colon, "':'");
    FluentDecl decl;
    if (peek().kind == Tok::ident && peek().text == "bool") {
      next();
      decl = FluentDecl::boolean_fluent(name);
    } else if (peek().kind == Tok::lbrace) {
      next();
      std::vector<std::string> symbols;
      while (true) {
        const Token& sym_tok = peek();
        std::string sym;
        if (sym_tok.kind == Tok::integer) {
          sym = next().text;
        } else {
          sym = expect_name("domain value");
        }
        if (std::find(symbols.begin(), symbols.end(), sym) != symbols.end()) {
          fail("duplicate domain value '" + sym + "'", sym_tok);
        }
        symbols.push_back(sym);
        if (peek().kind == Tok::comma) {
          next();
          continue;
        }
        expect(Tok::rbrace, "'}'");
        break;
      }
      decl = FluentDecl::enumeration(name, std::move(symbols));
    } else {
      const Token& lo_tok = peek();
      const int lo = expect_int();
      expect(Tok::dotdot, "'..'");
      const int hi = expect_int();
      if (hi < lo) fail("empty integer range", lo_tok);
      decl = FluentDecl::integer(name, lo, hi);
    }
    if (!at_end()) fail("unexpected tokens after fluent declaration", peek());
    d_.fluents.push_back(std::move(decl));
  }

  void parse_action_decl() {
    next();  // action
    while (true) {
      const Token& name_tok = peek();
      const std::string name = expect_name("action name");
      check_fresh(name, name_tok);
      d_.actions.push_back(name);
      if (peek().kind == Tok::comma) {
        next();
        continue;
      }
      break;
    }
    if (!at_end()) fail("unexpected tokens after action declaration", peek());
  }

  RawAtom parse_atom() {
    const Token& start = peek();
    bool negated = false;
    if (start.kind == Tok::tilde) {
      next();
      negated = true;
    }
    const Token& name_tok = peek();
    const std::string name = expect_name("fluent name");
    auto f = d_.find_fluent(name);
    if (!f) fail("undeclared fluent '" + name + "'", name_tok);
    const FluentDecl& decl = d_.fluents[*f];
    RawAtom atom;
    atom.fluent = *f;
    atom.line = start.line;
    atom.column = start.column;
    if (negated || peek().kind != Tok::equals) {
      if (decl.kind != FluentDecl::Kind::boolean) {
        fail("fluent '" + name + "' is not Boolean; write " + name + "=<value>", name_tok);
      }
      atom.value.constant = negated ? 0 : 1;
      return atom;
    }
    next();  // '='
    const Token& v = peek();
    if (v.kind == Tok::integer || v.kind == Tok::minus) {
      const int number = expect_int();
      if (decl.kind == FluentDecl::Kind::enumerated) {
        auto idx = decl.value_of_label(std::to_string(number));
        if (!idx) fail("value " + std::to_string(number) + " is outside the domain of '" + name + "'", v);
        atom.value.constant = *idx;
        return atom;
      }
      if (decl.kind != FluentDecl::Kind::integer_range || number < decl.lo || number > decl.hi) {
        fail("value " + std::to_string(number) + " is outside the domain of '" + name + "'", v);
      }
      atom.value.constant = number - decl.lo;
      return atom;
    }
    if (v.kind != Tok::ident) fail("expected a value after '='", v);
    next();
    if (auto idx = decl.value_of_label(v.text)) {
      atom.value.constant = *idx;
      return atom;
    }
    if (!std::isupper(static_cast<unsigned char>(v.text[0])) || d_.find_fluent(v.text) ||
        d_.find_action(v.text)) {
      fail("value '" + v.text + "' is outside the domain of '" + name + "'", v);
    }
    atom.value.is_variable = true;
    atom.value.variable = v.text;
    if (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      const bool minus = next().kind == Tok::minus;
      const Token& off = expect(Tok::integer, "integer offset");
      if (decl.kind != FluentDecl::Kind::integer_range) {
        fail("arithmetic on a non-integer fluent '" + name + "'", off);
      }
      atom.value.offset = minus ? -std::stoi(off.text) : std::stoi(off.text);
    }
    return atom;
  }

  std::vector<RawAtom> parse_atom_list() {
    std::vector<RawAtom> atoms;
    atoms.push_back(parse_atom());
    while (peek().kind == Tok::comma) {
      next();
      atoms.push_back(parse_atom());
    }
    return atoms;
  }

  std::vector<RawAtom> parse_optional_body() {
    if (at_end()) return {};
    const Token& t = peek();
    if (t.kind != Tok::ident || t.text != "if") fail("expected 'if' or '.'", t);
    next();
    auto body = parse_atom_list();
    if (!at_end()) fail("unexpected token '" + peek().text + "'", peek());
    return body;
  }

  void parse_dynamic() {
    const Token& act_tok = peek();
    const std::string act = expect_name("action name");
    auto a = d_.find_action(act);
    if (!a) fail("undeclared action '" + act + "'", act_tok);
    next();  // causes
    RawAtom effect = parse_atom();
    std::vector<RawAtom> pre = parse_optional_body();
    std::vector<RawAtom> all{effect};
    all.insert(all.end(), pre.begin(), pre.end());
    ground(all, [&](const std::vector<FluentAtom>& g) {
      d_.dynamics.push_back(DynamicLaw{*a, g.front(), {g.begin() + 1, g.end()}});
    });
  }

  void parse_static() {
    RawAtom head = parse_atom();
    std::vector<RawAtom> body = parse_optional_body();
    std::vector<RawAtom> all{head};
    all.insert(all.end(), body.begin(), body.end());
    ground(all, [&](const std::vector<FluentAtom>& g) {
      d_.statics.push_back(StaticLaw{g.front(), {g.begin() + 1, g.end()}});
    });
  }

  // Enumerates every assignment of the clause's schema variables and emits the
  // ground atom lists whose values all fall inside their fluent domains.
  template <typename Emit>
  void ground(const std::vector<RawAtom>& atoms, Emit emit) {
    std::vector<std::string> vars;
    std::map<std::string, FluentId> binder;
    for (const auto& a : atoms) {
      if (!a.value.is_variable) continue;
      if (std::find(vars.begin(), vars.end(), a.value.variable) == vars.end()) {
        vars.push_back(a.value.variable);
      }
      if (a.value.offset == 0 && !binder.count(a.value.variable)) binder[a.value.variable] = a.fluent;
    }
    for (const auto& v : vars) {
      if (!binder.count(v)) {
        const auto& a = *std::find_if(atoms.begin(), atoms.end(), [&](const RawAtom& r) {
          return r.value.is_variable && r.value.variable == v;
        });
        throw ParseError("schema variable '" + v + "' is not bound by a plain <fluent>=" + v + " atom",
                         a.line, a.column);
      }
    }
    std::vector<std::vector<VarValue>> domains;
    for (const auto& v : vars) {
      const FluentDecl& decl = d_.fluents[binder[v]];
      std::vector<VarValue> dom;
      for (int i = 0; i < decl.size(); ++i) {
        VarValue val;
        if (decl.kind == FluentDecl::Kind::integer_range) {
          val.is_int = true;
          val.number = decl.lo + i;
        }
        val.symbol = decl.value_label(i);
        dom.push_back(std::move(val));
      }
      domains.push_back(std::move(dom));
    }
    std::vector<std::size_t> idx(vars.size(), 0);
    while (true) {
      std::vector<FluentAtom> g;
      bool ok = true;
      for (const auto& a : atoms) {
        FluentAtom out{a.fluent, a.value.constant};
        if (a.value.is_variable) {
          const auto vi = static_cast<std::size_t>(
              std::find(vars.begin(), vars.end(), a.value.variable) - vars.begin());
          const VarValue& val = domains[vi][idx[vi]];
          const FluentDecl& decl = d_.fluents[a.fluent];
          std::optional<int> resolved;
          if (decl.kind == FluentDecl::Kind::integer_range && val.is_int) {
            resolved = decl.value_of_label(std::to_string(val.number + a.value.offset));
          } else if (a.value.offset == 0) {
            resolved = decl.value_of_label(val.symbol);
          }
          if (!resolved) {
            ok = false;
            break;
          }
          out.value = *resolved;
        }
        g.push_back(out);
      }
      if (ok) emit(g);
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == domains[k].size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }

  const std::vector<Token>& toks_;
  ActionDescription& d_;
  std::size_t pos_ = 0;
};

}  // namespace

ActionDescription parse_action_description(std::string_view text) {
  ActionDescription d;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto toks = lex_line(line, line_no);
    if (!toks.empty()) ClauseParser(toks, d).parse();
    start = end + 1;
  }
  return d;
}

std::string to_text(const ActionDescription& d) {
  std::ostringstream out;
  for (const auto& f : d.fluents) {
    out << "fluent " << f.name << " : ";
    switch (f.kind) {
      case FluentDecl::Kind::integer_range:
        out << f.lo << ".." << f.hi;
        break;
      case FluentDecl::Kind::enumerated: {
        out << '{';
        for (std::size_t i = 0; i < f.symbols.size(); ++i) out << (i ? "," : "") << f.symbols[i];
        out << '}';
        break;
      }
      case FluentDecl::Kind::boolean:
        out << "bool";
        break;
    }
    out << ".\n";
  }
  for (const auto& a : d.actions) out << "action " << a << ".\n";
  auto body = [&](const std::vector<FluentAtom>& atoms) {
    if (atoms.empty()) return;
    out << " if ";
    for (std::size_t i = 0; i < atoms.size(); ++i) out << (i ? ", " : "") << d.atom_to_string(atoms[i]);
  };
  for (const auto& law : d.statics) {
    out << d.atom_to_string(law.head);
    body(law.body);
    out << ".\n";
  }
  for (const auto& law : d.dynamics) {
    out << d.actions.at(law.action) << " causes " << d.atom_to_string(law.effect);
    body(law.preconditions);
    out << ".\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Semantics

std::vector<FluentAtom> closure(std::span<const FluentAtom> partial,
                                std::span<const StaticLaw> statics) {
  std::map<FluentId, int> assigned;
  auto assign = [&](const FluentAtom& a) {
    auto [it, inserted] = assigned.emplace(a.fluent, a.value);
    if (!inserted && it->second != a.value) {
      throw SemanticError("inconsistent assignment: fluent " + std::to_string(a.fluent) +
                          " forced to two values");
    }
    return inserted;
  };
  for (const auto& a : partial) assign(a);
  auto holds = [&](const FluentAtom& a) {
    auto it = assigned.find(a.fluent);
    return it != assigned.end() && it->second == a.value;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& law : statics) {
      if (std::all_of(law.body.begin(), law.body.end(), holds) && assign(law.head)) changed = true;
    }
  }
  std::vector<FluentAtom> out;
  out.reserve(assigned.size());
  for (const auto& [f, v] : assigned) out.push_back({f, v});
  return out;
}

WorldState complete_state(const ActionDescription& d, std::span<const FluentAtom> atoms) {
  auto closed = closure(atoms, d.statics);
  WorldState s;
  s.values.assign(d.fluents.size(), -1);
  for (const auto& a : closed) s.values.at(a.fluent) = a.value;
  for (FluentId f = 0; f < d.fluents.size(); ++f) {
    if (s.values[f] < 0) {
      throw SemanticError("condition does not determine fluent '" + d.fluents[f].name + "'");
    }
  }
  return s;
}

bool is_closed(const WorldState& s, std::span<const StaticLaw> statics) {
  return std::all_of(statics.begin(), statics.end(), [&](const StaticLaw& law) {
    return !s.holds_all(law.body) || s.holds(law.head);
  });
}

WorldState apply(const WorldState& s, ActionId a, const ActionDescription& d) {
  if (a >= d.actions.size()) throw SemanticError("action index out of range");
  std::vector<int> forced(d.fluents.size(), -1);
  WorldState next = s;
  for (const auto& law : d.dynamics) {
    if (law.action != a || !s.holds_all(law.preconditions)) continue;
    int& slot = forced.at(law.effect.fluent);
    if (slot >= 0 && slot != law.effect.value) {
      throw SemanticError("conflicting effects of action '" + d.actions[a] + "' on fluent '" +
                          d.fluents[law.effect.fluent].name + "'");
    }
    slot = law.effect.value;
    next.values[law.effect.fluent] = law.effect.value;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& law : d.statics) {
      if (!next.holds_all(law.body) || next.holds(law.head)) continue;
      int& slot = forced.at(law.head.fluent);
      if (slot >= 0 && slot != law.head.value) {
        throw SemanticError("static law contradicts the value of fluent '" +
                            d.fluents[law.head.fluent].name + "'");
      }
      slot = law.head.value;
      next.values[law.head.fluent] = law.head.value;
      changed = true;
    }
  }
  return next;
}

std::vector<WorldState> reachable_states(const ActionDescription& d, const WorldState& initial) {
  std::vector<WorldState> order{initial};
  std::unordered_set<WorldState, WorldStateHash> seen{initial};
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (ActionId a = 0; a < d.actions.size(); ++a) {
      WorldState n = apply(order[i], a, d);
      if (seen.insert(n).second) order.push_back(std::move(n));
    }
  }
  return order;
}

std::string state_to_string(const ActionDescription& d, const WorldState& s) {
  std::string out = "{";
  for (FluentId f = 0; f < s.values.size(); ++f) {
    if (f) out += ", ";
    out += d.atom_to_string(FluentAtom{f, s.values[f]});
  }
  return out + "}";
}

std::vector<FluentAtom> parse_condition(const ActionDescription& d, std::string_view text) {
  std::vector<FluentAtom> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string item(text.substr(start, end - start));
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    start = end + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      const bool neg = item[0] == '~';
      const std::string name = neg ? item.substr(1) : item;
      const FluentId f = d.fluent(name);
      if (d.fluents[f].kind != FluentDecl::Kind::boolean) {
        throw SemanticError("fluent '" + name + "' is not Boolean");
      }
      out.push_back({f, neg ? 0 : 1});
    } else {
      std::string name = item.substr(0, eq);
      std::string value = item.substr(eq + 1);
      name.erase(name.find_last_not_of(" \t") + 1);
      value.erase(0, value.find_first_not_of(" \t"));
      out.push_back(d.atom(name, value));
    }
  }
  return out;
}

}  // namespace pacman
