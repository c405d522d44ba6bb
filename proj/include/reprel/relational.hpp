#pragma once

#include <compare>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace reprel {

enum class TermKind { Variable, Constant };

/// A first-order term: a variable or a constant. No function symbols.
/// Lexical convention: names starting with an uppercase letter are variables,
/// everything else (lowercase or digit start) is a constant.
struct Term {
  TermKind kind = TermKind::Constant;
  std::string name;

  static Term var(std::string name) { return {TermKind::Variable, std::move(name)}; }
  static Term constant(std::string name) { return {TermKind::Constant, std::move(name)}; }

  bool is_variable() const { return kind == TermKind::Variable; }
  const std::string& str() const { return name; }

  auto operator<=>(const Term&) const = default;
};

/// True when `name` denotes a variable under the lexical convention.
bool is_variable_name(std::string_view name);

/// Classify an identifier into a variable or constant term.
Term make_term(std::string_view name);

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  bool ground() const;
  std::string str() const;  // "pred(a,B)" or bare "pred" for arity 0

  auto operator<=>(const Atom&) const = default;
};

Atom make_atom(std::string predicate, std::initializer_list<std::string> args);

struct Literal {
  Atom atom;
  bool positive = true;

  bool ground() const { return atom.ground(); }
  std::string str() const;  // "~" prefix when negative

  auto operator<=>(const Literal&) const = default;
};

/// A variable binding map. Applying a substitution with a ground codomain is
/// idempotent.
class Substitution {
 public:
  Substitution() = default;
  Substitution(std::initializer_list<std::pair<std::string, Term>> bindings);

  /// Binds `var`; rebinding to a different value throws std::invalid_argument.
  void bind(const std::string& var, Term value);
  const Term* lookup(const std::string& var) const;
  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  const std::map<std::string, Term>& bindings() const { return bindings_; }

  bool operator==(const Substitution&) const = default;

 private:
  std::map<std::string, Term> bindings_;
};

Term substitute(const Term& term, const Substitution& theta);
Atom substitute(const Atom& atom, const Substitution& theta);
Literal substitute(const Literal& lit, const Substitution& theta);

/// Matches `pattern` (may contain variables) against a ground literal.
/// Returns the unique substitution theta with substitute(pattern, theta) ==
/// ground, or nullopt on predicate/arity/polarity/constant mismatch.
/// Throws std::invalid_argument when `ground` is not ground.
std::optional<Substitution> unify(const Literal& pattern, const Literal& ground);
std::optional<Substitution> unify(const Atom& pattern, const Atom& ground);

/// A set of ground atoms under the closed-world assumption: anything not in
/// the set is false.
struct State {
  std::set<Atom> facts;

  State() = default;
  explicit State(std::set<Atom> atoms);

  bool contains(const Atom& atom) const { return facts.count(atom) > 0; }
  void insert(Atom atom);
  void erase(const Atom& atom) { facts.erase(atom); }
  std::size_t size() const { return facts.size(); }

  /// Canonical serialized form; equal states produce identical keys.
  std::string key() const;

  bool operator==(const State&) const = default;
  auto operator<=>(const State&) const = default;
};

/// A conjunction of ground literals.
struct Goal {
  std::set<Literal> literals;

  bool operator==(const Goal&) const = default;
};

/// Closed-world satisfaction of a single ground literal.
/// Throws std::invalid_argument when `lit` is not ground.
bool holds(const State& state, const Literal& lit);

/// Conjunction of holds() over the goal literals; empty goal is satisfied.
bool goal_satisfied(const State& state, const Goal& goal);

}  // namespace reprel
