#include "reprel/relational.hpp"

#include <stdexcept>

namespace reprel {

bool is_variable_name(std::string_view name) {
  return !name.empty() && name.front() >= 'A' && name.front() <= 'Z';
}

Term make_term(std::string_view name) {
  return is_variable_name(name) ? Term::var(std::string(name))
                                : Term::constant(std::string(name));
}

bool Atom::ground() const {
  for (const Term& t : args) {
    if (t.is_variable()) return false;
  }
  return true;
}

std::string Atom::str() const {
  if (args.empty()) return predicate;
  std::string out = predicate;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out += ',';
    out += args[i].name;
  }
  out += ')';
  return out;
}

Atom make_atom(std::string predicate, std::initializer_list<std::string> args) {
  Atom a;
  a.predicate = std::move(predicate);
  for (const std::string& s : args) a.args.push_back(make_term(s));
  return a;
}

std::string Literal::str() const {
  return positive ? atom.str() : "~" + atom.str();
}

Substitution::Substitution(
    std::initializer_list<std::pair<std::string, Term>> bindings) {
  for (const auto& [var, value] : bindings) bind(var, value);
}

void Substitution::bind(const std::string& var, Term value) {
  auto it = bindings_.find(var);
  if (it == bindings_.end()) {
    bindings_.emplace(var, std::move(value));
  } else if (it->second != value) {
    throw std::invalid_argument("conflicting binding for variable " + var);
  }
}

const Term* Substitution::lookup(const std::string& var) const {
  auto it = bindings_.find(var);
  return it == bindings_.end() ? nullptr : &it->second;
}

Term substitute(const Term& term, const Substitution& theta) {
  if (term.is_variable()) {
    if (const Term* bound = theta.lookup(term.name)) return *bound;
  }
  return term;
}

Atom substitute(const Atom& atom, const Substitution& theta) {
  Atom out;
  out.predicate = atom.predicate;
  out.args.reserve(atom.args.size());
  for (const Term& t : atom.args) out.args.push_back(substitute(t, theta));
  return out;
}

Literal substitute(const Literal& lit, const Substitution& theta) {
  return {substitute(lit.atom, theta), lit.positive};
}

std::optional<Substitution> unify(const Atom& pattern, const Atom& ground) {
  if (!ground.ground()) {
    throw std::invalid_argument("unify: right-hand side must be ground");
  }
  if (pattern.predicate != ground.predicate) return std::nullopt;
  if (pattern.args.size() != ground.args.size()) return std::nullopt;
  Substitution theta;
  for (std::size_t i = 0; i < pattern.args.size(); ++i) {
    const Term& p = pattern.args[i];
    const Term& g = ground.args[i];
    if (p.is_variable()) {
      const Term* bound = theta.lookup(p.name);
      if (bound == nullptr) {
        theta.bind(p.name, g);
      } else if (*bound != g) {
        return std::nullopt;  // repeated variable bound to two constants
      }
    } else if (p != g) {
      return std::nullopt;  // constant clash
    }
  }
  return theta;
}

std::optional<Substitution> unify(const Literal& pattern, const Literal& ground) {
  if (pattern.positive != ground.positive) return std::nullopt;
  return unify(pattern.atom, ground.atom);
}

State::State(std::set<Atom> atoms) : facts(std::move(atoms)) {
  for (const Atom& a : facts) {
    if (!a.ground()) {
      throw std::invalid_argument("state atom must be ground: " + a.str());
    }
  }
}

void State::insert(Atom atom) {
  if (!atom.ground()) {
    throw std::invalid_argument("state atom must be ground: " + atom.str());
  }
  facts.insert(std::move(atom));
}

std::string State::key() const {
  std::string out;
  for (const Atom& a : facts) {
    if (!out.empty()) out += ';';
    out += a.str();
  }
  return out;
}

bool holds(const State& state, const Literal& lit) {
  if (!lit.ground()) {
    throw std::invalid_argument("holds: literal must be ground: " + lit.str());
  }
  bool present = state.contains(lit.atom);
  return lit.positive ? present : !present;
}

bool goal_satisfied(const State& state, const Goal& goal) {
  for (const Literal& lit : goal.literals) {
    if (!holds(state, lit)) return false;
  }
  return true;
}

}  // namespace reprel
