#include "reprel/planner.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "reprel/errors.hpp"

namespace reprel::planner {

namespace {

// Parses "name" or "name(t1,t2)" with no nesting; whitespace-tolerant.
Atom parse_atom_text(const std::string& text, const std::string& file, int line) {
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError(file, line, 1, msg + ": " + text);
  };
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  }
  Atom atom;
  auto paren = s.find('(');
  if (paren == std::string::npos) {
    atom.predicate = s;
  } else {
    if (s.back() != ')') fail("missing ')'");
    atom.predicate = s.substr(0, paren);
    std::string inner = s.substr(paren + 1, s.size() - paren - 2);
    std::size_t pos = 0;
    while (pos <= inner.size()) {
      auto comma = inner.find(',', pos);
      std::string term = inner.substr(pos, comma - pos);
      if (term.empty()) fail("empty term");
      atom.args.push_back(make_term(term));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  if (atom.predicate.empty()) fail("empty predicate");
  return atom;
}

}  // namespace

std::vector<SubtaskOperator> parse_operators(const std::string& text,
                                             const std::string& filename) {
  std::vector<SubtaskOperator> out;
  std::istringstream stream(text);
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError(filename, lineno, 1, msg);
  };
  while (std::getline(stream, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream line(raw);
    std::string kw;
    if (!(line >> kw)) continue;
    std::string rest;
    std::getline(line, rest);
    if (kw == "operator") {
      Atom head = parse_atom_text(rest, filename, lineno);
      SubtaskOperator op;
      op.name = head.predicate;
      for (const Term& t : head.args) {
        if (!t.is_variable()) fail("operator parameters must be variables");
        op.params.push_back(t.name);
      }
      out.push_back(std::move(op));
    } else if (kw == "pre" || kw == "add" || kw == "del") {
      if (out.empty()) fail("'" + kw + "' before any operator line");
      bool positive = true;
      std::string body = rest;
      if (auto tilde = body.find('~'); kw == "pre" && tilde != std::string::npos) {
        positive = false;
        body.erase(tilde, 1);
      }
      Atom atom = parse_atom_text(body, filename, lineno);
      for (const Term& t : atom.args) {
        if (t.is_variable() &&
            std::find(out.back().params.begin(), out.back().params.end(), t.name) ==
                out.back().params.end()) {
          fail("variable " + t.name + " not among operator parameters");
        }
      }
      if (kw == "pre") {
        out.back().preconditions.push_back(Literal{std::move(atom), positive});
      } else if (kw == "add") {
        out.back().add_effects.push_back(std::move(atom));
      } else {
        out.back().del_effects.push_back(std::move(atom));
      }
    } else {
      fail("unknown directive: " + kw);
    }
  }
  if (out.empty()) {
    lineno = 0;
    fail("no operators declared");
  }
  return out;
}

std::vector<SubtaskOperator> load_operators(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_operators(buf.str(), path);
}

GroundOperator ground(const SubtaskOperator& op, const std::vector<std::string>& args) {
  if (args.size() != op.params.size()) {
    throw std::invalid_argument("ground: arity mismatch for operator " + op.name);
  }
  Substitution sub;
  for (std::size_t i = 0; i < args.size(); ++i) {
    sub.bind(op.params[i], Term::constant(args[i]));
  }
  GroundOperator g;
  g.step.predicate = op.name;
  for (const std::string& a : args) g.step.args.push_back(Term::constant(a));
  for (const Literal& l : op.preconditions) g.preconditions.push_back(substitute(l, sub));
  for (const Atom& a : op.add_effects) g.add_effects.push_back(substitute(a, sub));
  for (const Atom& a : op.del_effects) g.del_effects.push_back(substitute(a, sub));
  return g;
}

bool applicable(const GroundOperator& op, const State& abs) {
  return std::all_of(op.preconditions.begin(), op.preconditions.end(),
                     [&](const Literal& l) { return holds(abs, l); });
}

State apply(const GroundOperator& op, const State& abs) {
  if (!applicable(op, abs)) {
    throw std::logic_error("apply: preconditions of " + op.step.str() +
                           " do not hold");
  }
  State next = abs;
  for (const Atom& a : op.del_effects) next.erase(a);
  for (const Atom& a : op.add_effects) next.insert(a);
  return next;
}

std::string Plan::str() const {
  std::string out;
  for (const Atom& step : steps) {
    out += step.str();
    out += '\n';
  }
  return out;
}

namespace {

// All groundings of all operators over `objects`, sorted by step text so BFS
// expansion order (and hence the tie-break) is lexicographic.
std::vector<GroundOperator> ground_all(const std::vector<SubtaskOperator>& operators,
                                       const std::vector<std::string>& objects) {
  std::vector<GroundOperator> out;
  for (const SubtaskOperator& op : operators) {
    if (!op.params.empty() && objects.empty()) continue;  // no groundings
    std::vector<std::string> args(op.params.size());
    // odometer over objects^|params|
    std::vector<std::size_t> idx(op.params.size(), 0);
    while (true) {
      for (std::size_t i = 0; i < idx.size(); ++i) args[i] = objects[idx[i]];
      out.push_back(ground(op, args));
      std::size_t k = idx.size();
      while (k > 0 && ++idx[k - 1] == objects.size()) idx[--k] = 0;
      if (k == 0) break;
    }
  }
  std::sort(out.begin(), out.end(), [](const GroundOperator& a, const GroundOperator& b) {
    return a.step.str() < b.step.str();
  });
  return out;
}

}  // namespace

std::optional<Plan> make_plan(const State& initial, const Goal& goal,
                              const std::vector<SubtaskOperator>& operators,
                              const std::vector<std::string>& objects,
                              std::size_t node_budget) {
  if (goal_satisfied(initial, goal)) return Plan{};
  const std::vector<GroundOperator> ground_ops = ground_all(operators, objects);

  struct Node {
    State state;
    int parent = -1;
    int via = -1;  // index into ground_ops
  };
  std::vector<Node> nodes;
  nodes.push_back({initial, -1, -1});
  std::set<std::string> visited{initial.key()};
  std::deque<int> frontier{0};

  auto plan_from = [&](int leaf) {
    Plan plan;
    for (int i = leaf; nodes[i].via >= 0; i = nodes[i].parent) {
      plan.steps.push_back(ground_ops[nodes[i].via].step);
    }
    std::reverse(plan.steps.begin(), plan.steps.end());
    return plan;
  };

  while (!frontier.empty()) {
    int cur = frontier.front();
    frontier.pop_front();
    for (std::size_t g = 0; g < ground_ops.size(); ++g) {
      if (!applicable(ground_ops[g], nodes[cur].state)) continue;
      State next = apply(ground_ops[g], nodes[cur].state);
      if (!visited.insert(next.key()).second) continue;
      nodes.push_back({std::move(next), cur, static_cast<int>(g)});
      if (nodes.size() > node_budget) return std::nullopt;
      int id = static_cast<int>(nodes.size()) - 1;
      if (goal_satisfied(nodes[id].state, goal)) return plan_from(id);
      frontier.push_back(id);
    }
  }
  return std::nullopt;
}

}  // namespace reprel::planner
