#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reprel/relational.hpp"

namespace reprel::planner {

// STRIPS-style sub-task operator over typed parameters. Preconditions are
// evaluated closed-world on the planning projection.
struct SubtaskOperator {
  std::string name;
  std::vector<std::string> params;     // variable names
  std::vector<Literal> preconditions;  // first-order over params
  std::vector<Atom> add_effects;
  std::vector<Atom> del_effects;
};

std::vector<SubtaskOperator> parse_operators(const std::string& text,
                                             const std::string& filename);
std::vector<SubtaskOperator> load_operators(const std::string& path);

struct GroundOperator {
  Atom step;  // e.g. pickup(p1)
  std::vector<Literal> preconditions;
  std::vector<Atom> add_effects;
  std::vector<Atom> del_effects;
};

// Binds op's parameters to `args` positionally.
GroundOperator ground(const SubtaskOperator& op, const std::vector<std::string>& args);

bool applicable(const GroundOperator& op, const State& abs);
// (abs \ delete-set) ∪ add-set; throws std::logic_error when not applicable.
State apply(const GroundOperator& op, const State& abs);

struct Plan {
  std::vector<Atom> steps;  // ground sub-task instances, in order
  std::string str() const;  // one step per line
};

// Breadth-first search over ground operator applications. Returns a shortest
// plan; among shortest plans the lexicographically least step sequence.
// nullopt when the goal is unreachable or the node budget is exhausted.
std::optional<Plan> make_plan(const State& initial, const Goal& goal,
                              const std::vector<SubtaskOperator>& operators,
                              const std::vector<std::string>& objects,
                              std::size_t node_budget = 1000000);

}  // namespace reprel::planner
