#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reprel/dfoci.hpp"
#include "reprel/relational.hpp"

namespace reprel::abstraction {

// One argument slot of a relevant-literal template. A slot is either bound to
// a sub-task parameter (by position), a free local variable (numbered per
// literal in first-occurrence order), or a constant.
enum class SlotKind { Param, Free, Const };

struct TemplateSlot {
  SlotKind kind = SlotKind::Free;
  int index = 0;     // Param / Free
  std::string name;  // Const

  static TemplateSlot param(int i) { return {SlotKind::Param, i, {}}; }
  static TemplateSlot free(int i) { return {SlotKind::Free, i, {}}; }
  static TemplateSlot constant(std::string n) {
    return {SlotKind::Const, 0, std::move(n)};
  }
  auto operator<=>(const TemplateSlot&) const = default;
};

struct TemplateAtom {
  std::string predicate;
  std::vector<TemplateSlot> slots;

  // Renumbers free slots to 0,1,... in first-occurrence order.
  void canonicalize();
  // Printed form; params shown with the given display names, frees as F0,F1,...
  std::string str(const std::vector<std::string>& param_names) const;
  auto operator<=>(const TemplateAtom&) const = default;
};

// Per-sub-task result of the influence closure: the relevant literal
// templates, whether the action variable is relevant, and how many sweeps the
// closure ran.
struct AbstractionSchema {
  std::string subtask;               // sub-task name
  std::vector<std::string> params;   // display names for Param slots
  std::vector<TemplateAtom> templates;  // sorted, canonical
  bool include_action = false;
  int sweeps = 0;
  bool fixpoint = false;

  Atom head() const;  // e.g. pickup(P)
  // Canonical text block: header lines then one "template ..." line each.
  std::string str() const;
};

inline constexpr int kFixpoint = -1;

// Influence closure (backward from the reward variables R and Ro) over the
// statements applicable to `subtask`. depth = kFixpoint iterates sweeps until
// nothing changes; depth >= 0 runs exactly that many sweeps (0 = seeds only).
AbstractionSchema relevant_closure(const dfoci::DomainDecl& decl,
                                   const std::string& subtask,
                                   int depth = kFixpoint);

struct AbstractState {
  State state;
  std::string key() const { return state.key(); }
  bool operator==(const AbstractState&) const = default;
};

// Projects `state` through the schema under `grounding` (which must bind
// every schema parameter to a constant): keeps exactly the facts unifying
// with some template, then renames parameter constants to arg0, arg1, ...
AbstractState abstract_state(const AbstractionSchema& schema, const State& state,
                             const Substitution& grounding);

// Splits facts into (matching, rest); the first component ungrounds to the
// same atom set abstract_state keeps.
std::pair<State, State> partition(const AbstractionSchema& schema,
                                  const State& state,
                                  const Substitution& grounding);

// Parameter constants in schema order; throws std::invalid_argument when the
// grounding leaves a parameter unbound or bound to a variable.
std::vector<std::string> resolve_params(const AbstractionSchema& schema,
                                        const Substitution& grounding);

// True iff some template matches the ground atom under these parameter
// constants (the membership test behind partition/abstract_state).
bool atom_relevant(const AbstractionSchema& schema, const Atom& fact,
                   const std::vector<std::string>& param_consts);

// Canonical placeholder for the k-th sub-task argument in abstract states.
std::string param_placeholder(int index);

}  // namespace reprel::abstraction
