#pragma once

// Seeded generator of grammatically valid D-FOCI statements, shared by the
// round-trip fuzz test and the acceptance suite.

#include <string>
#include <utility>
#include <vector>

#include "reprel/dfoci.hpp"
#include "reprel/rng.hpp"

namespace statement_fuzz {

struct Vocab {
  std::vector<std::pair<std::string, int>> predicates;
  std::vector<std::pair<std::string, int>> subtasks;
};

inline Vocab default_vocab() {
  Vocab v;
  v.predicates = {{"at", 2},   {"taxi-at", 1}, {"in-taxi", 1}, {"wall", 2},
                  {"dest", 2}, {"occupied", 0}, {"cargo", 3}};
  v.subtasks = {{"pickup", 1}, {"drop", 1}, {"goto-loc", 2}, {"refuel", 0}};
  return v;
}

inline reprel::dfoci::DomainDecl vocab_decl(const Vocab& v) {
  reprel::dfoci::DomainDecl decl;
  for (const auto& [name, arity] : v.predicates) decl.predicates[name] = arity;
  for (const auto& [name, arity] : v.subtasks) decl.subtasks[name] = arity;
  return decl;
}

inline reprel::Term random_term(reprel::Rng& rng,
                                const std::vector<std::string>& head_params) {
  static const std::vector<std::string> kVars = {"L", "M", "X0", "Where"};
  static const std::vector<std::string> kConsts = {"p1", "l03", "l44", "c7"};
  // Prefer head parameters when present so statements look realistic.
  int pick = rng.uniform_int(3);
  if (pick == 0 && !head_params.empty())
    return reprel::Term::var(head_params[rng.uniform_int(static_cast<int>(head_params.size()))]);
  if (pick == 1) return reprel::Term::constant(kConsts[rng.uniform_int(static_cast<int>(kConsts.size()))]);
  return reprel::Term::var(kVars[rng.uniform_int(static_cast<int>(kVars.size()))]);
}

inline reprel::Literal random_literal(reprel::Rng& rng, const Vocab& v,
                                      const std::vector<std::string>& head_params) {
  const auto& [pred, arity] = v.predicates[rng.uniform_int(static_cast<int>(v.predicates.size()))];
  reprel::Atom atom;
  atom.predicate = pred;
  for (int i = 0; i < arity; ++i) atom.args.push_back(random_term(rng, head_params));
  return {atom, rng.uniform_int(4) != 0};  // negated one time in four
}

// A statement satisfying every DomainDecl invariant: declared vocabulary,
// distinct uppercase head parameters, same-step arrows only into R/Ro, and a
// consequent that is never the action variable.
inline reprel::dfoci::Statement random_statement(reprel::Rng& rng, const Vocab& v) {
  using reprel::dfoci::Statement;
  using reprel::dfoci::VocabItem;
  static const std::vector<std::string> kParams = {"P", "Q", "Z"};

  Statement s;
  std::vector<std::string> head_params;
  if (rng.uniform_int(2) == 0) {
    const auto& [name, arity] = v.subtasks[rng.uniform_int(static_cast<int>(v.subtasks.size()))];
    reprel::Atom head;
    head.predicate = name;
    for (int i = 0; i < arity; ++i) {
      head.args.push_back(reprel::Term::var(kParams[i]));
      head_params.push_back(kParams[i]);
    }
    s.subtask = head;
  }

  int items = 1 + rng.uniform_int(4);
  for (int i = 0; i < items; ++i) {
    int kind = rng.uniform_int(8);
    if (kind == 0)
      s.antecedent.push_back(VocabItem::task_reward());
    else if (kind == 1)
      s.antecedent.push_back(VocabItem::option_reward());
    else
      s.antecedent.push_back(VocabItem::state_literal(random_literal(rng, v, head_params)));
  }
  if (rng.uniform_int(4) != 0) s.antecedent.push_back(VocabItem::action());

  switch (rng.uniform_int(4)) {
    case 0:
      s.consequent = VocabItem::task_reward();
      s.next_step = rng.uniform_int(2) == 0;
      break;
    case 1:
      s.consequent = VocabItem::option_reward();
      s.next_step = rng.uniform_int(2) == 0;
      break;
    default:
      s.consequent = VocabItem::state_literal(random_literal(rng, v, head_params));
      s.next_step = true;  // same-step arrows are reserved for rewards
      break;
  }
  s.normalize();
  return s;
}

}  // namespace statement_fuzz
