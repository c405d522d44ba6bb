#include "reprel/abstraction.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace reprel::abstraction {

namespace {

// Statement literals are lifted to templates at statement scope first (free
// variables shared across the statement keep one index), so the unifier from
// the consequent match carries over to the antecedents.
struct StatementScope {
  std::map<std::string, int> param_of;  // head var name -> param index
  std::map<std::string, int> free_of;   // other var name -> statement-free idx

  TemplateSlot slot(const Term& t) {
    if (!t.is_variable()) return TemplateSlot::constant(t.name);
    if (auto it = param_of.find(t.name); it != param_of.end()) {
      return TemplateSlot::param(it->second);
    }
    auto [it, inserted] = free_of.emplace(t.name, static_cast<int>(free_of.size()));
    (void)inserted;
    return TemplateSlot::free(it->second);
  }

  TemplateAtom lift(const Atom& atom) {
    TemplateAtom out;
    out.predicate = atom.predicate;
    out.slots.reserve(atom.args.size());
    for (const Term& t : atom.args) out.slots.push_back(slot(t));
    return out;
  }
};

// Unifier for two flat templates whose free variables live in disjoint
// spaces ("left" = statement side, "right" = established Rel member).
// Param and Const slots behave as constants. On success, `left_binding`
// maps statement-free indices to the slot they resolved to (absent = still
// free after unification).
struct TemplateUnifier {
  std::map<int, TemplateSlot> left_binding;
  std::map<int, TemplateSlot> right_binding;

  static bool is_rigid(const TemplateSlot& s) { return s.kind != SlotKind::Free; }

  TemplateSlot resolve(TemplateSlot s, bool left) {
    while (s.kind == SlotKind::Free) {
      auto& table = left ? left_binding : right_binding;
      auto it = table.find(s.index);
      if (it == table.end()) return s;
      bool next_left = !left;  // bindings store the opposite side or rigid
      if (is_rigid(it->second)) return it->second;
      s = it->second;
      left = next_left;
    }
    return s;
  }

  bool unify(const TemplateAtom& lhs, const TemplateAtom& rhs) {
    if (lhs.predicate != rhs.predicate || lhs.slots.size() != rhs.slots.size()) {
      return false;
    }
    for (std::size_t i = 0; i < lhs.slots.size(); ++i) {
      TemplateSlot a = resolve(lhs.slots[i], true);
      TemplateSlot b = resolve(rhs.slots[i], false);
      if (is_rigid(a) && is_rigid(b)) {
        if (a != b) return false;
      } else if (is_rigid(b)) {
        left_binding[a.index] = b;
      } else if (is_rigid(a)) {
        right_binding[b.index] = a;
      } else {
        // free-free: bind left to right unless they already coincide
        left_binding[a.index] = b;
      }
    }
    return true;
  }
};

// Relevant set during closure; rewards are implicit (always in).
struct RelSet {
  std::set<TemplateAtom> templates;
  bool action = false;

  bool operator==(const RelSet&) const = default;
};

bool consequent_matches(const dfoci::Statement& stmt, StatementScope& scope,
                        const RelSet& rel, TemplateUnifier& out) {
  using dfoci::ItemKind;
  switch (stmt.consequent.kind) {
    case ItemKind::TaskReward:
    case ItemKind::OptionReward:
      return true;  // R and Ro seed the closure
    case ItemKind::Action:
      return false;  // rejected by the validator anyway
    case ItemKind::StateLiteral: {
      TemplateAtom lifted = scope.lift(stmt.consequent.literal.atom);
      for (const TemplateAtom& member : rel.templates) {
        TemplateUnifier u;
        if (u.unify(lifted, member)) {
          out = std::move(u);
          return true;
        }
      }
      return false;
    }
  }
  return false;
}

}  // namespace

void TemplateAtom::canonicalize() {
  std::map<int, int> renumber;
  for (TemplateSlot& s : slots) {
    if (s.kind != SlotKind::Free) continue;
    auto [it, inserted] = renumber.emplace(s.index, static_cast<int>(renumber.size()));
    (void)inserted;
    s.index = it->second;
  }
}

std::string TemplateAtom::str(const std::vector<std::string>& param_names) const {
  std::string out = predicate;
  if (slots.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i > 0) out += ',';
    const TemplateSlot& s = slots[i];
    switch (s.kind) {
      case SlotKind::Param:
        out += s.index < static_cast<int>(param_names.size())
                   ? param_names[s.index]
                   : "X" + std::to_string(s.index);
        break;
      case SlotKind::Free:
        out += "F" + std::to_string(s.index);
        break;
      case SlotKind::Const:
        out += s.name;
        break;
    }
  }
  out += ')';
  return out;
}

Atom AbstractionSchema::head() const {
  Atom out;
  out.predicate = subtask;
  for (const std::string& p : params) out.args.push_back(Term::var(p));
  return out;
}

std::string AbstractionSchema::str() const {
  std::string out = "subtask " + head().str() + "\n";
  out += "depth ";
  out += fixpoint ? "fixpoint" : std::to_string(sweeps);
  out += "\naction ";
  out += include_action ? "true" : "false";
  out += '\n';
  std::vector<std::string> lines;
  lines.reserve(templates.size());
  for (const TemplateAtom& t : templates) lines.push_back(t.str(params));
  std::sort(lines.begin(), lines.end());
  for (const std::string& line : lines) out += "template " + line + "\n";
  return out;
}

AbstractionSchema relevant_closure(const dfoci::DomainDecl& decl,
                                   const std::string& subtask, int depth) {
  auto decl_it = decl.subtasks.find(subtask);
  if (decl_it == decl.subtasks.end()) {
    throw std::invalid_argument("relevant_closure: undeclared subtask " + subtask);
  }
  if (depth < kFixpoint) {
    throw std::invalid_argument("relevant_closure: negative depth");
  }
  int arity = decl_it->second;

  AbstractionSchema schema;
  schema.subtask = subtask;
  // Display names: take the lexicographically least matching head in the
  // file, so printed templates reuse the author's variable names.
  for (int i = 0; i < arity; ++i) schema.params.push_back("X" + std::to_string(i));
  std::optional<std::string> best_head;
  for (const dfoci::Statement& stmt : decl.statements) {
    if (!stmt.subtask || stmt.subtask->predicate != subtask) continue;
    if (static_cast<int>(stmt.subtask->args.size()) != arity) continue;
    std::string printed = stmt.subtask->str();
    if (!best_head || printed < *best_head) {
      best_head = printed;
      for (int i = 0; i < arity; ++i) schema.params[i] = stmt.subtask->args[i].name;
    }
  }

  // One snapshot sweep: reads `rel` only, so the result is independent of
  // statement order within the file.
  auto sweep = [&](const RelSet& snapshot) {
    RelSet next = snapshot;
    for (const dfoci::Statement& stmt : decl.statements) {
      StatementScope scope;
      if (stmt.subtask) {
        if (stmt.subtask->predicate != subtask) continue;
        if (static_cast<int>(stmt.subtask->args.size()) != arity) continue;
        for (std::size_t i = 0; i < stmt.subtask->args.size(); ++i) {
          scope.param_of[stmt.subtask->args[i].name] = static_cast<int>(i);
        }
      }
      TemplateUnifier unifier;
      if (!consequent_matches(stmt, scope, snapshot, unifier)) continue;
      for (const dfoci::VocabItem& item : stmt.antecedent) {
        switch (item.kind) {
          case dfoci::ItemKind::Action:
            next.action = true;
            break;
          case dfoci::ItemKind::TaskReward:
          case dfoci::ItemKind::OptionReward:
            break;  // rewards are permanent members
          case dfoci::ItemKind::StateLiteral: {
            TemplateAtom lifted = scope.lift(item.literal.atom);
            for (TemplateSlot& s : lifted.slots) {
              if (s.kind != SlotKind::Free) continue;
              TemplateSlot resolved = unifier.resolve(s, true);
              // Frees bound into the matched member's space stay free.
              if (resolved.kind != SlotKind::Free) s = resolved;
            }
            lifted.canonicalize();
            next.templates.insert(std::move(lifted));
            break;
          }
        }
      }
    }
    return next;
  };

  RelSet rel;
  constexpr int kSweepGuard = 10000;
  int limit = depth == kFixpoint ? kSweepGuard : depth;
  while (schema.sweeps < limit) {
    RelSet next = sweep(rel);
    if (next == rel) {
      schema.fixpoint = true;
      break;
    }
    rel = std::move(next);
    ++schema.sweeps;
  }
  if (depth == kFixpoint && !schema.fixpoint) {
    throw std::runtime_error("relevant_closure: sweep guard exceeded");
  }
  if (!schema.fixpoint) schema.fixpoint = sweep(rel) == rel;
  schema.include_action = rel.action;
  schema.templates.assign(rel.templates.begin(), rel.templates.end());
  return schema;
}

namespace {

// Positionwise match of one template against a ground atom; free slots bind
// consistently within the literal.
bool template_matches(const TemplateAtom& tpl, const Atom& fact,
                      const std::vector<std::string>& param_consts) {
  if (tpl.predicate != fact.predicate || tpl.slots.size() != fact.args.size()) {
    return false;
  }
  std::map<int, std::string> free_bind;
  for (std::size_t i = 0; i < tpl.slots.size(); ++i) {
    const TemplateSlot& s = tpl.slots[i];
    const std::string& c = fact.args[i].name;
    switch (s.kind) {
      case SlotKind::Param:
        if (param_consts[s.index] != c) return false;
        break;
      case SlotKind::Const:
        if (s.name != c) return false;
        break;
      case SlotKind::Free: {
        auto [it, inserted] = free_bind.emplace(s.index, c);
        if (!inserted && it->second != c) return false;
        break;
      }
    }
  }
  return true;
}

}  // namespace

std::vector<std::string> resolve_params(const AbstractionSchema& schema,
                                        const Substitution& grounding) {
  std::vector<std::string> out;
  out.reserve(schema.params.size());
  for (const std::string& p : schema.params) {
    const Term* t = grounding.lookup(p);
    if (!t || t->is_variable()) {
      throw std::invalid_argument(
          "abstract_state: grounding must bind parameter " + p +
          " to a constant");
    }
    out.push_back(t->name);
  }
  return out;
}

bool atom_relevant(const AbstractionSchema& schema, const Atom& fact,
                   const std::vector<std::string>& param_consts) {
  return std::any_of(schema.templates.begin(), schema.templates.end(),
                     [&](const TemplateAtom& tpl) {
                       return template_matches(tpl, fact, param_consts);
                     });
}

std::string param_placeholder(int index) { return "arg" + std::to_string(index); }

std::pair<State, State> partition(const AbstractionSchema& schema,
                                  const State& state,
                                  const Substitution& grounding) {
  std::vector<std::string> param_consts = resolve_params(schema, grounding);
  State matched;
  State rest;
  for (const Atom& fact : state.facts) {
    (atom_relevant(schema, fact, param_consts) ? matched : rest).facts.insert(fact);
  }
  return {std::move(matched), std::move(rest)};
}

AbstractState abstract_state(const AbstractionSchema& schema, const State& state,
                             const Substitution& grounding) {
  std::vector<std::string> param_consts = resolve_params(schema, grounding);
  AbstractState out;
  for (const Atom& fact : state.facts) {
    if (!atom_relevant(schema, fact, param_consts)) continue;
    Atom renamed = fact;
    for (Term& arg : renamed.args) {
      // Rename every occurrence of a parameter constant; lowest index wins
      // when two parameters share a constant.
      for (std::size_t k = 0; k < param_consts.size(); ++k) {
        if (arg.name == param_consts[k]) {
          arg = Term::constant(param_placeholder(static_cast<int>(k)));
          break;
        }
      }
    }
    out.state.facts.insert(std::move(renamed));
  }
  return out;
}

}  // namespace reprel::abstraction
