#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reprel/errors.hpp"
#include "reprel/relational.hpp"

namespace reprel::dfoci {

/// Reserved vocabulary names; none may be declared as a predicate.
inline constexpr std::string_view kActionName = "A";
inline constexpr std::string_view kTaskRewardName = "R";
inline constexpr std::string_view kOptionRewardName = "Ro";

enum class ItemKind { StateLiteral, Action, TaskReward, OptionReward };

/// One element of an influence statement: a state literal, the action
/// variable A, or one of the reward variables R / Ro.
struct VocabItem {
  ItemKind kind = ItemKind::StateLiteral;
  Literal literal;  // meaningful only for StateLiteral

  static VocabItem action() { return {ItemKind::Action, {}}; }
  static VocabItem task_reward() { return {ItemKind::TaskReward, {}}; }
  static VocabItem option_reward() { return {ItemKind::OptionReward, {}}; }
  static VocabItem state_literal(Literal lit) {
    return {ItemKind::StateLiteral, std::move(lit)};
  }

  std::string str() const;

  auto operator<=>(const VocabItem&) const = default;
};

/// One influence rule: for `subtask` (or unconditionally when absent) the
/// consequent is directly influenced only by the antecedent items, at the
/// next time step when `next_step` is set.
struct Statement {
  std::optional<Atom> subtask;        // first-order head, e.g. pickup(P)
  std::vector<VocabItem> antecedent;  // canonical order, duplicates collapsed
  VocabItem consequent;
  bool next_step = false;
  int line = 0;  // source line, 0 for synthesized statements

  /// Sorts the antecedent into canonical order and drops duplicates.
  void normalize();

  /// Semantic equality; ignores the source line.
  bool operator==(const Statement& other) const {
    return subtask == other.subtask && antecedent == other.antecedent &&
           consequent == other.consequent && next_step == other.next_step;
  }
};

/// Parsed contents of a .dfoci file.
struct DomainDecl {
  std::map<std::string, int> predicates;  // name -> arity
  std::map<std::string, int> subtasks;    // name -> arity
  std::vector<Statement> statements;
};

struct Diagnostic {
  int statement_index = -1;  // -1 for declaration-level problems
  int line = 0;
  std::string message;
};

/// Parses D-FOCI text. Throws ParseError on syntax errors; does not run
/// validate().
DomainDecl parse_domain(std::string_view text, std::string_view filename = "<string>");

/// Canonical single-line rendering; parse of the output reproduces the
/// statement.
std::string print_statement(const Statement& stmt);

/// Declarations followed by statements, one per line.
std::string print_domain(const DomainDecl& decl);

/// Checks every structural invariant: declared predicates/subtasks with
/// matching arity, reserved names, consequent restrictions, head shape.
/// Returns an empty list iff the declaration is well-formed.
std::vector<Diagnostic> validate(const DomainDecl& decl);

/// Parses and validates a .dfoci file; throws ParseError carrying the first
/// diagnostic when validation fails.
DomainDecl load_domain(const std::string& path);

}  // namespace reprel::dfoci
