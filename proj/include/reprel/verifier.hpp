#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "reprel/abstraction.hpp"
#include "reprel/planner.hpp"
#include "reprel/relational.hpp"
#include "reprel/taxi.hpp"

namespace reprel::verifier {

// Flat indexed MDP for the exhaustive checks. Terminal states have an empty
// transition row and value 0 by convention; transitions are total elsewhere.
struct GroundMdp {
  struct Tr {
    int next = -1;
    double reward = 0.0;
    bool done = false;
  };
  std::vector<std::string> actions;
  std::vector<State> states;  // may be empty for synthetic MDPs
  std::vector<std::vector<Tr>> transitions;
  std::vector<bool> terminal;
  double gamma = 0.99;

  std::size_t size() const { return transitions.size(); }
};

GroundMdp from_enumeration(const taxi::Enumeration& e);

// Union of the reachable graphs from several start states of one instance
// (used to verify over a family, e.g. all destination assignments).
GroundMdp union_mdp(const taxi::Instance& inst, const std::vector<State>& starts,
                    std::size_t state_budget = 1000000);

// All initial states of the instance's goal family: the declared placement
// with every combination of per-passenger destinations over the depots
// (non-goal placements stay as declared; fixed instance required).
std::vector<State> family_starts(const taxi::Instance& inst);

// Sub-MDP in which one option runs: live states are reachable from `entries`
// while the sub-task's termination condition (its operator add-effects on the
// planning projection) and the episode goal are both false. Entering a
// terminating state pays the option bonus. exit_frontier collects the
// termination states for chaining the next phase.
struct PhaseMdp {
  Atom step;
  GroundMdp mdp;
  std::vector<State> exit_frontier;
};

PhaseMdp phase_mdp(const taxi::Instance& inst, const std::vector<State>& entries,
                   const planner::GroundOperator& op,
                   std::size_t state_budget = 1000000);

struct ValueTable {
  std::vector<double> values;
  double residual = 0.0;
  int sweeps = 0;
};

// Synchronous value iteration from zero initialization; stops when the
// sup-norm residual drops below tol. Enforces the γ-contraction of the
// residual each sweep.
ValueTable value_iteration(const GroundMdp& mdp, double tol = 1e-10);

// Greedy action index per state (-1 for terminal states); ties broken by
// lowest action index.
std::vector<int> greedy_policy(const GroundMdp& mdp, const ValueTable& v);

// Undiscounted return of following `policy` from `start` (capped).
double rollout_return(const GroundMdp& mdp, const std::vector<int>& policy,
                      int start, int max_steps = 10000);

using AtomFilter = std::function<bool(const Atom&)>;

// Membership test for X induced by a schema under one grounding: an atom is
// in X iff some template matches it.
AtomFilter schema_filter(const abstraction::AbstractionSchema& schema,
                         const Substitution& grounding);

struct FactorizationViolation {
  int state = -1;
  int witness = -1;  // other state in the same X-class
  int action = -1;
  std::string reason;
  std::string str(const GroundMdp& mdp) const;
};

struct FactorizationReport {
  bool pass = false;
  std::size_t groups = 0;
  std::size_t checked_pairs = 0;
  std::vector<FactorizationViolation> violations;  // capped
  std::size_t total_violations = 0;
  std::string str(const GroundMdp& mdp) const;
};

// Factorization check, deterministic specialization: within every class of
// equal X-projection, each action must lead to one X-successor-projection,
// one reward, and one terminality.
FactorizationReport check_factorization(const GroundMdp& mdp, const AtomFilter& in_x);
// Explicit-partition form; throws std::invalid_argument unless X and Y
// partition the atoms occurring in the MDP's states.
FactorizationReport check_factorization(const GroundMdp& mdp,
                                        const std::set<Atom>& X,
                                        const std::set<Atom>& Y);

struct EquivalenceReport {
  bool pass = false;
  double max_deviation = 0.0;
  int worst_state = -1;
  std::size_t classes = 0;
  FactorizationReport factorization;
  std::string str(const GroundMdp& mdp) const;
};

// Value-preservation check: optimal values of the ground MDP equal those of
// the quotient MDP over abstract-state classes, within tol at every state.
EquivalenceReport check_value_equivalence(
    const GroundMdp& mdp, const abstraction::AbstractionSchema& schema,
    const Substitution& grounding, double tol = 1e-8);

}  // namespace reprel::verifier
