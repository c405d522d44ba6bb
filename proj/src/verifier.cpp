#include "reprel/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>

#include "reprel/numfmt.hpp"

namespace reprel::verifier {

GroundMdp from_enumeration(const taxi::Enumeration& e) {
  GroundMdp mdp;
  mdp.actions = taxi::available_actions();
  mdp.states = e.states;
  mdp.terminal = e.terminal;
  mdp.gamma = e.gamma;
  mdp.transitions.reserve(e.transitions.size());
  for (const auto& row : e.transitions) {
    std::vector<GroundMdp::Tr> out_row;
    out_row.reserve(row.size());
    for (const auto& tr : row) out_row.push_back({tr.next, tr.reward, tr.done});
    mdp.transitions.push_back(std::move(out_row));
  }
  return mdp;
}

namespace {

// Shared BFS driver: expands live states with the env dynamics; `classify`
// returns (is_terminal, extra_reward_on_entering).
template <class Classify>
GroundMdp explore(const taxi::Instance& inst, const std::vector<State>& starts,
                  std::size_t state_budget, Classify classify) {
  GroundMdp mdp;
  mdp.actions = taxi::available_actions();
  mdp.gamma = inst.gamma;
  std::map<std::string, int> index_of;

  auto intern = [&](const State& s) {
    auto [it, inserted] = index_of.emplace(s.key(), mdp.states.size());
    if (inserted) {
      if (mdp.states.size() >= state_budget) {
        throw std::runtime_error("explore: state budget exceeded");
      }
      mdp.states.push_back(s);
      mdp.terminal.push_back(classify(s).first);
      mdp.transitions.emplace_back();
    }
    return it->second;
  };

  std::deque<int> frontier;
  for (const State& s : starts) frontier.push_back(intern(s));
  std::set<int> expanded;
  while (!frontier.empty()) {
    int i = frontier.front();
    frontier.pop_front();
    if (mdp.terminal[i] || !expanded.insert(i).second) continue;
    for (const std::string& a : mdp.actions) {
      taxi::StepResult r = taxi::step(inst, mdp.states[i], a);
      int j = intern(r.next_state);
      auto [term, extra] = classify(r.next_state);
      mdp.transitions[i].push_back({j, r.reward + extra, term});
      if (!mdp.terminal[j] && !expanded.count(j)) frontier.push_back(j);
    }
  }
  return mdp;
}

}  // namespace

GroundMdp union_mdp(const taxi::Instance& inst, const std::vector<State>& starts,
                    std::size_t state_budget) {
  return explore(inst, starts, state_budget, [&](const State& s) {
    bool done = goal_satisfied(s, taxi::episode_goal(inst, s));
    return std::pair<bool, double>(done, 0.0);
  });
}

std::vector<State> family_starts(const taxi::Instance& inst) {
  if (inst.randomized()) {
    throw std::invalid_argument("family_starts: instance must be fixed");
  }
  const State base = taxi::reset(inst, 0);
  if (inst.depots.empty()) return {base};

  std::vector<State> out;
  // Odometer over per-passenger destination choices (depots minus the
  // passenger's start cell).
  std::vector<std::vector<std::string>> choices;
  for (const auto& p : inst.passengers) {
    std::vector<std::string> dests;
    for (const std::string& d : inst.depots) {
      if (d != p.start) dests.push_back(d);
    }
    if (dests.empty()) {
      throw std::invalid_argument("family_starts: no destination depot for " + p.name);
    }
    choices.push_back(std::move(dests));
  }
  std::vector<std::size_t> idx(choices.size(), 0);
  while (true) {
    State s = base;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto& p = inst.passengers[i];
      s.erase(make_atom("dest", {p.name, p.dest}));
      s.insert(make_atom("dest", {p.name, choices[i][idx[i]]}));
    }
    out.push_back(std::move(s));
    std::size_t k = idx.size();
    while (k > 0 && ++idx[k - 1] == choices[k - 1].size()) idx[--k] = 0;
    if (k == 0) break;
  }
  return out;
}

PhaseMdp phase_mdp(const taxi::Instance& inst, const std::vector<State>& entries,
                   const planner::GroundOperator& op, std::size_t state_budget) {
  Goal termination;
  for (const Atom& a : op.add_effects) {
    termination.literals.insert(Literal{a, true});
  }
  auto classify = [&](const State& s) {
    bool term = goal_satisfied(taxi::planning_state(s), termination);
    bool done = goal_satisfied(s, taxi::episode_goal(inst, s));
    return std::pair<bool, double>(term || done, term ? taxi::kSubtaskBonus : 0.0);
  };
  PhaseMdp out;
  out.step = op.step;
  out.mdp = explore(inst, entries, state_budget, classify);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < out.mdp.size(); ++i) {
    const State& s = out.mdp.states[i];
    if (out.mdp.terminal[i] &&
        goal_satisfied(taxi::planning_state(s), termination) &&
        seen.insert(s.key()).second) {
      out.exit_frontier.push_back(s);
    }
  }
  return out;
}

ValueTable value_iteration(const GroundMdp& mdp, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("value_iteration: tol must be > 0");
  ValueTable out;
  out.values.assign(mdp.size(), 0.0);
  std::vector<double> next(mdp.size(), 0.0);
  double prev_residual = std::numeric_limits<double>::infinity();
  constexpr int kMaxSweeps = 1000000;
  while (out.sweeps < kMaxSweeps) {
    double residual = 0.0;
    for (std::size_t s = 0; s < mdp.size(); ++s) {
      if (mdp.terminal[s] || mdp.transitions[s].empty()) {
        next[s] = 0.0;
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      for (const GroundMdp::Tr& tr : mdp.transitions[s]) {
        double v = tr.reward +
                   mdp.gamma * (mdp.terminal[tr.next] ? 0.0 : out.values[tr.next]);
        best = std::max(best, v);
      }
      next[s] = best;
      residual = std::max(residual, std::abs(best - out.values[s]));
    }
    out.values.swap(next);
    ++out.sweeps;
    out.residual = residual;
    if (mdp.gamma < 1.0 && std::isfinite(prev_residual) &&
        residual > mdp.gamma * prev_residual + 1e-9) {
      throw std::logic_error("value_iteration: residual contraction violated");
    }
    prev_residual = residual;
    if (residual < tol) return out;
  }
  throw std::runtime_error("value_iteration: did not converge");
}

std::vector<int> greedy_policy(const GroundMdp& mdp, const ValueTable& v) {
  std::vector<int> policy(mdp.size(), -1);
  for (std::size_t s = 0; s < mdp.size(); ++s) {
    if (mdp.terminal[s] || mdp.transitions[s].empty()) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < mdp.transitions[s].size(); ++a) {
      const GroundMdp::Tr& tr = mdp.transitions[s][a];
      double q = tr.reward +
                 mdp.gamma * (mdp.terminal[tr.next] ? 0.0 : v.values[tr.next]);
      if (q > best) {
        best = q;
        policy[s] = static_cast<int>(a);
      }
    }
  }
  return policy;
}

double rollout_return(const GroundMdp& mdp, const std::vector<int>& policy,
                      int start, int max_steps) {
  double total = 0.0;
  int s = start;
  for (int t = 0; t < max_steps; ++t) {
    if (mdp.terminal[s] || mdp.transitions[s].empty()) return total;
    int a = policy[s];
    if (a < 0) throw std::logic_error("rollout_return: no action at state");
    const GroundMdp::Tr& tr = mdp.transitions[s][a];
    total += tr.reward;
    s = tr.next;
  }
  return total;
}

AtomFilter schema_filter(const abstraction::AbstractionSchema& schema,
                         const Substitution& grounding) {
  auto params = abstraction::resolve_params(schema, grounding);
  return [schema, params](const Atom& fact) {
    return abstraction::atom_relevant(schema, fact, params);
  };
}

std::string FactorizationViolation::str(const GroundMdp& mdp) const {
  std::string out = "violation state=" + std::to_string(state);
  out += " witness=" + std::to_string(witness);
  out += " action=";
  out += action >= 0 && action < static_cast<int>(mdp.actions.size())
             ? mdp.actions[action]
             : std::string("-");
  out += " reason=" + reason;
  return out;
}

std::string FactorizationReport::str(const GroundMdp& mdp) const {
  std::string out = "factorization groups=" + std::to_string(groups);
  out += " pairs=" + std::to_string(checked_pairs);
  out += " violations=" + std::to_string(total_violations);
  out += pass ? " result=pass" : " result=fail";
  out += '\n';
  for (const FactorizationViolation& v : violations) {
    out += v.str(mdp);
    out += '\n';
  }
  return out;
}

FactorizationReport check_factorization(const GroundMdp& mdp, const AtomFilter& in_x) {
  constexpr std::size_t kMaxStoredViolations = 10;
  FactorizationReport report;

  auto projection_key = [&](int s) {
    std::string key;
    for (const Atom& fact : mdp.states[static_cast<std::size_t>(s)].facts) {
      if (!in_x(fact)) continue;
      if (!key.empty()) key += ';';
      key += fact.str();
    }
    return key;
  };
  std::vector<std::string> proj(mdp.size());
  std::map<std::string, std::vector<int>> groups;
  for (std::size_t s = 0; s < mdp.size(); ++s) {
    proj[s] = projection_key(static_cast<int>(s));
    groups[proj[s]].push_back(static_cast<int>(s));
  }
  report.groups = groups.size();

  auto add_violation = [&](int state, int witness, int action, std::string reason) {
    ++report.total_violations;
    if (report.violations.size() < kMaxStoredViolations) {
      report.violations.push_back({state, witness, action, std::move(reason)});
    }
  };

  for (const auto& [key, members] : groups) {
    (void)key;
    const int ref = members.front();
    for (std::size_t m = 1; m < members.size(); ++m) {
      const int other = members[m];
      ++report.checked_pairs;
      if (mdp.terminal[ref] != mdp.terminal[other]) {
        add_violation(other, ref, -1, "terminality-differs-within-class");
        continue;
      }
      if (mdp.terminal[ref]) continue;  // both terminal: nothing to compare
      for (std::size_t a = 0; a < mdp.actions.size(); ++a) {
        const GroundMdp::Tr& tr = mdp.transitions[ref][a];
        const GroundMdp::Tr& to = mdp.transitions[other][a];
        if (tr.reward != to.reward) {
          add_violation(other, ref, static_cast<int>(a), "reward-differs");
        }
        if (proj[tr.next] != proj[to.next]) {
          add_violation(other, ref, static_cast<int>(a),
                        "successor-projection-differs");
        }
        if (mdp.terminal[tr.next] != mdp.terminal[to.next]) {
          add_violation(other, ref, static_cast<int>(a),
                        "successor-terminality-differs");
        }
      }
    }
  }
  report.pass = report.total_violations == 0;
  return report;
}

FactorizationReport check_factorization(const GroundMdp& mdp,
                                        const std::set<Atom>& X,
                                        const std::set<Atom>& Y) {
  for (const Atom& a : X) {
    if (Y.count(a)) {
      throw std::invalid_argument("check_factorization: X and Y overlap on " +
                                  a.str());
    }
  }
  for (const State& s : mdp.states) {
    for (const Atom& fact : s.facts) {
      if (!X.count(fact) && !Y.count(fact)) {
        throw std::invalid_argument(
            "check_factorization: atom in neither X nor Y: " + fact.str());
      }
    }
  }
  return check_factorization(mdp, [&X](const Atom& a) { return X.count(a) > 0; });
}

std::string EquivalenceReport::str(const GroundMdp& mdp) const {
  std::string out = "equivalence classes=" + std::to_string(classes);
  out += " max_deviation=" + fmt_double(max_deviation);
  out += " worst_state=" + std::to_string(worst_state);
  out += pass ? " result=pass" : " result=fail";
  out += '\n';
  out += factorization.str(mdp);
  return out;
}

EquivalenceReport check_value_equivalence(
    const GroundMdp& mdp, const abstraction::AbstractionSchema& schema,
    const Substitution& grounding, double tol) {
  if (tol <= 0.0) {
    throw std::invalid_argument("check_value_equivalence: tol must be > 0");
  }
  EquivalenceReport report;
  report.factorization = check_factorization(mdp, schema_filter(schema, grounding));

  // Quotient over abstract-state classes; transitions from the least-index
  // representative (factorization guarantees representative-independence
  // when it passes; otherwise this is the documented convention).
  std::map<std::string, int> class_of_key;
  std::vector<int> class_of(mdp.size());
  std::vector<int> representative;
  for (std::size_t s = 0; s < mdp.size(); ++s) {
    std::string key = abstraction::abstract_state(schema, mdp.states[s], grounding).key();
    auto [it, inserted] =
        class_of_key.emplace(std::move(key), static_cast<int>(representative.size()));
    if (inserted) representative.push_back(static_cast<int>(s));
    class_of[s] = it->second;
  }
  report.classes = representative.size();

  GroundMdp quotient;
  quotient.actions = mdp.actions;
  quotient.gamma = mdp.gamma;
  quotient.transitions.resize(representative.size());
  quotient.terminal.resize(representative.size());
  for (std::size_t c = 0; c < representative.size(); ++c) {
    int rep = representative[c];
    quotient.terminal[c] = mdp.terminal[rep];
    for (const GroundMdp::Tr& tr : mdp.transitions[rep]) {
      quotient.transitions[c].push_back({class_of[tr.next], tr.reward, tr.done});
    }
  }

  // Two VI runs each contribute residual*gamma/(1-gamma) of value error;
  // tighten so the comparison at `tol` is meaningful.
  double vi_tol = 1e-10;
  if (mdp.gamma < 1.0) {
    vi_tol = std::min(vi_tol, tol * (1.0 - mdp.gamma) / (4.0 * mdp.gamma));
  }
  ValueTable ground = value_iteration(mdp, vi_tol);
  ValueTable abstract = value_iteration(quotient, vi_tol);

  for (std::size_t s = 0; s < mdp.size(); ++s) {
    double dev = std::abs(ground.values[s] - abstract.values[class_of[s]]);
    if (dev > report.max_deviation) {
      report.max_deviation = dev;
      report.worst_state = static_cast<int>(s);
    }
  }
  report.pass = report.factorization.pass && report.max_deviation <= tol;
  return report;
}

}  // namespace reprel::verifier
