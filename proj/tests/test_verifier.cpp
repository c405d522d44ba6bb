#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "reprel/abstraction.hpp"
#include "reprel/dfoci.hpp"
#include "reprel/planner.hpp"
#include "reprel/taxi.hpp"
#include "reprel/verifier.hpp"

using namespace reprel;
using namespace reprel::verifier;

namespace {

std::string data_path(const std::string& name) {
  return std::string(REPREL_DATA_DIR) + "/" + name;
}

taxi::Instance three_by_three() {
  return taxi::load_instance(data_path("taxi3x3.instance"));
}

// s0 --go(-1)--> s1 --go(+10, done)--> s2(terminal)
GroundMdp two_chain() {
  GroundMdp mdp;
  mdp.actions = {"go"};
  mdp.gamma = 0.99;
  mdp.transitions = {{{1, -1.0, false}}, {{2, 10.0, true}}, {}};
  mdp.terminal = {false, false, true};
  return mdp;
}

struct TaxiPhases {
  abstraction::AbstractionSchema pickup_schema;
  abstraction::AbstractionSchema drop_schema;
  PhaseMdp pickup;
  PhaseMdp drop;
};

TaxiPhases build_phases(const std::string& dfoci_name) {
  taxi::Instance inst = three_by_three();
  dfoci::DomainDecl decl = dfoci::load_domain(data_path(dfoci_name));
  auto ops = planner::load_operators(data_path("taxi.ops"));

  TaxiPhases out;
  out.pickup_schema = abstraction::relevant_closure(decl, "pickup");
  out.drop_schema = abstraction::relevant_closure(decl, "drop");
  std::vector<State> starts = family_starts(inst);
  out.pickup = phase_mdp(inst, starts, planner::ground(ops[0], {"p1"}));
  out.drop = phase_mdp(inst, out.pickup.exit_frontier, planner::ground(ops[1], {"p1"}));
  return out;
}

}  // namespace

TEST_CASE("value iteration solves the two-state chain by hand") {
  GroundMdp mdp = two_chain();
  ValueTable v = value_iteration(mdp);
  REQUIRE(v.values.size() == 3);
  CHECK(v.values[2] == 0.0);  // terminal by convention
  CHECK(v.values[1] == doctest::Approx(10.0));
  CHECK(v.values[0] == doctest::Approx(-1.0 + 0.99 * 10.0));
  CHECK(v.sweeps == 3);  // values settle after two sweeps, third confirms
  CHECK(v.residual < 1e-10);

  CHECK_THROWS_AS(value_iteration(mdp, 0.0), std::invalid_argument);

  std::vector<int> policy = greedy_policy(mdp, v);
  CHECK(policy == std::vector<int>{0, 0, -1});
  CHECK(rollout_return(mdp, policy, 0) == doctest::Approx(9.0));  // undiscounted
}

TEST_CASE("greedy policy prefers value and breaks ties by action index") {
  GroundMdp mdp;
  mdp.actions = {"a", "b"};
  mdp.gamma = 0.99;
  mdp.transitions = {{{1, 0.0, true}, {1, 5.0, true}}, {}};
  mdp.terminal = {false, true};
  ValueTable v = value_iteration(mdp);
  CHECK(greedy_policy(mdp, v) == std::vector<int>{1, -1});

  mdp.transitions[0][0].reward = 5.0;  // tie
  v = value_iteration(mdp);
  CHECK(greedy_policy(mdp, v) == std::vector<int>{0, -1});
}

TEST_CASE("from_enumeration mirrors the reachable graph") {
  taxi::Instance inst = three_by_three();
  taxi::Enumeration e = taxi::enumerate(inst);
  GroundMdp mdp = from_enumeration(e);

  CHECK(mdp.size() == 82);
  CHECK(mdp.gamma == e.gamma);
  CHECK(mdp.actions == taxi::available_actions());
  CHECK(std::count(mdp.terminal.begin(), mdp.terminal.end(), true) == 1);
  for (std::size_t i = 0; i < mdp.size(); ++i) {
    REQUIRE(mdp.transitions[i].size() == e.transitions[i].size());
    for (std::size_t a = 0; a < mdp.transitions[i].size(); ++a) {
      CHECK(mdp.transitions[i][a].next == e.transitions[i][a].next);
      CHECK(mdp.transitions[i][a].reward == e.transitions[i][a].reward);
    }
  }

  // Optimal play from the declared start recovers the known best return.
  ValueTable v = value_iteration(mdp);
  std::vector<int> policy = greedy_policy(mdp, v);
  int start = e.index(taxi::reset(inst, 0));
  REQUIRE(start >= 0);
  CHECK(rollout_return(mdp, policy, start) == doctest::Approx(14.0));
  double expect = 0.0;  // -1 per step for six steps, +20 on the last, discounted
  for (int t = 0; t < 6; ++t) expect += std::pow(0.99, t) * -1.0;
  expect += std::pow(0.99, 5) * 20.0;
  CHECK(v.values[static_cast<std::size_t>(start)] == doctest::Approx(expect));
}

TEST_CASE("family_starts enumerates the destination family") {
  taxi::Instance inst = three_by_three();
  std::vector<State> starts = family_starts(inst);
  REQUIRE(starts.size() == 3);  // depots minus the passenger's start cell

  std::set<std::string> dests;
  for (const State& s : starts) {
    CHECK(s.contains(make_atom("taxi-at", {"l11"})));
    CHECK(s.contains(make_atom("at", {"p1", "l22"})));
    for (const Atom& f : s.facts) {
      if (f.predicate == "dest") dests.insert(f.args[1].name);
    }
  }
  CHECK(dests == std::set<std::string>{"l00", "l02", "l20"});

  CHECK_THROWS_AS(family_starts(taxi::load_instance(data_path("taxi_task1.instance"))),
                  std::invalid_argument);
}

TEST_CASE("union_mdp joins the reachable graphs of the family") {
  taxi::Instance inst = three_by_three();
  std::vector<State> starts = family_starts(inst);
  GroundMdp mdp = union_mdp(inst, starts);
  CHECK(mdp.size() == 246);  // 82 per destination, disjoint because dest is a fact
  CHECK(std::count(mdp.terminal.begin(), mdp.terminal.end(), true) == 3);
  CHECK_THROWS_AS(union_mdp(inst, starts, 50), std::runtime_error);
}

TEST_CASE("phase mdps cover one option between entry and termination") {
  TaxiPhases ph = build_phases("taxi.dfoci");

  // Pickup runs over 9 taxi cells x 3 destinations plus one termination
  // state per destination (passenger aboard at l22).
  CHECK(ph.pickup.step == make_atom("pickup", {"p1"}));
  CHECK(ph.pickup.mdp.size() == 30);
  CHECK(std::count(ph.pickup.mdp.terminal.begin(), ph.pickup.mdp.terminal.end(),
                   true) == 3);
  REQUIRE(ph.pickup.exit_frontier.size() == 3);
  for (const State& s : ph.pickup.exit_frontier) {
    CHECK(s.contains(make_atom("in-taxi", {"p1"})));
    CHECK(s.contains(make_atom("taxi-at", {"l22"})));
  }

  // Entering the termination state pays the sub-task bonus on top of the env
  // reward: the pickup action from l22 carries -1 + 20.
  bool saw_bonus = false;
  for (std::size_t i = 0; i < ph.pickup.mdp.size(); ++i) {
    if (ph.pickup.mdp.terminal[i]) continue;
    for (std::size_t a = 0; a < ph.pickup.mdp.actions.size(); ++a) {
      if (ph.pickup.mdp.actions[a] != "pickup") continue;
      const auto& tr = ph.pickup.mdp.transitions[i][a];
      if (tr.done) {
        CHECK(tr.reward == 19.0);
        saw_bonus = true;
      }
    }
  }
  CHECK(saw_bonus);

  // Drop continues from the frontier: per destination, 9 carrying states,
  // 72 wrong-drop states, and the delivered state.
  CHECK(ph.drop.mdp.size() == 246);
  CHECK(std::count(ph.drop.mdp.terminal.begin(), ph.drop.mdp.terminal.end(), true) ==
        3);
  CHECK(ph.drop.exit_frontier.size() == 3);
}

TEST_CASE("factorization holds for the derived pickup abstraction") {
  TaxiPhases ph = build_phases("taxi.dfoci");
  Substitution grounding{{"P", Term::constant("p1")}};

  FactorizationReport rep =
      check_factorization(ph.pickup.mdp, schema_filter(ph.pickup_schema, grounding));
  CHECK(rep.pass);
  CHECK(rep.groups == 10);  // 9 live taxi positions + the boarded class
  CHECK(rep.checked_pairs == 20);
  CHECK(rep.violations.empty());
  CHECK(rep.total_violations == 0);
  CHECK(rep.str(ph.pickup.mdp).find("result=pass") != std::string::npos);

  // The drop abstraction keeps every atom here, so classes are singletons.
  FactorizationReport drop_rep =
      check_factorization(ph.drop.mdp, schema_filter(ph.drop_schema, grounding));
  CHECK(drop_rep.pass);
  CHECK(drop_rep.groups == 246);
  CHECK(drop_rep.checked_pairs == 0);
}

TEST_CASE("factorization rejects an abstraction that hides the taxi") {
  TaxiPhases ph = build_phases("taxi.dfoci");

  // Dropping taxi-at from X merges states where pickup succeeds with states
  // where it is illegal: rewards and successor classes must clash.
  FactorizationReport rep = check_factorization(ph.pickup.mdp, [](const Atom& a) {
    return a.predicate == "at" || a.predicate == "in-taxi";
  });
  CHECK_FALSE(rep.pass);
  CHECK(rep.total_violations > 0);
  std::set<std::string> reasons;
  for (const auto& v : rep.violations) reasons.insert(v.reason);
  CHECK(reasons.count("reward-differs") == 1);
  CHECK(rep.str(ph.pickup.mdp).find("result=fail") != std::string::npos);
}

TEST_CASE("explicit X/Y partitions are validated") {
  TaxiPhases ph = build_phases("taxi.dfoci");
  Substitution grounding{{"P", Term::constant("p1")}};

  State universe;
  for (const State& s : ph.pickup.mdp.states)
    for (const Atom& a : s.facts) universe.insert(a);
  auto [x_state, y_state] =
      abstraction::partition(ph.pickup_schema, universe, grounding);
  std::set<Atom> X(x_state.facts.begin(), x_state.facts.end());
  std::set<Atom> Y(y_state.facts.begin(), y_state.facts.end());
  CHECK_FALSE(Y.empty());  // the dest atoms

  FactorizationReport rep = check_factorization(ph.pickup.mdp, X, Y);
  CHECK(rep.pass);
  CHECK(rep.groups == 10);

  std::set<Atom> overlapping = Y;
  overlapping.insert(*X.begin());
  CHECK_THROWS_AS(check_factorization(ph.pickup.mdp, X, overlapping),
                  std::invalid_argument);

  std::set<Atom> incomplete = Y;
  incomplete.erase(*incomplete.begin());
  CHECK_THROWS_AS(check_factorization(ph.pickup.mdp, X, incomplete),
                  std::invalid_argument);
}

TEST_CASE("value equivalence holds exactly for the derived schemas") {
  TaxiPhases ph = build_phases("taxi.dfoci");
  Substitution grounding{{"P", Term::constant("p1")}};

  EquivalenceReport pickup_rep =
      check_value_equivalence(ph.pickup.mdp, ph.pickup_schema, grounding);
  CHECK(pickup_rep.pass);
  CHECK(pickup_rep.classes == 10);
  // Identical per-class dynamics make ground and quotient value iteration
  // perform the same float operations: the deviation is exactly zero.
  CHECK(pickup_rep.max_deviation == 0.0);
  CHECK(pickup_rep.factorization.pass);

  EquivalenceReport drop_rep =
      check_value_equivalence(ph.drop.mdp, ph.drop_schema, grounding);
  CHECK(drop_rep.pass);
  CHECK(drop_rep.classes == 246);
  CHECK(drop_rep.max_deviation == 0.0);

  CHECK_THROWS_AS(
      check_value_equivalence(ph.pickup.mdp, ph.pickup_schema, grounding, 0.0),
      std::invalid_argument);
}

TEST_CASE("value equivalence exposes a schema that forgets the destination") {
  TaxiPhases healthy = build_phases("taxi.dfoci");
  TaxiPhases corrupt = build_phases("taxi_nodest.dfoci");
  Substitution grounding{{"P", Term::constant("p1")}};

  // The corrupted statements leave pickup's closure untouched...
  CHECK(corrupt.pickup_schema.str() == healthy.pickup_schema.str());
  EquivalenceReport pickup_rep =
      check_value_equivalence(corrupt.pickup.mdp, corrupt.pickup_schema, grounding);
  CHECK(pickup_rep.pass);

  // ...but drop's closure loses dest(P, L), merging states whose optimal
  // values differ by the cost of driving to the wrong corner.
  std::set<std::string> preds;
  for (const auto& t : corrupt.drop_schema.templates) preds.insert(t.predicate);
  CHECK(preds.count("dest") == 0);

  EquivalenceReport rep =
      check_value_equivalence(corrupt.drop.mdp, corrupt.drop_schema, grounding);
  CHECK_FALSE(rep.pass);
  CHECK(rep.classes == 90);  // 81 passenger-placed + 9 carrying classes
  CHECK(rep.max_deviation > 30.0);
  CHECK(rep.max_deviation < 40.0);
  CHECK(rep.worst_state >= 0);
  CHECK_FALSE(rep.factorization.pass);

  std::set<std::string> reasons;
  for (const auto& v : rep.factorization.violations) reasons.insert(v.reason);
  // Terminality clashes (delivered vs wrong-drop at the same cell) and
  // dropoff reward clashes are both inevitable here.
  CHECK(reasons.count("terminality-differs-within-class") == 1);
  CHECK(reasons.count("reward-differs") == 1);
  CHECK(rep.str(corrupt.drop.mdp).find("result=fail") != std::string::npos);
}
