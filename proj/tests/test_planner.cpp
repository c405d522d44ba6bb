#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "reprel/errors.hpp"
#include "reprel/planner.hpp"
#include "reprel/taxi.hpp"

using namespace reprel;
using namespace reprel::planner;

namespace {

std::string data_path(const std::string& name) {
  return std::string(REPREL_DATA_DIR) + "/" + name;
}

std::vector<SubtaskOperator> taxi_ops() { return load_operators(data_path("taxi.ops")); }

Literal lit(const Atom& a, bool positive = true) { return Literal{a, positive}; }

}  // namespace

TEST_CASE("shipped operator file parses to the expected structure") {
  std::vector<SubtaskOperator> ops = taxi_ops();
  REQUIRE(ops.size() == 2);

  const SubtaskOperator& pickup = ops[0];
  CHECK(pickup.name == "pickup");
  CHECK(pickup.params == std::vector<std::string>{"P"});
  REQUIRE(pickup.preconditions.size() == 3);
  CHECK(pickup.preconditions[0] == lit(make_atom("in-taxi", {"P"}), false));
  CHECK(pickup.preconditions[1] == lit(make_atom("occupied", {}), false));
  CHECK(pickup.preconditions[2] == lit(make_atom("delivered", {"P"}), false));
  CHECK(pickup.add_effects ==
        std::vector<Atom>{make_atom("in-taxi", {"P"}), make_atom("occupied", {})});
  CHECK(pickup.del_effects.empty());

  const SubtaskOperator& drop = ops[1];
  CHECK(drop.name == "drop");
  CHECK(drop.preconditions == std::vector<Literal>{lit(make_atom("in-taxi", {"P"}))});
  CHECK(drop.del_effects ==
        std::vector<Atom>{make_atom("in-taxi", {"P"}), make_atom("occupied", {})});
  CHECK(drop.add_effects == std::vector<Atom>{make_atom("delivered", {"P"})});
}

TEST_CASE("operator parse errors carry positions") {
  auto line_of = [](const std::string& text) {
    try {
      parse_operators(text, "ops");
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };

  CHECK(line_of("pre in-taxi(P)\n") == 1);               // effect before operator
  CHECK(line_of("operator go(P)\nfly north\n") == 2);    // unknown directive
  CHECK(line_of("operator go(p1)\n") == 1);              // constant parameter
  CHECK(line_of("operator go(P)\nadd at(Q)\n") == 2);    // undeclared variable
  CHECK(line_of("operator go(P\n") == 1);                // missing ')'
  CHECK(line_of("") == 0);                               // no operators at all
  CHECK(line_of("# just a comment\n") == 0);
  CHECK_THROWS_AS(load_operators(data_path("nope.ops")), ParseError);
}

TEST_CASE("grounding binds parameters positionally") {
  GroundOperator g = ground(taxi_ops()[0], {"p1"});
  CHECK(g.step == make_atom("pickup", {"p1"}));
  CHECK(g.preconditions[0] == lit(make_atom("in-taxi", {"p1"}), false));
  CHECK(g.add_effects[0] == make_atom("in-taxi", {"p1"}));

  CHECK_THROWS_AS(ground(taxi_ops()[0], {}), std::invalid_argument);
  CHECK_THROWS_AS(ground(taxi_ops()[0], {"p1", "p2"}), std::invalid_argument);
}

TEST_CASE("applicability is closed-world over the projection") {
  GroundOperator pickup = ground(taxi_ops()[0], {"p1"});
  GroundOperator drop = ground(taxi_ops()[1], {"p1"});

  State empty_taxi;
  empty_taxi.insert(make_atom("dest", {"p1", "l40"}));
  CHECK(applicable(pickup, empty_taxi));
  CHECK_FALSE(applicable(drop, empty_taxi));

  State carrying;
  carrying.insert(make_atom("in-taxi", {"p1"}));
  carrying.insert(make_atom("occupied", {}));
  CHECK_FALSE(applicable(pickup, carrying));
  CHECK(applicable(drop, carrying));

  // Capacity one: carrying p1 blocks pickup(p2) through `occupied`.
  carrying.insert(make_atom("dest", {"p2", "l00"}));
  CHECK_FALSE(applicable(ground(taxi_ops()[0], {"p2"}), carrying));

  State done;
  done.insert(make_atom("delivered", {"p1"}));
  CHECK_FALSE(applicable(pickup, done));
}

// apply() is a generic STRIPS update; exercise it with operators whose
// effects move the location facts around, not just the shipped ones.
TEST_CASE("apply performs the add and delete sets") {
  SubtaskOperator pickup_at;
  pickup_at.name = "pickup";
  pickup_at.params = {"P", "L"};
  pickup_at.preconditions = {lit(make_atom("at", {"P", "L"})),
                             lit(make_atom("occupied", {}), false)};
  pickup_at.del_effects = {make_atom("at", {"P", "L"})};
  pickup_at.add_effects = {make_atom("in-taxi", {"P"}), make_atom("occupied", {})};

  State s;
  s.insert(make_atom("at", {"p1", "l03"}));
  State next = apply(ground(pickup_at, {"p1", "l03"}), s);
  State want;
  want.insert(make_atom("in-taxi", {"p1"}));
  want.insert(make_atom("occupied", {}));
  CHECK(next == want);

  SubtaskOperator drop_at;
  drop_at.name = "drop";
  drop_at.params = {"P", "D"};
  drop_at.preconditions = {lit(make_atom("in-taxi", {"P"})),
                           lit(make_atom("dest", {"P", "D"}))};
  drop_at.del_effects = {make_atom("in-taxi", {"P"}), make_atom("occupied", {}),
                         make_atom("dest", {"P", "D"})};
  drop_at.add_effects = {make_atom("at", {"P", "D"}), make_atom("delivered", {"P"})};

  State mid;
  mid.insert(make_atom("in-taxi", {"p1"}));
  mid.insert(make_atom("occupied", {}));
  mid.insert(make_atom("dest", {"p1", "l40"}));
  State after = apply(ground(drop_at, {"p1", "l40"}), mid);
  State want2;
  want2.insert(make_atom("at", {"p1", "l40"}));
  want2.insert(make_atom("delivered", {"p1"}));
  CHECK(after == want2);

  // Preconditions are enforced.
  CHECK_THROWS_AS(apply(ground(drop_at, {"p1", "l40"}), s), std::logic_error);
}

TEST_CASE("single-passenger delivery plans in two steps") {
  taxi::Instance inst = taxi::load_instance(data_path("taxi3x3.instance"));
  State initial = taxi::planning_state(taxi::reset(inst, 0));
  Goal goal = taxi::planning_goal(inst);

  std::optional<Plan> plan =
      make_plan(initial, goal, taxi_ops(), taxi::planning_objects(inst));
  REQUIRE(plan.has_value());
  CHECK(plan->steps ==
        std::vector<Atom>{make_atom("pickup", {"p1"}), make_atom("drop", {"p1"})});
  CHECK(plan->str() == "pickup(p1)\ndrop(p1)\n");
}

TEST_CASE("two-passenger delivery plans sequentially") {
  taxi::Instance inst = taxi::load_instance(data_path("taxi_task2.instance"));
  State initial = taxi::planning_state(taxi::reset(inst, 3));
  Goal goal = taxi::planning_goal(inst);
  std::vector<std::string> objects = taxi::planning_objects(inst);
  std::vector<SubtaskOperator> ops = taxi_ops();

  std::optional<Plan> plan = make_plan(initial, goal, ops, objects);
  REQUIRE(plan.has_value());
  // Shortest is four steps; the lexicographic tie-break serves p1 first.
  CHECK(plan->steps == std::vector<Atom>{
                           make_atom("pickup", {"p1"}),
                           make_atom("drop", {"p1"}),
                           make_atom("pickup", {"p2"}),
                           make_atom("drop", {"p2"}),
                       });

  // Replaying the plan through apply() reaches the goal.
  State s = initial;
  for (const Atom& step : plan->steps) {
    const SubtaskOperator& op = step.predicate == "pickup" ? ops[0] : ops[1];
    s = apply(ground(op, {step.args[0].name}), s);
  }
  CHECK(goal_satisfied(s, goal));

  // No shorter sequence works: brute-force every sequence of ground steps
  // up to length three.
  std::vector<GroundOperator> all;
  for (const SubtaskOperator& op : ops)
    for (const std::string& name : objects) all.push_back(ground(op, {name}));
  std::vector<int> stack;
  auto search = [&](auto&& self, const State& cur, int depth) -> bool {
    if (goal_satisfied(cur, goal)) return true;
    if (depth == 0) return false;
    for (const GroundOperator& g : all) {
      if (!applicable(g, cur)) continue;
      if (self(self, apply(g, cur), depth - 1)) return true;
    }
    return false;
  };
  CHECK_FALSE(search(search, initial, 3));
  CHECK(search(search, initial, 4));
}

TEST_CASE("planning edge cases") {
  std::vector<SubtaskOperator> ops = taxi_ops();

  // Already satisfied: empty plan, not nullopt.
  State done;
  done.insert(make_atom("delivered", {"p1"}));
  Goal goal;
  goal.literals.insert(lit(make_atom("delivered", {"p1"})));
  std::optional<Plan> plan = make_plan(done, goal, ops, {"p1"});
  REQUIRE(plan.has_value());
  CHECK(plan->steps.empty());
  CHECK(plan->str().empty());

  // Unreachable goal: nothing produces delivered(p9) when p9 is not an object.
  State fresh;
  CHECK_FALSE(make_plan(fresh, goal, ops, {"p9"}).has_value());  // wrong object
  Goal for_p9;
  for_p9.literals.insert(lit(make_atom("delivered", {"p9"})));
  CHECK_FALSE(make_plan(fresh, for_p9, ops, {"p1"}).has_value());

  // Exhausted node budget: nullopt rather than an exception.
  Goal both;
  both.literals.insert(lit(make_atom("delivered", {"p1"})));
  both.literals.insert(lit(make_atom("delivered", {"p2"})));
  CHECK_FALSE(make_plan(fresh, both, ops, {"p1", "p2"}, 2).has_value());
  CHECK(make_plan(fresh, both, ops, {"p1", "p2"}).has_value());

  // Negative goal literals are honoured.
  Goal not_carrying;
  not_carrying.literals.insert(lit(make_atom("delivered", {"p1"})));
  not_carrying.literals.insert(lit(make_atom("occupied", {}), false));
  std::optional<Plan> p = make_plan(fresh, not_carrying, ops, {"p1"});
  REQUIRE(p.has_value());
  CHECK(p->steps.size() == 2);
}

TEST_CASE("zero-arity operators ground once") {
  std::vector<SubtaskOperator> ops =
      parse_operators("operator ring\nadd bell\n", "ops");
  REQUIRE(ops.size() == 1);
  CHECK(ops[0].params.empty());

  GroundOperator g = ground(ops[0], {});
  CHECK(g.step == make_atom("ring", {}));
  CHECK(g.step.str() == "ring");

  Goal goal;
  goal.literals.insert(lit(make_atom("bell", {})));
  std::optional<Plan> plan = make_plan(State{}, goal, ops, {});
  REQUIRE(plan.has_value());
  CHECK(plan->str() == "ring\n");
}
