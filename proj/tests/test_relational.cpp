#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>

#include "reprel/relational.hpp"

using namespace reprel;

TEST_CASE("term classification follows the lexical convention") {
  CHECK(make_term("P").is_variable());
  CHECK(make_term("Loc").is_variable());
  CHECK_FALSE(make_term("p1").is_variable());
  CHECK_FALSE(make_term("l03").is_variable());
  CHECK_FALSE(make_term("3x").is_variable());
  CHECK(is_variable_name("X0"));
  CHECK_FALSE(is_variable_name("x0"));

  // Interning: equal kind + name compare equal.
  CHECK(make_term("P") == Term::var("P"));
  CHECK(make_term("p1") == Term::constant("p1"));
  CHECK(make_term("P") != make_term("Q"));
}

TEST_CASE("atom and literal rendering") {
  Atom a = make_atom("at", {"p1", "l03"});
  CHECK(a.str() == "at(p1,l03)");
  CHECK(a.ground());

  Atom b = make_atom("at", {"P", "l03"});
  CHECK_FALSE(b.ground());

  CHECK(Literal{a, true}.str() == "at(p1,l03)");
  CHECK(Literal{a, false}.str() == "~at(p1,l03)");
  CHECK(make_atom("occupied", {}).str() == "occupied");
}

TEST_CASE("substitute replaces bound variables and passes the rest through") {
  Literal at_pl{make_atom("at", {"P", "L"}), true};

  Literal r1 = substitute(at_pl, Substitution{{"P", Term::constant("p1")}});
  CHECK(r1.str() == "at(p1,L)");

  Literal ground{make_atom("at", {"p1", "l03"}), true};
  CHECK(substitute(ground, Substitution{}) == ground);

  Literal neg{make_atom("in-taxi", {"P"}), false};
  Literal r2 = substitute(neg, Substitution{{"P", Term::constant("p2")}});
  CHECK(r2.str() == "~in-taxi(p2)");
  CHECK_FALSE(r2.positive);
}

TEST_CASE("substitution rejects conflicting rebinding") {
  Substitution theta;
  theta.bind("P", Term::constant("p1"));
  theta.bind("P", Term::constant("p1"));  // same value is fine
  CHECK_THROWS_AS(theta.bind("P", Term::constant("p2")), std::invalid_argument);
}

TEST_CASE("unify against a ground literal") {
  Literal pattern{make_atom("at", {"P", "L"}), true};
  Literal ground{make_atom("at", {"p1", "l03"}), true};

  auto theta = unify(pattern, ground);
  REQUIRE(theta.has_value());
  CHECK(theta->lookup("P")->name == "p1");
  CHECK(theta->lookup("L")->name == "l03");

  // Constant clash.
  Literal fixed{make_atom("at", {"P", "l03"}), true};
  CHECK_FALSE(unify(fixed, Literal{make_atom("at", {"p1", "l44"}), true}).has_value());

  // Predicate mismatch.
  Literal taxi{make_atom("taxi-at", {"L"}), true};
  CHECK_FALSE(unify(taxi, ground).has_value());

  // Arity mismatch.
  Literal unary{make_atom("at", {"P"}), true};
  CHECK_FALSE(unify(unary, ground).has_value());

  // Polarity mismatch.
  Literal neg{make_atom("at", {"P", "L"}), false};
  CHECK_FALSE(unify(neg, ground).has_value());

  // Right side must be ground.
  CHECK_THROWS_AS(unify(pattern, Literal{make_atom("at", {"p1", "L"}), true}),
                  std::invalid_argument);
}

TEST_CASE("unify round-trips substitute") {
  Literal lit{make_atom("at", {"P", "L"}), true};
  Substitution theta{{"P", Term::constant("p2")}, {"L", Term::constant("l40")}};
  Literal grounded = substitute(lit, theta);

  auto back = unify(lit, grounded);
  REQUIRE(back.has_value());
  CHECK(*back->lookup("P") == *theta.lookup("P"));
  CHECK(*back->lookup("L") == *theta.lookup("L"));
}

TEST_CASE("holds evaluates closed-world") {
  State s{{make_atom("at", {"p1", "l03"})}};

  CHECK(holds(s, Literal{make_atom("at", {"p1", "l03"}), true}));
  CHECK(holds(s, Literal{make_atom("in-taxi", {"p1"}), false}));
  CHECK_FALSE(holds(State{}, Literal{make_atom("at", {"p1", "l03"}), true}));

  // Adding facts never falsifies a positive literal.
  State bigger = s;
  bigger.insert(make_atom("taxi-at", {"l00"}));
  CHECK(holds(bigger, Literal{make_atom("at", {"p1", "l03"}), true}));

  CHECK_THROWS_AS(holds(s, Literal{make_atom("at", {"P", "l03"}), true}),
                  std::invalid_argument);
}

TEST_CASE("goal satisfaction is a conjunction") {
  State s{{make_atom("at", {"p1", "l40"}), make_atom("dest", {"p1", "l40"})}};

  Goal g1{{Literal{make_atom("at", {"p1", "l40"}), true}}};
  CHECK(goal_satisfied(s, g1));

  State carrying{{make_atom("in-taxi", {"p1"})}};
  CHECK_FALSE(goal_satisfied(carrying, g1));

  CHECK(goal_satisfied(s, Goal{}));
  CHECK(goal_satisfied(carrying, Goal{}));

  // g1 ∪ g2 satisfied iff both conjuncts are.
  Goal g2{{Literal{make_atom("dest", {"p1", "l40"}), true}}};
  Goal both{{Literal{make_atom("at", {"p1", "l40"}), true},
             Literal{make_atom("dest", {"p1", "l40"}), true}}};
  CHECK(goal_satisfied(s, both) == (goal_satisfied(s, g1) && goal_satisfied(s, g2)));
}

TEST_CASE("state keys are canonical") {
  State a;
  a.insert(make_atom("taxi-at", {"l21"}));
  a.insert(make_atom("at", {"p1", "l03"}));

  State b;
  b.insert(make_atom("at", {"p1", "l03"}));
  b.insert(make_atom("taxi-at", {"l21"}));

  CHECK(a == b);
  CHECK(a.key() == b.key());
  CHECK(a.key() == "at(p1,l03);taxi-at(l21)");
  CHECK(State{}.key().empty());
}
