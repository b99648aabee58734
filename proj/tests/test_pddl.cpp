#include "macroplan/macro.hpp"
#include "macroplan/pddl.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace macroplan;
using testsupport::fixture;

namespace {

Domain depots() { return load_domain(fixture("depots/domain.pddl")); }
Domain rovers() { return load_domain(fixture("rovers/domain.pddl")); }

const char *kMinimal = R"((define (domain empty)
  (:requirements :strips)
  (:predicates (p)))
)";

} // namespace

TEST(Parser, UnloadOperator) {
  Domain d = depots();
  const Operator *op = d.find_operator("unload");
  ASSERT_NE(op, nullptr);
  std::vector<TypedVar> expected{{"?x", "hoist"}, {"?y", "crate"}, {"?t", "truck"}, {"?p", "place"}};
  EXPECT_EQ(op->params, expected);
  EXPECT_EQ(op->pre.size(), 4u);
  EXPECT_EQ(op->add.size(), 1u);
  EXPECT_EQ(op->del.size(), 2u);
  EXPECT_EQ(d.operators.size(), 5u);
}

TEST(Parser, ZeroOperators) {
  Domain d = parse_domain(kMinimal);
  EXPECT_EQ(d.name, "empty");
  EXPECT_TRUE(d.operators.empty());
}

TEST(Parser, RejectsForall) {
  const char *text = R"((define (domain q) (:requirements :strips)
    (:predicates (p ?x))
    (:action a :parameters () :precondition (forall (?x) (p ?x)) :effect (p ?x))))";
  EXPECT_THROW(parse_domain(text), UnsupportedFeature);
}

TEST(Parser, RejectsUnsupportedRequirement) {
  const char *text = R"((define (domain q) (:requirements :adl) (:predicates (p))))";
  EXPECT_THROW(parse_domain(text), UnsupportedFeature);
}

TEST(Parser, RoversFixtureObjects) {
  Domain d = rovers();
  Problem p = load_problem(fixture("rovers/fig3.pddl"), d);
  EXPECT_EQ(p.objects.size(), 14u);
  std::set<std::string> types;
  for (const auto &o : p.objects) {
    types.insert(o.type);
    EXPECT_TRUE(d.types.is_atomic(o.type)) << o.type;
  }
  EXPECT_EQ(types.size(), 6u);
}

TEST(Parser, EmptyGoal) {
  Domain d = parse_domain(kMinimal);
  Problem p = parse_problem("(define (problem e) (:domain empty) (:init (p)) (:goal (and)))", d);
  EXPECT_TRUE(p.goal.empty());
}

TEST(Parser, UndeclaredObjectInInit) {
  Domain d = rovers();
  EXPECT_THROW(parse_problem(R"((define (problem e) (:domain rover)
     (:objects r - rover) (:init (available r) (available ghost)) (:goal (and))))",
                             d),
               UndeclaredSymbol);
}

TEST(Parser, CaseInsensitive) {
  Domain d = parse_domain(R"((DEFINE (DOMAIN Up) (:REQUIREMENTS :STRIPS) (:PREDICATES (P))
    (:ACTION A :PARAMETERS () :PRECONDITION (P) :EFFECT (NOT (P)))))");
  EXPECT_EQ(d.name, "up");
  ASSERT_NE(d.find_operator("a"), nullptr);
}

TEST(Flatten, DepotsAtHasEightSpecializations) {
  Domain flat = flatten_types(depots());
  auto n = std::count_if(flat.predicates.begin(), flat.predicates.end(),
                         [](const Predicate &p) { return p.name == "at"; });
  EXPECT_EQ(n, 8);
  for (const auto &op : flat.operators)
    for (const auto &v : op.params) EXPECT_TRUE(flat.types.is_atomic(v.type));
}

TEST(Flatten, FlatDomainUnchanged) {
  Domain d = parse_domain(R"((define (domain f) (:requirements :strips :typing)
    (:types a b) (:predicates (p ?x - a ?y - b))
    (:action go :parameters (?x - a ?y - b) :precondition (p ?x ?y) :effect (not (p ?x ?y)))))");
  Domain flat = flatten_types(d);
  EXPECT_TRUE(equivalent(d, flat));
}

TEST(Flatten, CartesianProduct) {
  Domain d = parse_domain(R"((define (domain f) (:requirements :strips :typing)
    (:types a b - object a1 a2 - a b1 b2 b3 - b) (:predicates (p ?x - a ?y - b))
    (:action go :parameters (?x - a ?y - b) :precondition (p ?x ?y) :effect (not (p ?x ?y)))))");
  Domain flat = flatten_types(d);
  ASSERT_EQ(flat.operators.size(), 6u);
  std::set<std::pair<std::string, std::string>> sigs;
  for (const auto &op : flat.operators) {
    sigs.insert({op.params[0].type, op.params[1].type});
    EXPECT_EQ(flat.original_operator_name(op.name), "go");
  }
  EXPECT_EQ(sigs.size(), 6u);
}

TEST(Types, Hierarchy) {
  Domain d = depots();
  EXPECT_TRUE(d.types.is_subtype("crate", "locatable"));
  EXPECT_FALSE(d.types.is_subtype("truck", "surface"));
  std::vector<std::string> ts{"depot", "distributor"};
  EXPECT_EQ(d.types.common_supertype(ts), "place");
  EXPECT_EQ(d.types.atomic_subtypes("surface"), (std::vector<std::string>{"pallet", "crate"}));
}

TEST(Writer, RoundTripsOriginalDomain) {
  for (const char *f : {"depots/domain.pddl", "rovers/domain.pddl", "satellite/domain.pddl"}) {
    Domain d = load_domain(fixture(f));
    Domain again = parse_domain(write_domain(d));
    EXPECT_TRUE(equivalent(d, again)) << f;
  }
}

TEST(Writer, RoundTripsProblem) {
  Domain d = depots();
  Problem p = load_problem(fixture("depots/p01.pddl"), d);
  Problem q = parse_problem(write_problem(p), d);
  EXPECT_EQ(std::set<Atom>(p.init.begin(), p.init.end()), std::set<Atom>(q.init.begin(), q.init.end()));
  EXPECT_EQ(p.goal, q.goal);
  EXPECT_EQ(p.objects.size(), q.objects.size());
}

TEST(Writer, EmitsCompiledMacro) {
  Domain d = depots();
  MacroOperator m;
  m.ops = {"unload", "drop"};
  m.vars = {{"?h", "hoist"}, {"?c", "crate"}, {"?t", "truck"}, {"?p", "place"}, {"?s", "surface"}};
  m.bindings = {{0, 1, 2, 3}, {0, 1, 4, 3}};
  m = compile_macro(d, m);
  std::vector<MacroOperator> ms{m};
  std::string text = write_domain(d, ms);
  Domain enhanced = parse_domain(text);
  ASSERT_EQ(enhanced.operators.size(), 6u);
  const Operator *op = enhanced.find_operator("unload--drop");
  ASSERT_NE(op, nullptr);

  Operator fig7{"unload--drop",
                {{"?h", "hoist"}, {"?c", "crate"}, {"?t", "truck"}, {"?p", "place"}, {"?s", "surface"}},
                {{"at", {"?h", "?p"}}, {"in", {"?c", "?t"}}, {"available", {"?h"}},
                 {"at", {"?t", "?p"}}, {"clear", {"?s"}}, {"at", {"?s", "?p"}}},
                {{"at", {"?c", "?p"}}, {"clear", {"?c"}}, {"on", {"?c", "?s"}}},
                {{"in", {"?c", "?t"}}, {"clear", {"?s"}}}};
  EXPECT_TRUE(equivalent(*op, fig7));
  for (const char *name : {"drive", "lift", "drop", "load", "unload"})
    EXPECT_TRUE(equivalent(*enhanced.find_operator(name), *d.find_operator(name))) << name;
}

TEST(Writer, ZeroMacrosRoundTrip) {
  Domain d = rovers();
  std::vector<MacroOperator> none;
  EXPECT_EQ(write_domain(d, none), write_domain(d));
}

TEST(MacroNames, SplitAndJoin) {
  Domain d = rovers();
  std::vector<std::string> ops{"sample-soil", "communicate-soil-data"};
  std::string n = macro_action_name(ops);
  EXPECT_EQ(n, "sample-soil--communicate-soil-data");
  EXPECT_EQ(split_macro_name(d, n), ops);
  EXPECT_TRUE(split_macro_name(d, "navigate").empty());
}
