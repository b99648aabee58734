#include "macroplan/caed.hpp"
#include "macroplan/components.hpp"
#include "macroplan/macro.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace macroplan;
using testsupport::fixture;

namespace {

Domain depots() { return load_domain(fixture("depots/domain.pddl")); }

const Operator &op(const Domain &d, const std::string &name) {
  const Operator *o = d.find_operator(name);
  if (!o) throw std::runtime_error("missing operator " + name);
  return *o;
}

MacroOperator unload_drop(const Domain &d) {
  const Domain *types = &d;
  MacroOperator m;
  m = add_operator_to_macro(op(d, "unload"), m,
                            {{"?x", "?h"}, {"?y", "?c"}, {"?t", "?t"}, {"?p", "?p"}}, types);
  return add_operator_to_macro(op(d, "drop"), m,
                               {{"?x", "?h"}, {"?y", "?c"}, {"?s", "?s"}, {"?p", "?p"}}, types);
}

std::set<Atom> atoms(std::initializer_list<Atom> l) { return std::set<Atom>(l); }

Domain toy_cycle() {
  return parse_domain(R"((define (domain cyc) (:requirements :strips)
    (:predicates (x) (y) (z) (q))
    (:action a :parameters () :precondition (x) :effect (and (y) (not (x))))
    (:action b :parameters () :precondition (y) :effect (and (z) (not (y))))
    (:action c :parameters () :precondition (z) :effect (and (x) (not (z))))
    (:action kill :parameters () :precondition (and) :effect (not (q)))
    (:action make :parameters () :precondition (and) :effect (q))))");
}

MacroSearchNode chain(const Domain &d, std::initializer_list<const char *> names) {
  MacroSearchNode n;
  for (const char *s : names) n = extend_node(n, op(d, s), {}, &d);
  return n;
}

} // namespace

TEST(Compose, UnloadDrop) {
  Domain d = depots();
  MacroOperator m = unload_drop(d);
  std::vector<TypedVar> params{{"?h", "hoist"}, {"?c", "crate"}, {"?t", "truck"}, {"?p", "place"}, {"?s", "surface"}};
  EXPECT_EQ(m.vars, params);
  ASSERT_TRUE(m.compiled);
  EXPECT_EQ(m.compiled->pre, atoms({{"at", {"?h", "?p"}}, {"in", {"?c", "?t"}}, {"available", {"?h"}},
                                    {"at", {"?t", "?p"}}, {"clear", {"?s"}}, {"at", {"?s", "?p"}}}));
  EXPECT_EQ(m.compiled->add, atoms({{"at", {"?c", "?p"}}, {"clear", {"?c"}}, {"on", {"?c", "?s"}}}));
  EXPECT_EQ(m.compiled->del, atoms({{"in", {"?c", "?t"}}, {"clear", {"?s"}}}));
  EXPECT_EQ(m.name(), "unload--drop");
  EXPECT_EQ(m.bindings, (std::vector<std::vector<std::size_t>>{{0, 1, 2, 3}, {0, 1, 4, 3}}));
  // Composition from definitions gives the same body.
  MacroOperator again = compile_macro(d, MacroOperator{m.ops, m.bindings, m.vars, {}, 0});
  EXPECT_EQ(*again.compiled, *m.compiled);
}

TEST(Compose, AddAfterDeleteRestores) {
  Domain d = toy_cycle();
  MacroOperator m;
  m = add_operator_to_macro(op(d, "kill"), m, {});
  EXPECT_EQ(m.compiled->del, atoms({{"q", {}}}));
  m = add_operator_to_macro(op(d, "make"), m, {});
  EXPECT_TRUE(m.compiled->del.empty());
  EXPECT_EQ(m.compiled->add, atoms({{"q", {}}}));
}

TEST(Compose, InverseCancels) {
  Domain d = depots();
  MacroOperator m;
  m = add_operator_to_macro(op(d, "drive"), m, {{"?x", "?t"}, {"?y", "?a"}, {"?z", "?b"}}, &d);
  m = add_operator_to_macro(op(d, "drive"), m, {{"?x", "?t"}, {"?y", "?b"}, {"?z", "?a"}}, &d);
  EXPECT_TRUE(m.compiled->add.empty());
  EXPECT_TRUE(m.compiled->del.empty());
}

TEST(Compose, LiftThenDropCancelsLifting) {
  Domain d = depots();
  MacroOperator m;
  m = add_operator_to_macro(op(d, "lift"), m, {{"?x", "?h"}, {"?y", "?c"}, {"?z", "?z"}, {"?p", "?p"}}, &d);
  m = add_operator_to_macro(op(d, "drop"), m, {{"?x", "?h"}, {"?y", "?c"}, {"?s", "?s"}, {"?p", "?p"}}, &d);
  Atom lifting{"lifting", {"?h", "?c"}};
  EXPECT_FALSE(m.compiled->add.count(lifting));
  EXPECT_FALSE(m.compiled->del.count(lifting));
}

TEST(Compose, CancelWithoutDomainKeepsDelete) {
  Domain d = depots();
  MacroOperator m;
  m = add_operator_to_macro(op(d, "drive"), m, {{"?x", "?t"}, {"?y", "?a"}, {"?z", "?b"}});
  m = add_operator_to_macro(op(d, "drive"), m, {{"?x", "?t"}, {"?y", "?b"}, {"?z", "?a"}});
  EXPECT_TRUE(m.compiled->add.empty());
  EXPECT_EQ(m.compiled->del, atoms({{"at", {"?t", "?b"}}}));
}

TEST(Compose, UnprovenExclusionKeepsDelete) {
  Domain d = load_domain(fixture("rovers/domain.pddl"));
  MacroOperator m;
  m = add_operator_to_macro(op(d, "calibrate"), m, {{"?r", "?r"}, {"?i", "?i"}, {"?t", "?t"}, {"?w", "?w"}}, &d);
  m = add_operator_to_macro(op(d, "take-image"), m,
                            {{"?r", "?r"}, {"?p", "?w"}, {"?o", "?o"}, {"?i", "?i"}, {"?m", "?m"}}, &d);
  // The camera may already be calibrated; the chain leaves it uncalibrated.
  EXPECT_TRUE(m.compiled->del.count(Atom{"calibrated", {"?i", "?r"}}));
}

TEST(Exclusive, DepotsInvariants) {
  Domain d = depots();
  std::vector<TypedVar> vars{{"?h", "hoist"}, {"?c", "crate"}, {"?t", "truck"}, {"?a", "place"}, {"?b", "place"}};
  EXPECT_TRUE(exclusive_atoms(d, {"lifting", {"?h", "?c"}}, {"available", {"?h"}}, vars));
  EXPECT_TRUE(exclusive_atoms(d, {"at", {"?t", "?a"}}, {"at", {"?t", "?b"}}, vars));
  // Untyped, the group grows to cover crates held by hoists or in trucks.
  EXPECT_TRUE(exclusive_atoms(d, {"at", {"?t", "?a"}}, {"at", {"?t", "?b"}}));
  EXPECT_FALSE(exclusive_atoms(d, {"at", {"?t", "?a"}}, {"clear", {"?a"}}, vars));
  EXPECT_FALSE(exclusive_atoms(d, {"available", {"?h"}}, {"available", {"?h"}}, vars));
  EXPECT_FALSE(exclusive_atoms(d, {"clear", {"?c"}}, {"available", {"?h"}}, vars));
}

TEST(Compose, TypeMismatchThrows) {
  Domain d = depots();
  MacroOperator m;
  m = add_operator_to_macro(op(d, "drive"), m, {{"?x", "?t"}, {"?y", "?a"}, {"?z", "?b"}}, &d);
  EXPECT_THROW(add_operator_to_macro(op(d, "drop"), m,
                                     {{"?x", "?t"}, {"?y", "?c"}, {"?s", "?s"}, {"?p", "?a"}}, &d),
               std::invalid_argument);
}

TEST(Prune, NegatedPrecondition) {
  Domain d = depots();
  MacroOperator lifted;
  lifted = add_operator_to_macro(op(d, "lift"), lifted,
                                 {{"?x", "?h"}, {"?y", "?c"}, {"?z", "?z"}, {"?p", "?p"}}, &d);
  // lift deleted (clear ?c); drop onto ?c needs it.
  EXPECT_TRUE(prune_negated_precondition(op(d, "drop"),
                                         {{"?x", "?h"}, {"?y", "?c2"}, {"?s", "?c"}, {"?p", "?p"}}, lifted));
  EXPECT_FALSE(prune_negated_precondition(op(d, "drive"),
                                          {{"?x", "?t"}, {"?y", "?a"}, {"?z", "?b"}}, lifted));
  MacroOperator unloaded;
  unloaded = add_operator_to_macro(op(d, "unload"), unloaded,
                                   {{"?x", "?h"}, {"?y", "?c"}, {"?t", "?t"}, {"?p", "?p"}}, &d);
  EXPECT_FALSE(prune_negated_precondition(op(d, "drop"),
                                          {{"?x", "?h"}, {"?y", "?c"}, {"?s", "?s"}, {"?p", "?p"}}, unloaded));
}

TEST(Prune, Chaining) {
  Domain d = depots();
  VarMap uvm{{"?x", "?h"}, {"?y", "?c"}, {"?t", "?t"}, {"?p", "?p"}};
  VarMap dvm{{"?x", "?h"}, {"?y", "?c"}, {"?s", "?s"}, {"?p", "?p"}};
  EXPECT_FALSE(prune_chaining(op(d, "drop"), dvm, op(d, "unload"), uvm));
  VarMap drive{{"?x", "?t"}, {"?y", "?a"}, {"?z", "?b"}};
  EXPECT_TRUE(prune_chaining(op(d, "drive"), drive, op(d, "unload"), uvm));
  Domain t = toy_cycle();
  EXPECT_TRUE(prune_chaining(op(t, "make"), {}, op(t, "a"), {}));
}

TEST(Prune, Size) {
  Domain d = depots();
  MacroOperator m = unload_drop(d);
  SizeLimits limits;
  EXPECT_FALSE(prune_size(m, limits));  // |P| = 6
  limits.max_preconditions = 5;
  EXPECT_TRUE(prune_size(m, limits));
  MacroOperator three = add_operator_to_macro(op(d, "lift"), m,
                                              {{"?x", "?h"}, {"?y", "?c"}, {"?z", "?s"}, {"?p", "?p"}}, &d);
  EXPECT_TRUE(prune_size(three, SizeLimits{2, 100}));
  EXPECT_FALSE(prune_size(three, SizeLimits{3, 100}));
}

TEST(Prune, Repetition) {
  Domain d = toy_cycle();
  EXPECT_FALSE(prune_repetition(chain(d, {"a", "b"})));
  EXPECT_TRUE(prune_repetition(chain(d, {"a", "b", "c"})));
  Domain dep = depots();
  MacroSearchNode n;
  n = extend_node(n, op(dep, "drive"), {{"?x", "?t"}, {"?y", "?a"}, {"?z", "?b"}}, &dep);
  n = extend_node(n, op(dep, "drive"), {{"?x", "?t"}, {"?y", "?b"}, {"?z", "?a"}}, &dep);
  EXPECT_TRUE(prune_repetition(n));
}

TEST(Restore, MergesPlaceVariants) {
  Domain d = depots();
  Domain flat = flatten_types(d);
  auto variant = [&](const std::string &place) {
    MacroOperator m;
    m = add_operator_to_macro(op(flat, "unload_" + place), m,
                              {{"?x", "?h"}, {"?y", "?c"}, {"?t", "?t"}, {"?p", "?p"}});
    return add_operator_to_macro(op(flat, "drop_crate_" + place), m,
                                 {{"?x", "?h"}, {"?y", "?c"}, {"?s", "?s"}, {"?p", "?p"}});
  };
  std::vector<MacroOperator> both{variant("depot"), variant("distributor")};
  auto merged = restore_hierarchy(both, flat);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].ops, (std::vector<std::string>{"unload", "drop"}));
  EXPECT_EQ(merged[0].vars[3].type, "place");
  EXPECT_EQ(merged[0].vars[4].type, "crate");

  std::vector<MacroOperator> one{variant("depot")};
  auto kept = restore_hierarchy(one, flat);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].vars[3].type, "depot");
  EXPECT_EQ(kept[0].ops, (std::vector<std::string>{"unload", "drop"}));
}

TEST(Restore, SingleMacroUnchanged) {
  Domain d = depots();
  Domain flat = flatten_types(d);
  std::vector<MacroOperator> ms{unload_drop(d)};
  auto out = restore_hierarchy(ms, flat);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].vars, ms[0].vars);
  EXPECT_EQ(*out[0].compiled, *ms[0].compiled);
}

TEST(Variants, UniqueNames) {
  Domain d = depots();
  std::vector<MacroOperator> ms{unload_drop(d), unload_drop(d)};
  ms[1].vars[4].type = "pallet";
  assign_variants(ms);
  EXPECT_NE(ms[0].name(), ms[1].name());
}

namespace {

struct RoversTypes : ::testing::Test {
  Domain domain = load_domain(fixture("rovers/domain.pddl"));
  Problem problem = load_problem(fixture("rovers/fig3.pddl"), domain);
  PredicatePartition partition = partition_predicates(domain);
  StaticGraph graph = build_static_graph(problem, partition);
  AbstractType type() {
    ClusteringOptions o;
    o.seed_type = "camera";
    auto comps = all_components(component_abstraction(graph, domain, o));
    return abstract_type_of(comps.at(0), graph);
  }
  MacroOperator take_take(bool same_rover) {
    MacroOperator m;
    m = add_operator_to_macro(op(domain, "take-image"), m,
                              {{"?r", "?r1"}, {"?p", "?p1"}, {"?o", "?o1"}, {"?i", "?i1"}, {"?m", "?m1"}});
    std::string r = same_rover ? "?r1" : "?r2", i = same_rover ? "?i1" : "?i2";
    return add_operator_to_macro(op(domain, "take-image"), m,
                                 {{"?r", r}, {"?p", "?p2"}, {"?o", "?o2"}, {"?i", i}, {"?m", "?m2"}});
  }
};

} // namespace

TEST_F(RoversTypes, LocalityRejectsTwoCameras) {
  EXPECT_FALSE(locality_check(take_take(false), type(), partition));
}

TEST_F(RoversTypes, LocalityAcceptsOneCamera) {
  AbstractType at = type();
  EXPECT_TRUE(locality_check(take_take(true), at, partition));
  MacroOperator m;
  m = add_operator_to_macro(op(domain, "calibrate"), m,
                            {{"?r", "?r"}, {"?i", "?i"}, {"?t", "?t"}, {"?w", "?w"}});
  m = add_operator_to_macro(op(domain, "take-image"), m,
                            {{"?r", "?r"}, {"?p", "?w"}, {"?o", "?o"}, {"?i", "?i"}, {"?m", "?m"}});
  EXPECT_TRUE(locality_check(m, at, partition));
}

TEST_F(RoversTypes, LocalityAcceptsNoStatics) {
  MacroOperator m;
  m = add_operator_to_macro(op(domain, "navigate"), m, {{"?x", "?x"}, {"?y", "?y"}, {"?z", "?z"}});
  EXPECT_TRUE(locality_check(m, type(), partition));
}

TEST_F(RoversTypes, GeneratedMacrosAreLocal) {
  Domain flat = flatten_types(domain);
  AbstractType at = type();
  auto gen = generate_macros(flat, at, partition);
  EXPECT_FALSE(gen.truncated);
  EXPECT_FALSE(gen.macros.empty());
  for (const auto &m : gen.macros) {
    EXPECT_TRUE(locality_check(m, at, partition)) << m.name();
    EXPECT_LE(m.length(), 2u);
    EXPECT_LE(m.compiled->pre.size(), 6u);
    if (m.ops == std::vector<std::string>{"take-image", "take-image"})
      EXPECT_EQ(m.bindings[0][0], m.bindings[1][0]) << "two rovers";
  }
}

TEST(Generation, DepotsContainsUnloadDrop) {
  Domain d = depots();
  Problem p = load_problem(fixture("depots/p01.pddl"), d);
  auto part = partition_predicates(d);
  auto graph = build_static_graph(p, part);
  std::vector<AbstractType> types;
  for (const auto &c : all_components(component_abstraction(graph, d)))
    types.push_back(abstract_type_of(c, graph));
  ASSERT_FALSE(types.empty());
  Domain flat = flatten_types(d);
  auto gen = generate_macros(flat, types, part);
  auto restored = restore_hierarchy(gen.macros, flat);
  MacroOperator fig7 = unload_drop(d);
  bool found = false;
  for (const auto &m : restored)
    if (m.ops == fig7.ops) {
      Operator a = m.as_operator(), b = fig7.as_operator();
      a.name = b.name;
      found = found || equivalent(a, b);
    }
  EXPECT_TRUE(found);
}

TEST(Generation, SelfChainFailsGivesNothing) {
  Domain d = parse_domain(R"((define (domain one) (:requirements :strips :typing)
    (:types a b) (:predicates (p ?x - a) (q ?y - b) (s ?x - a ?y - b))
    (:action go :parameters (?x - a ?y - b) :precondition (and (p ?x) (s ?x ?y)) :effect (q ?y))))");
  Problem p = parse_problem(R"((define (problem one1) (:domain one) (:objects a1 - a b1 - b)
    (:init (p a1) (s a1 b1)) (:goal (q b1))))", d);
  auto part = partition_predicates(d);
  auto g = build_static_graph(p, part);
  auto comps = all_components(component_abstraction(g, d));
  ASSERT_FALSE(comps.empty());
  auto gen = generate_macros(flatten_types(d), abstract_type_of(comps[0], g), part);
  EXPECT_TRUE(gen.macros.empty());
}

TEST(Generation, NodeBudgetTruncates) {
  Domain d = load_domain(fixture("rovers/domain.pddl"));
  Problem p = load_problem(fixture("rovers/fig3.pddl"), d);
  auto part = partition_predicates(d);
  auto g = build_static_graph(p, part);
  auto comps = all_components(component_abstraction(g, d));
  GenerationLimits limits;
  limits.max_nodes = 3;
  auto gen = generate_macros(flatten_types(d), abstract_type_of(comps.at(0), g), part, limits);
  EXPECT_TRUE(gen.truncated);
}
