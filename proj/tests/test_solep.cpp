#include "macroplan/pipeline.hpp"
#include "macroplan/solep.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace macroplan;
using testsupport::fixture;

namespace {

struct SatellitePlan : ::testing::Test {
  Domain domain = load_domain(fixture("satellite/domain.pddl"));
  std::vector<PrimitiveStep> plan = parse_plan(read_file(fixture("satellite/p01.plan")));
};

using Pair = std::pair<std::string, std::string>;

} // namespace

TEST(Interaction, Rules) {
  EXPECT_TRUE(steps_interact({"a", {"x", "y"}}, {"b", {"y", "z"}}));
  EXPECT_FALSE(steps_interact({"a", {"x"}}, {"b", {"z"}}));
  EXPECT_TRUE(steps_interact({"a", {}}, {"b", {"z"}}));
  EXPECT_TRUE(steps_interact({"a", {"x"}}, {"b", {}}));
}

TEST(SolutionGraphTest, DisjointStepsNotLinked) {
  std::vector<PrimitiveStep> plan{{"a", {"x"}}, {"b", {"y"}}, {"c", {"y"}}};
  auto g = build_solution_graph(plan);
  EXPECT_EQ(g.edges, (std::vector<std::pair<std::size_t, std::size_t>>{{1, 2}}));
}

TEST_F(SatellitePlan, EveryConsecutivePairInteracts) {
  ASSERT_EQ(plan.size(), 9u);
  auto g = build_solution_graph(plan);
  EXPECT_EQ(g.edges.size(), plan.size() - 1);
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    EXPECT_EQ(g.edges[i], std::make_pair(i, i + 1));
}

TEST_F(SatellitePlan, ExtractionCounts) {
  auto macros = extract_macros(domain, plan);
  ASSERT_EQ(macros.size(), 5u);
  std::map<Pair, std::size_t> occ;
  std::size_t total = 0;
  for (const auto &m : macros) {
    ASSERT_EQ(m.macro.length(), 2u);
    occ[{m.macro.ops[0], m.macro.ops[1]}] = m.occurrences;
    total += m.occurrences;
  }
  EXPECT_EQ(total, plan.size() - 1);
  EXPECT_EQ((occ[{"turn-to", "take-image"}]), 3u);
  EXPECT_EQ((occ[{"take-image", "turn-to"}]), 2u);
  EXPECT_EQ((occ[{"switch-on", "turn-to"}]), 1u);
  EXPECT_EQ((occ[{"turn-to", "calibrate"}]), 1u);
  EXPECT_EQ((occ[{"calibrate", "turn-to"}]), 1u);
}

TEST_F(SatellitePlan, LiftingNumbersVariables) {
  std::span<const PrimitiveStep> two(plan.data() + 3, 2);  // turn-to, take-image
  MacroOperator m = lift_steps(domain, two);
  // (turn-to sat0 phen4 gs2) (take-image sat0 phen4 inst0 thermo0)
  std::vector<TypedVar> vars{{"?x0", "satellite"}, {"?x1", "direction"}, {"?x2", "direction"},
                             {"?x3", "instrument"}, {"?x4", "mode"}};
  EXPECT_EQ(m.vars, vars);
  EXPECT_EQ(m.bindings, (std::vector<std::vector<std::size_t>>{{0, 1, 2}, {0, 1, 3, 4}}));
  EXPECT_FALSE(m.compiled.has_value());
}

TEST_F(SatellitePlan, ShortPlanHasNoMacros) {
  std::span<const PrimitiveStep> one(plan.data(), 1);
  EXPECT_TRUE(extract_macros(domain, one).empty());
}

TEST_F(SatellitePlan, SamePatternMerges) {
  std::vector<PrimitiveStep> p{{"switch-on", {"i0", "s0"}},
                               {"turn-to", {"s0", "d1", "d0"}},
                               {"switch-on", {"i1", "s1"}},
                               {"turn-to", {"s1", "d3", "d2"}}};
  auto macros = extract_macros(domain, p);
  std::map<Pair, std::size_t> occ;
  for (const auto &m : macros) occ[{m.macro.ops[0], m.macro.ops[1]}] = m.occurrences;
  EXPECT_EQ((occ[{"switch-on", "turn-to"}]), 2u);
}

TEST_F(SatellitePlan, FilterRejectsUndoingPair) {
  std::vector<PrimitiveStep> p{{"turn-to", {"s0", "b", "a"}}, {"turn-to", {"s0", "a", "b"}}};
  EXPECT_FALSE(solep_filter(domain, lift_steps(domain, p)));
  EXPECT_TRUE(extract_macros(domain, p).empty());
  std::vector<PrimitiveStep> q{{"turn-to", {"s0", "b", "a"}}, {"take-image", {"s0", "b", "i0", "m0"}}};
  EXPECT_TRUE(solep_filter(domain, lift_steps(domain, q)));
}
