#pragma once

#include "macroplan/grounding.hpp"
#include "macroplan/macro.hpp"

#include <span>
#include <utility>
#include <vector>

namespace macroplan {

/// Plan steps as nodes; edges join consecutive steps that interact.
struct SolutionGraph {
  std::vector<PrimitiveStep> steps;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Two actions interact when they share an argument or one has none.
bool steps_interact(const PrimitiveStep &a, const PrimitiveStep &b);

SolutionGraph build_solution_graph(std::span<const PrimitiveStep> plan);

/// A macro lifted from plan steps, with how often it occurred.
struct LiftedMacro {
  MacroOperator macro;
  std::size_t occurrences = 0;
};

/// Replaces the constants of consecutive steps by variables numbered in
/// order of first occurrence. Variable types come from the operators.
MacroOperator lift_steps(const Domain &domain, std::span<const PrimitiveStep> steps);

/// SOL-EP static filter: repetition and negated-precondition rules plus the
/// shared-variable chaining variant. Returns true when `m` is kept.
bool solep_filter(const Domain &domain, const MacroOperator &m);

/// Extracts, lifts, merges and filters two-action macros from a plan, in
/// canonical order.
std::vector<LiftedMacro> extract_macros(const Domain &domain,
                                        std::span<const PrimitiveStep> plan);

} // namespace macroplan
