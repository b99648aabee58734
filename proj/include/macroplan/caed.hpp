#pragma once

#include "macroplan/components.hpp"
#include "macroplan/macro.hpp"

#include <vector>

namespace macroplan {

struct GenerationLimits {
  SizeLimits size;
  /// Search nodes expanded before giving up with a partial list.
  std::size_t max_nodes = 200'000;
};

struct GenerationResult {
  std::vector<MacroOperator> macros;
  bool truncated = false;
  std::size_t nodes = 0;
};

/// Locality rule: the graph formed by the static preconditions of `m` whose
/// predicates label edges of `at` must embed into `at` (type- and
/// label-preserving, injective on variables).
bool locality_check(const MacroOperator &m, const AbstractType &at,
                    const PredicatePartition &partition);

/// Depth-first enumeration of compiled macros for one abstract type over a
/// flattened domain.
GenerationResult generate_macros(const Domain &flat, const AbstractType &at,
                                 const PredicatePartition &partition,
                                 const GenerationLimits &limits = {});

/// Union over several abstract types, deduplicated and canonically ordered.
GenerationResult generate_macros(const Domain &flat,
                                 const std::vector<AbstractType> &types,
                                 const PredicatePartition &partition,
                                 const GenerationLimits &limits = {});

} // namespace macroplan
