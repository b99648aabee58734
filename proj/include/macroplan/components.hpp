#pragma once

#include "macroplan/pddl.hpp"

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace macroplan {

/// A predicate specialized to atomic argument types.
struct LowLevelPredicate {
  std::string name;
  std::vector<std::string> types;
  friend auto operator<=>(const LowLevelPredicate &,
                          const LowLevelPredicate &) = default;
};

struct PredicatePartition {
  /// All low-level predicates in declaration order.
  std::vector<LowLevelPredicate> all;
  std::set<LowLevelPredicate> fluent;
  std::set<LowLevelPredicate> statics;
  /// Static, arity >= 2, no two parameters of the same type.
  std::set<LowLevelPredicate> usable_static;

  bool is_static(const LowLevelPredicate &p) const { return statics.count(p) > 0; }
  bool is_usable(const LowLevelPredicate &p) const {
    return usable_static.count(p) > 0;
  }
};

/// Splits the low-level predicates of `domain` (flattened on the fly when
/// needed) into fluent and static ones.
PredicatePartition partition_predicates(const Domain &domain);

/// Low-level signature of a ground fact.
std::optional<LowLevelPredicate> signature_of(const Atom &fact,
                                              const Problem &problem);

/// Constants as nodes, usable static facts as labeled edges.
struct StaticGraph {
  std::vector<TypedVar> nodes;
  /// Every usable static fact of the initial state; each links its
  /// constants pairwise.
  std::vector<Atom> facts;

  std::optional<std::string> type_of(std::string_view node) const;
  /// Pairwise edges (label, u, v) induced by the facts.
  std::vector<std::tuple<std::string, std::string, std::string>> edges() const;
};

StaticGraph build_static_graph(const Problem &problem,
                               const PredicatePartition &partition);

struct AbstractComponent {
  std::set<std::string> nodes;
  std::vector<Atom> facts;
  std::string seed_type;
};

struct SizeBounds {
  std::size_t min_types = 2;
  std::size_t max_types = 4;
};

struct Decomposition {
  std::string seed_type;
  std::vector<AbstractComponent> components;
};

struct ClusteringOptions {
  SizeBounds bounds;
  /// Try this seed type first (e.g. "camera").
  std::optional<std::string> seed_type;
  /// Shuffle seed types with this RNG seed instead of declaration order.
  std::optional<unsigned> shuffle_seed;
};

/// Records which predicates were tried and which extended the components,
/// for diagnostics and tests.
struct ClusteringTrace {
  struct Step {
    std::string seed_type;
    LowLevelPredicate predicate;
    bool used;
  };
  std::vector<Step> steps;
};

/// Greedy clustering of the static graph into abstract components. Runs
/// separately on subgraphs whose type sets are disjoint and unions the
/// accepted decompositions.
std::vector<Decomposition> component_abstraction(const StaticGraph &graph,
                                                 const Domain &domain,
                                                 const ClusteringOptions &opts = {},
                                                 ClusteringTrace *trace = nullptr);

/// All components of a set of decompositions.
std::vector<AbstractComponent> all_components(const std::vector<Decomposition> &ds);

/// True if any fact of `facts` would join two distinct existing components.
bool pred_connects_components(const std::vector<Atom> &facts,
                              const std::vector<AbstractComponent> &components);

/// Adds the facts to the components. Facts touching no component form new
/// components. Throws std::logic_error if a fact would merge two components.
void extend_components(const std::vector<Atom> &facts,
                       std::vector<AbstractComponent> &components,
                       const std::string &seed_type = {});

/// Distinct low-level types in a component.
std::size_t component_size(const AbstractComponent &ac, const StaticGraph &graph);

/// Type-labeled graph of a component. Node i has type `node_types[i]`;
/// `facts` reference node indices.
struct AbstractType {
  std::vector<std::string> node_types;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> facts;
  /// Canonical form: equal iff identical structure.
  std::string key;

  friend bool operator==(const AbstractType &a, const AbstractType &b) {
    return a.key == b.key;
  }
  std::set<std::string> labels() const;
  std::string to_string() const;
};

AbstractType abstract_type_of(const AbstractComponent &ac, const StaticGraph &graph);

/// Brute-force identical-structure test on two components.
bool identical_structure(const AbstractComponent &a, const StaticGraph &graph_a,
                         const AbstractComponent &b, const StaticGraph &graph_b);

} // namespace macroplan
