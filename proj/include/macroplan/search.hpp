#pragma once

#include "macroplan/grounding.hpp"
#include "macroplan/macro.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace macroplan {

constexpr int kInfiniteH = std::numeric_limits<int>::max();

/// Set of true fluent facts (sorted) with its Zobrist key.
struct State {
  std::vector<FactId> facts;
  std::uint64_t hash = 0;

  bool contains(FactId f) const;
  bool contains_all(std::span<const FactId> fs) const;
  friend bool operator==(const State &a, const State &b) { return a.facts == b.facts; }
};

State make_state(std::vector<FactId> facts, const ZobristTable &zt);

class InapplicableAction : public std::runtime_error {
public:
  InapplicableAction(const std::string &what, std::size_t index)
      : std::runtime_error(what), index_(index) {}
  /// Position of the failing action within a macro chain (0 for single actions).
  std::size_t index() const { return index_; }

private:
  std::size_t index_;
};

bool applicable(const State &s, const GroundAction &a);

/// (s \ del) u add, with the hash updated by XOR of the changed facts.
State apply_action(const State &s, const GroundAction &a, const ZobristTable &zt);

/// Applies a1..ak in order; each must be applicable in the previous result.
State apply_macro(const State &s, std::span<const ActionId> chain,
                  const GroundTask &task, const ZobristTable &zt);

struct RelaxedPlan {
  bool reachable = false;
  /// |RP(s)| when reachable, kInfiniteH otherwise.
  int h = kInfiniteH;
  /// Selected achievers, sorted by id.
  std::vector<ActionId> actions;
  /// Selected achievers scheduled at the first layer.
  std::vector<ActionId> first_layer;
  /// Subgoals that first appear at layer 1.
  std::vector<FactId> first_layer_goals;

  bool contains(ActionId a) const;
};

/// Delete-relaxed planning graph with FF-style plan extraction. Reuses its
/// scratch buffers across calls.
class RelaxedPlanner {
public:
  RelaxedPlanner(const GroundTask &task, const FactIndex &index);
  RelaxedPlan compute(const State &s, std::span<const FactId> goal);

private:
  const GroundTask &task_;
  const FactIndex &index_;
  std::vector<int> fact_layer_;
  std::vector<int> action_layer_;
  std::vector<std::size_t> counter_;
  std::vector<int> true_at_;
  std::vector<int> goal_at_;
  std::vector<char> selected_;
};

RelaxedPlan relaxed_graphplan(const State &s, std::span<const FactId> goal,
                              const GroundTask &task, const FactIndex &index);

std::vector<ActionId> applicable_actions(const State &s, const GroundTask &task,
                                         const FactIndex &index);

/// Applicable actions adding a subgoal of the first relaxed layer.
std::vector<ActionId> helpful_actions(const State &s, const RelaxedPlan &rp,
                                      const GroundTask &task, const FactIndex &index);

/// A macro instantiation: one ground action per macro step.
struct MacroInstance {
  std::size_t macro = 0;
  std::vector<ActionId> actions;
  friend bool operator==(const MacroInstance &, const MacroInstance &) = default;
};

/// Instantiations whose actions all belong to RP(s), bound consistently
/// with the macro's variable mapping, and applicable as a chain from s.
std::vector<MacroInstance>
helpful_macro_instantiations(const State &s, const RelaxedPlan &rp,
                             std::span<const MacroOperator> macros,
                             const GroundTask &task);

enum class ExpansionMode {
  /// Helpful actions only (hill climbing).
  Helpful,
  /// Every applicable action (best-first search).
  Complete,
};

struct Successor {
  /// Primitive (or enhanced-domain) actions applied in order.
  std::vector<ActionId> actions;
  /// Index of the SOL-EP macro, -1 for a single action.
  int macro = -1;
  State state;
};

/// Macro successors first, then single-action successors.
std::vector<Successor> expand(const State &s, const RelaxedPlan &rp,
                              ExpansionMode mode,
                              std::span<const MacroOperator> macros,
                              const GroundTask &task, const FactIndex &index,
                              const ZobristTable &zt);

struct SearchOptions {
  bool hill_climbing = true;
  bool best_first = true;
  /// Node (expansion) budget across both phases.
  std::size_t max_expanded = 20'000'000;
  double time_limit_seconds = 1800.0;
  std::size_t memory_limit_mb = 1024;
  /// Compare full states on equal hash keys and count collisions.
  bool verify_hashes = false;
  std::uint64_t zobrist_seed = ZobristTable::kDefaultSeed;
};

struct PlanStep {
  std::vector<ActionId> actions;
  /// Name of the SOL-EP macro this step instantiates, if any.
  std::string macro;
};

struct SearchStats {
  std::size_t expanded = 0;
  std::size_t evaluated = 0;
  std::size_t generated = 0;
  std::size_t hash_collisions = 0;
  double seconds = 0.0;
  bool solved_by_hill_climbing = false;
  int initial_h = kInfiniteH;
};

enum class SearchStatus { Solved, Unsolvable, ResourceLimit };

struct SearchResult {
  SearchStatus status = SearchStatus::Unsolvable;
  std::vector<PlanStep> plan;
  SearchStats stats;
  std::string message;
};

/// FF-style planner: enforced hill climbing on helpful successors, falling
/// back to greedy best-first search over all successors.
class Planner {
public:
  Planner(const GroundTask &task, std::vector<MacroOperator> macros = {},
          SearchOptions options = {});

  SearchResult solve();
  SearchResult enhanced_hill_climbing();
  SearchResult best_first_search();

  State initial_state() const;
  bool is_goal(const State &s) const;
  RelaxedPlan relaxed_plan(const State &s);
  int heuristic(const State &s) { return relaxed_plan(s).h; }

  const GroundTask &task() const { return task_; }
  const FactIndex &index() const { return index_; }
  const ZobristTable &zobrist() const { return zobrist_; }
  const std::vector<MacroOperator> &macros() const { return macros_; }

private:
  struct Budget;

  const GroundTask &task_;
  FactIndex index_;
  ZobristTable zobrist_;
  std::vector<MacroOperator> macros_;
  SearchOptions options_;
  RelaxedPlanner relaxed_;
};

/// One primitive plan line with the macro it came from (empty if none).
struct PlanLine {
  PrimitiveStep step;
  std::string macro;
};

/// Replays a plan from the initial state, expanding SOL-EP steps and
/// compiled macro actions into primitive steps. Compiled macro actions are
/// resolved to the operator instances of the same task whose chain reaches
/// the same successor state. Throws std::runtime_error if none is found.
std::vector<PlanLine> primitive_plan(const GroundTask &task,
                                     std::span<const PlanStep> plan,
                                     const ZobristTable &zt);

/// `i: (NAME ARG ...)` lines, macro steps marked with a trailing comment.
std::string format_plan(std::span<const PlanLine> lines);

} // namespace macroplan
