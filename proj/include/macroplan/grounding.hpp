#pragma once

#include "macroplan/components.hpp"
#include "macroplan/pddl.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace macroplan {

using FactId = std::uint32_t;
using ActionId = std::uint32_t;

/// Raised when a configured limit (instantiations, nodes, time, memory) is hit.
class ResourceLimitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Dense ids for ground facts, assigned in first-seen order.
class FactTable {
public:
  FactId intern(const Atom &fact);
  std::optional<FactId> find(const Atom &fact) const;
  const Atom &atom(FactId id) const { return atoms_.at(id); }
  std::size_t size() const { return atoms_.size(); }

private:
  std::vector<Atom> atoms_;
  std::map<Atom, FactId> ids_;
};

struct PrimitiveStep {
  std::string op;
  std::vector<std::string> args;
  friend bool operator==(const PrimitiveStep &, const PrimitiveStep &) = default;
};

std::string to_string(const PrimitiveStep &step);

struct GroundAction {
  ActionId id = 0;
  std::string op;
  std::vector<std::string> args;
  /// Sorted, duplicate-free.
  std::vector<FactId> pre;
  std::vector<FactId> add;
  std::vector<FactId> del;
  /// Set for instances of compiled macro operators of an enhanced domain.
  bool is_macro = false;
  /// Operators contained in a macro action, in order.
  std::vector<std::string> macro_ops;

  std::string name() const;
};

/// Lookup table for the initial state: a balanced search tree holding only
/// the facts that are actually present.
class InitialFactStore {
public:
  InitialFactStore() = default;
  explicit InitialFactStore(std::span<const Atom> facts);
  bool contains(const Atom &fact) const { return facts_.count(fact) > 0; }
  /// Number of stored entries (equals the number of distinct init facts).
  std::size_t size() const { return facts_.size(); }

private:
  std::set<Atom> facts_;
};

bool initial_facts_contains(const InitialFactStore &store, const Atom &fact);

class ZobristTable {
public:
  static constexpr std::uint64_t kDefaultSeed = 0x5eed5eedULL;

  ZobristTable(std::size_t num_facts, std::uint64_t seed = kDefaultSeed);
  std::uint64_t key(FactId f) const { return keys_[f]; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return keys_.size(); }

private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> keys_;
};

std::uint64_t state_hash(std::span<const FactId> state, const ZobristTable &zt);

struct FactIndex {
  std::vector<std::vector<ActionId>> pre_of;
  std::vector<std::vector<ActionId>> add_of;
  std::vector<std::vector<ActionId>> del_of;
  /// Actions without preconditions.
  std::vector<ActionId> no_pre;
};

FactIndex build_fact_index(std::span<const GroundAction> actions,
                           std::size_t num_facts);

struct GroundingOptions {
  std::size_t max_actions = 5'000'000;
};

/// A grounded planning task.
struct GroundTask {
  FactTable facts;
  std::vector<GroundAction> actions;
  /// Sorted initial fluent facts.
  std::vector<FactId> init;
  /// Sorted goal facts (static goals that hold are dropped).
  std::vector<FactId> goal;
  /// Number of type-consistent substitutions tried before static filtering.
  std::size_t substitutions = 0;
};

/// Instantiates every operator over type-consistent object tuples, discards
/// instances whose static preconditions fail in the initial state and drops
/// static preconditions from the rest.
GroundTask ground_actions(const Domain &domain, const Problem &problem,
                          const GroundingOptions &opts = {});

} // namespace macroplan
