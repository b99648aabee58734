#pragma once

#include "macroplan/pddl.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace macroplan {

/// Operator variable -> macro variable.
using VarMap = std::map<std::string, std::string>;

/// Precondition and effect sets of a macro compiled into one operator.
struct MacroBody {
  std::set<Atom> pre;
  std::set<Atom> add;
  std::set<Atom> del;
  friend bool operator==(const MacroBody &, const MacroBody &) = default;
};

/// An ordered operator sequence linked by a variable mapping.
///
/// `bindings[i][j]` is the index into `vars` of parameter `j` of `ops[i]`.
/// CA-ED macros carry `compiled`; SOL-EP macros are kept as sequences.
struct MacroOperator {
  std::vector<std::string> ops;
  std::vector<std::vector<std::size_t>> bindings;
  std::vector<TypedVar> vars;
  std::optional<MacroBody> compiled;
  /// Disambiguates macros with the same operator sequence in emitted names.
  int variant = 0;

  std::size_t length() const { return ops.size(); }
  /// `op1--op2[--variant]`.
  std::string name() const;
  /// Mapping of the i-th operator's parameters onto macro variable names.
  VarMap varmap(std::size_t i, const Operator &op) const;
  /// Compiled body as an operator over `vars`.
  Operator as_operator() const;
};

/// Structural key used for deduplication and canonical ordering:
/// operator names plus bindings after first-occurrence renumbering.
std::string canonical_key(const MacroOperator &m);

/// Applies the composition rules for appending `op` to `m` under `vm`.
/// Variables of `op` missing from `m` are created with the operator's type.
/// Throws std::invalid_argument on a type-incompatible mapping.
/// `domain` supplies the type hierarchy and the exclusion invariants that
/// allow an add-then-delete pair to cancel; without it the delete is kept.
MacroOperator add_operator_to_macro(const Operator &op, MacroOperator m,
                                    const VarMap &vm,
                                    const Domain *domain = nullptr);

/// True when no reachable state holds instances of `a` and `b` that agree on
/// their shared variables, typed by `vars`. Checked inductively over the
/// operators of `domain`; the initial state is assumed to satisfy it.
bool exclusive_atoms(const Domain &domain, const Atom &a, const Atom &b,
                     const std::vector<TypedVar> &vars = {});

/// Composes a complete macro from its operator definitions.
MacroOperator compile_macro(const Domain &domain, MacroOperator m);

Atom map_atom(const Atom &atom, const VarMap &vm);
std::set<Atom> map_atoms(const std::vector<Atom> &atoms, const VarMap &vm);

/// Negated precondition rule: some precondition of `op` is a delete effect of `m`.
bool prune_negated_precondition(const Operator &op, const VarMap &vm,
                                const MacroOperator &m);

/// Chaining rule (CA-ED): `op` must need an add effect of the previous operator.
/// Returns true when the pair is rejected.
bool prune_chaining(const Operator &op, const VarMap &vm, const Operator &last,
                    const VarMap &last_vm);

struct SizeLimits {
  std::size_t max_length = 2;
  std::size_t max_preconditions = 6;
};

bool prune_size(const MacroOperator &m, const SizeLimits &limits);

/// Effect sets after each prefix of a macro, starting with the empty prefix.
using EffectSnapshot = std::pair<std::set<Atom>, std::set<Atom>>;

struct MacroSearchNode {
  MacroOperator macro;
  std::vector<EffectSnapshot> snapshots{EffectSnapshot{}};
};

/// Repetition rule: two prefixes k1 < k2 have identical effects.
bool prune_repetition(const MacroSearchNode &node);

/// Appends an operator to a search node, recording the effect snapshot.
MacroSearchNode extend_node(const MacroSearchNode &node, const Operator &op,
                            const VarMap &vm,
                            const Domain *domain = nullptr);

/// Merges macros generated on a flattened domain that differ only in the
/// atomic type of one parameter position, when together they cover every
/// atomic subtype of a common supertype. Operator names are mapped back to
/// the originals through `flat.provenance`.
std::vector<MacroOperator> restore_hierarchy(std::span<const MacroOperator> macros,
                                             const Domain &flat);

/// Numbers macros sharing an operator sequence so their names are unique.
void assign_variants(std::vector<MacroOperator> &macros);

} // namespace macroplan
