#pragma once

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace macroplan {

struct MacroOperator;

/// Base error for PDDL input that is malformed or outside the STRIPS subset.
class PddlError : public std::runtime_error {
public:
  explicit PddlError(const std::string &what, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

/// A requirement or construct outside `:strips :typing`.
class UnsupportedFeature : public PddlError {
public:
  using PddlError::PddlError;
};

/// Reference to a type, predicate, object or operator that is not declared.
class UndeclaredSymbol : public PddlError {
public:
  using PddlError::PddlError;
};

struct TypedVar {
  std::string name;
  std::string type;
  friend auto operator<=>(const TypedVar &, const TypedVar &) = default;
};

/// Predicate application. Arguments are variables (`?x`) in lifted
/// atoms and object names in ground atoms.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;
  friend auto operator<=>(const Atom &, const Atom &) = default;
};

inline bool is_variable(std::string_view s) { return !s.empty() && s[0] == '?'; }

std::string to_string(const Atom &atom);

struct Predicate {
  std::string name;
  std::vector<TypedVar> params;
  friend bool operator==(const Predicate &, const Predicate &) = default;
};

/// STRIPS operator o = (V, P, A, D).
struct Operator {
  std::string name;
  std::vector<TypedVar> params;
  std::vector<Atom> pre;
  std::vector<Atom> add;
  std::vector<Atom> del;

  std::optional<std::size_t> param_index(std::string_view var) const;
};

/// Single-inheritance type tree rooted at `object`.
class TypeHierarchy {
public:
  static constexpr const char *kRoot = "object";

  TypeHierarchy();

  /// Declares `type` below `parent` (declaring the parent first if needed).
  void add(const std::string &type, const std::string &parent = kRoot);

  bool contains(std::string_view type) const;
  /// Empty for the root.
  std::string parent(std::string_view type) const;
  std::vector<std::string> children(std::string_view type) const;
  bool is_atomic(std::string_view type) const;
  /// Atomic descendants of `type` in declaration order (`type` itself when atomic).
  std::vector<std::string> atomic_subtypes(std::string_view type) const;
  bool is_subtype(std::string_view sub, std::string_view super) const;
  /// Lowest common ancestor of a non-empty list of types.
  std::string common_supertype(std::span<const std::string> types) const;
  /// All types in declaration order; the root comes first.
  const std::vector<std::string> &types() const { return order_; }
  /// True when every type other than the root is atomic.
  bool is_flat() const;

  friend bool operator==(const TypeHierarchy &, const TypeHierarchy &) = default;

private:
  std::vector<std::string> order_;
  std::map<std::string, std::string, std::less<>> parent_;
};

struct Domain {
  std::string name;
  TypeHierarchy types;
  std::vector<TypedVar> constants;
  std::vector<Predicate> predicates;
  std::vector<Operator> operators;
  /// Set by flatten_types: every parameter type is atomic.
  bool flattened = false;
  /// Specialized operator name -> original operator name (flattened domains).
  std::map<std::string, std::string> provenance;

  const Operator *find_operator(std::string_view name) const;
  /// First predicate declared with `name`.
  const Predicate *find_predicate(std::string_view name) const;
  /// Original (hierarchical) name of a possibly specialized operator.
  std::string original_operator_name(const std::string &name) const;
};

struct Problem {
  std::string name;
  std::string domain_name;
  /// Objects of the problem, including the domain's constants.
  std::vector<TypedVar> objects;
  std::vector<Atom> init;
  std::vector<Atom> goal;

  std::optional<std::string> type_of(std::string_view object) const;
};

Domain parse_domain(std::string_view text);
Problem parse_problem(std::string_view text, const Domain &domain);

Domain load_domain(const std::string &path);
Problem load_problem(const std::string &path, const Domain &domain);
std::string read_file(const std::string &path);

/// Specializes every predicate and operator over the atomic subtypes of
/// their parameter types.
Domain flatten_types(const Domain &domain);

/// Serializes `domain`, appending one action per compiled macro.
std::string write_domain(const Domain &domain,
                         std::span<const MacroOperator> macros = {});
std::string write_problem(const Problem &problem);

/// Structural equality modulo variable names and atom order.
bool equivalent(const Operator &a, const Operator &b);
bool equivalent(const Domain &a, const Domain &b);

/// Name used for a macro action: operator names joined by `--`.
std::string macro_action_name(std::span<const std::string> ops);
/// Operator names contained in a macro action name; empty if `name` is not
/// a macro name over operators of `domain`.
std::vector<std::string> split_macro_name(const Domain &domain,
                                          std::string_view name);

} // namespace macroplan
