#include "macroplan/macro.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

namespace macroplan {

std::string MacroOperator::name() const {
  std::string n = macro_action_name(ops);
  if (variant > 0)
    n += "--" + std::to_string(variant);
  return n;
}

VarMap MacroOperator::varmap(std::size_t i, const Operator &op) const {
  VarMap vm;
  const auto &b = bindings.at(i);
  if (b.size() != op.params.size())
    throw std::invalid_argument("binding arity mismatch for " + op.name);
  for (std::size_t j = 0; j < b.size(); ++j)
    vm[op.params[j].name] = vars.at(b[j]).name;
  return vm;
}

Operator MacroOperator::as_operator() const {
  Operator op;
  op.name = name();
  op.params = vars;
  if (compiled) {
    op.pre.assign(compiled->pre.begin(), compiled->pre.end());
    op.add.assign(compiled->add.begin(), compiled->add.end());
    op.del.assign(compiled->del.begin(), compiled->del.end());
  }
  return op;
}

std::string canonical_key(const MacroOperator &m) {
  std::vector<std::size_t> renumber(m.vars.size(), SIZE_MAX);
  std::size_t next = 0;
  std::string key;
  for (std::size_t i = 0; i < m.ops.size(); ++i) {
    key += m.ops[i] + "(";
    for (std::size_t v : m.bindings[i]) {
      if (renumber[v] == SIZE_MAX)
        renumber[v] = next++;
      key += std::to_string(renumber[v]) + ":" + m.vars[v].type + ",";
    }
    key += ")";
  }
  return key;
}

Atom map_atom(const Atom &atom, const VarMap &vm) {
  Atom out{atom.predicate, {}};
  out.args.reserve(atom.args.size());
  for (const auto &a : atom.args) {
    auto it = vm.find(a);
    out.args.push_back(it == vm.end() ? a : it->second);
  }
  return out;
}

std::set<Atom> map_atoms(const std::vector<Atom> &atoms, const VarMap &vm) {
  std::set<Atom> out;
  for (const auto &a : atoms)
    out.insert(map_atom(a, vm));
  return out;
}

namespace {

struct GroupMember {
  std::string predicate;
  std::vector<std::size_t> key;
  std::vector<std::string> key_types;
};

std::optional<std::vector<std::string>>
key_of(const Atom &a, const std::vector<GroupMember> &group, std::size_t &which) {
  for (std::size_t g = 0; g < group.size(); ++g) {
    const auto &member = group[g];
    if (member.predicate != a.predicate)
      continue;
    std::vector<std::string> key;
    bool fits = true;
    for (auto pos : member.key) {
      if (pos >= a.args.size()) {
        fits = false;
        break;
      }
      key.push_back(a.args[pos]);
    }
    if (!fits)
      continue;
    which = g;
    return key;
  }
  return std::nullopt;
}

enum class Verdict { Holds, Fails, Extend };

// Every operator adding a group atom must consume a group atom with the same
// key that it requires, and may add only one group atom. When the only
// obstacle is a consumed atom outside the group, `grow` proposes it.
Verdict check_group(const Domain &domain, const std::vector<GroupMember> &group,
                    GroupMember &grow) {
  auto disjoint = [&](const std::string &a, const std::string &b) {
    return !a.empty() && !b.empty() && !domain.types.is_subtype(a, b) &&
           !domain.types.is_subtype(b, a);
  };
  auto in_group = [&](const std::string &pred) {
    return std::any_of(group.begin(), group.end(),
                       [&](const auto &g) { return g.predicate == pred; });
  };
  for (const auto &op : domain.operators) {
    std::size_t added = 0;
    for (const auto &x : op.add) {
      std::size_t g = 0;
      auto key = key_of(x, group, g);
      if (!key)
        continue;
      bool typed_out = false;
      for (std::size_t k = 0; k < key->size(); ++k)
        if (auto i = op.param_index((*key)[k]))
          typed_out = typed_out ||
                      disjoint(op.params[*i].type, group[g].key_types[k]);
      if (typed_out)
        continue;
      if (++added > 1)
        return Verdict::Fails;
      bool consumed = false;
      std::optional<GroupMember> candidate;
      for (const auto &y : op.del) {
        if (std::find(op.pre.begin(), op.pre.end(), y) == op.pre.end())
          continue;
        if (std::find(op.add.begin(), op.add.end(), y) != op.add.end())
          continue;
        std::size_t h = 0;
        if (auto ykey = key_of(y, group, h)) {
          if (*ykey == *key) {
            consumed = true;
            break;
          }
          continue;
        }
        if (candidate || in_group(y.predicate))
          continue;
        GroupMember c{y.predicate, {}, group[g].key_types};
        for (const auto &term : *key) {
          auto it = std::find(y.args.begin(), y.args.end(), term);
          if (it == y.args.end())
            break;
          c.key.push_back(static_cast<std::size_t>(it - y.args.begin()));
        }
        if (c.key.size() == key->size())
          candidate = std::move(c);
      }
      if (consumed)
        continue;
      if (!candidate)
        return Verdict::Fails;
      grow = std::move(*candidate);
      return Verdict::Extend;
    }
  }
  return Verdict::Holds;
}

bool at_most_one_per_key(const Domain &domain, std::vector<GroupMember> group) {
  while (group.size() <= domain.predicates.size()) {
    GroupMember grow;
    switch (check_group(domain, group, grow)) {
    case Verdict::Holds:
      return true;
    case Verdict::Fails:
      return false;
    case Verdict::Extend:
      group.push_back(std::move(grow));
    }
  }
  return false;
}

bool is_variable(const std::string &s) { return !s.empty() && s[0] == '?'; }

} // namespace

bool exclusive_atoms(const Domain &domain, const Atom &a, const Atom &b,
                     const std::vector<TypedVar> &vars) {
  if (a == b)
    return false;
  auto type_of = [&](const std::string &v) -> std::string {
    for (const auto &x : vars)
      if (x.name == v)
        return x.type;
    return {};
  };
  GroupMember ga{a.predicate, {}, {}}, gb{b.predicate, {}, {}};
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!is_variable(a.args[i]))
      continue;
    auto it = std::find(b.args.begin(), b.args.end(), a.args[i]);
    if (it == b.args.end())
      continue;
    if (std::find(a.args.begin(), a.args.begin() + i, a.args[i]) !=
        a.args.begin() + i)
      continue;
    ga.key.push_back(i);
    gb.key.push_back(static_cast<std::size_t>(it - b.args.begin()));
    ga.key_types.push_back(type_of(a.args[i]));
    gb.key_types.push_back(type_of(a.args[i]));
  }
  // A keyless group bounds the total count, which initial states rarely meet.
  if (ga.key.empty() && !(a.args.empty() && b.args.empty()))
    return false;
  std::vector<GroupMember> group{ga};
  if (gb.predicate != ga.predicate)
    group.push_back(gb);
  else if (gb.key != ga.key)
    return false;
  return at_most_one_per_key(domain, group);
}

MacroOperator add_operator_to_macro(const Operator &op, MacroOperator m,
                                    const VarMap &vm, const Domain *domain) {
  const TypeHierarchy *types = domain ? &domain->types : nullptr;
  std::vector<std::size_t> binding;
  for (const auto &p : op.params) {
    auto it = vm.find(p.name);
    if (it == vm.end())
      throw std::invalid_argument("variable mapping misses " + p.name +
                                  " of " + op.name);
    auto var = std::find_if(m.vars.begin(), m.vars.end(),
                            [&](const auto &v) { return v.name == it->second; });
    if (var == m.vars.end()) {
      m.vars.push_back({it->second, p.type});
      binding.push_back(m.vars.size() - 1);
      continue;
    }
    if (var->type != p.type) {
      if (types && types->is_subtype(p.type, var->type))
        var->type = p.type;
      else if (!(types && types->is_subtype(var->type, p.type)))
        throw std::invalid_argument("type mismatch binding " + p.name + " - " +
                                    p.type + " to " + var->name + " - " +
                                    var->type);
    }
    binding.push_back(static_cast<std::size_t>(var - m.vars.begin()));
  }
  m.ops.push_back(op.name);
  m.bindings.push_back(std::move(binding));
  if (!m.compiled)
    m.compiled.emplace();
  MacroBody &body = *m.compiled;

  for (const auto &p : op.pre) {
    Atom a = map_atom(p, vm);
    if (!body.add.count(a) && !body.pre.count(a))
      body.pre.insert(std::move(a));
  }
  for (const auto &d : op.del) {
    Atom a = map_atom(d, vm);
    if (body.add.count(a)) {
      // The macro produced this fact itself. The delete is dropped only when
      // the fact is known to be false before the macro.
      body.add.erase(a);
      bool false_before =
          domain && !body.pre.count(a) &&
          std::any_of(body.pre.begin(), body.pre.end(), [&](const Atom &p) {
            return exclusive_atoms(*domain, a, p, m.vars);
          });
      if (!false_before)
        body.del.insert(std::move(a));
    } else {
      body.del.insert(std::move(a));
    }
  }
  for (const auto &ad : op.add) {
    Atom a = map_atom(ad, vm);
    if (body.del.count(a)) {
      body.del.erase(a);
      if (!body.pre.count(a))
        body.add.insert(std::move(a));
    } else {
      body.add.insert(std::move(a));
    }
  }
  return m;
}

MacroOperator compile_macro(const Domain &domain, MacroOperator m) {
  MacroOperator out;
  out.vars = m.vars;
  out.variant = m.variant;
  for (std::size_t i = 0; i < m.ops.size(); ++i) {
    const Operator *op = domain.find_operator(m.ops[i]);
    if (!op)
      throw UndeclaredSymbol("macro uses unknown operator '" + m.ops[i] + "'");
    out = add_operator_to_macro(*op, std::move(out), m.varmap(i, *op),
                                &domain);
  }
  return out;
}

bool prune_negated_precondition(const Operator &op, const VarMap &vm,
                                const MacroOperator &m) {
  if (!m.compiled)
    return false;
  return std::any_of(op.pre.begin(), op.pre.end(), [&](const Atom &p) {
    return m.compiled->del.count(map_atom(p, vm)) > 0;
  });
}

bool prune_chaining(const Operator &op, const VarMap &vm, const Operator &last,
                    const VarMap &last_vm) {
  std::set<Atom> produced = map_atoms(last.add, last_vm);
  return std::none_of(op.pre.begin(), op.pre.end(), [&](const Atom &p) {
    return produced.count(map_atom(p, vm)) > 0;
  });
}

bool prune_size(const MacroOperator &m, const SizeLimits &limits) {
  if (m.length() > limits.max_length)
    return true;
  return m.compiled && m.compiled->pre.size() > limits.max_preconditions;
}

bool prune_repetition(const MacroSearchNode &node) {
  const auto &s = node.snapshots;
  for (std::size_t k2 = 1; k2 < s.size(); ++k2)
    for (std::size_t k1 = 0; k1 < k2; ++k1)
      if (s[k1] == s[k2])
        return true;
  return false;
}

MacroSearchNode extend_node(const MacroSearchNode &node, const Operator &op,
                            const VarMap &vm, const Domain *domain) {
  MacroSearchNode next;
  next.macro = add_operator_to_macro(op, node.macro, vm, domain);
  next.snapshots = node.snapshots;
  next.snapshots.emplace_back(next.macro.compiled->add,
                              next.macro.compiled->del);
  return next;
}

} // namespace macroplan
