#include "macroplan/macro.hpp"

#include <algorithm>
#include <map>

namespace macroplan {

namespace {

// Compiled body with variables renamed to their positions.
std::string positional_body(const MacroOperator &m) {
  VarMap rename;
  for (std::size_t i = 0; i < m.vars.size(); ++i)
    rename[m.vars[i].name] = "#" + std::to_string(i);
  std::string s;
  if (m.compiled) {
    for (const auto *set : {&m.compiled->pre, &m.compiled->add, &m.compiled->del}) {
      std::set<Atom> renamed;
      for (const auto &a : *set)
        renamed.insert(map_atom(a, rename));
      for (const auto &a : renamed)
        s += to_string(a);
      s += "|";
    }
  }
  return s;
}

std::string group_key(const MacroOperator &m, std::size_t masked) {
  std::string key;
  for (std::size_t i = 0; i < m.ops.size(); ++i) {
    key += m.ops[i] + "(";
    for (auto b : m.bindings[i])
      key += std::to_string(b) + ",";
    key += ")";
  }
  key += "[";
  for (std::size_t i = 0; i < m.vars.size(); ++i)
    key += (i == masked ? std::string("*") : m.vars[i].type) + ",";
  key += "]" + positional_body(m);
  return key;
}

} // namespace

std::vector<MacroOperator> restore_hierarchy(std::span<const MacroOperator> macros,
                                             const Domain &flat) {
  std::vector<MacroOperator> work(macros.begin(), macros.end());
  for (auto &m : work)
    for (auto &op : m.ops)
      op = flat.original_operator_name(op);

  const TypeHierarchy &types = flat.types;
  bool changed = true;
  while (changed) {
    changed = false;
    std::size_t max_vars = 0;
    for (const auto &m : work)
      max_vars = std::max(max_vars, m.vars.size());
    for (std::size_t pos = 0; pos < max_vars && !changed; ++pos) {
      std::map<std::string, std::vector<std::size_t>> groups;
      std::vector<std::string> order;
      for (std::size_t i = 0; i < work.size(); ++i) {
        if (pos >= work[i].vars.size())
          continue;
        auto key = group_key(work[i], pos);
        if (!groups.count(key))
          order.push_back(key);
        groups[key].push_back(i);
      }
      for (const auto &key : order) {
        const auto &members = groups[key];
        if (members.size() < 2)
          continue;
        std::vector<std::string> ts;
        for (auto i : members)
          ts.push_back(work[i].vars[pos].type);
        std::string super = types.common_supertype(ts);
        std::set<std::string> covered;
        for (const auto &t : ts)
          for (const auto &a : types.atomic_subtypes(t))
            covered.insert(a);
        auto needed = types.atomic_subtypes(super);
        if (covered != std::set<std::string>(needed.begin(), needed.end()))
          continue;
        // Merge into the first member; drop the rest.
        work[members.front()].vars[pos].type = super;
        std::vector<MacroOperator> next;
        for (std::size_t i = 0; i < work.size(); ++i)
          if (i == members.front() ||
              std::find(members.begin(), members.end(), i) == members.end())
            next.push_back(std::move(work[i]));
        work = std::move(next);
        changed = true;
        break;
      }
    }
  }
  return work;
}

void assign_variants(std::vector<MacroOperator> &macros) {
  std::map<std::vector<std::string>, int> seen;
  for (auto &m : macros)
    m.variant = seen[m.ops]++;
}

} // namespace macroplan
