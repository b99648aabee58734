#include "macroplan/caed.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace macroplan {

namespace {

struct LocalGraph {
  std::vector<std::string> vars;
  std::vector<std::string> types;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> facts;
};

LocalGraph local_static_graph(const MacroOperator &m, const AbstractType &at,
                              const PredicatePartition &partition) {
  LocalGraph g;
  if (!m.compiled)
    return g;
  const auto labels = at.labels();
  auto var_type = [&](const std::string &v) -> std::string {
    for (const auto &x : m.vars)
      if (x.name == v)
        return x.type;
    return {};
  };
  for (const auto &p : m.compiled->pre) {
    if (!labels.count(p.predicate))
      continue;
    LowLevelPredicate lp{p.predicate, {}};
    for (const auto &a : p.args)
      lp.types.push_back(var_type(a));
    if (!partition.is_static(lp))
      continue;
    std::vector<std::size_t> args;
    for (const auto &a : p.args) {
      auto it = std::find(g.vars.begin(), g.vars.end(), a);
      if (it == g.vars.end()) {
        g.vars.push_back(a);
        g.types.push_back(var_type(a));
        args.push_back(g.vars.size() - 1);
      } else {
        args.push_back(static_cast<std::size_t>(it - g.vars.begin()));
      }
    }
    g.facts.emplace_back(p.predicate, std::move(args));
  }
  return g;
}

bool embeds(const LocalGraph &g, const AbstractType &at) {
  if (g.vars.size() > at.node_types.size())
    return false;
  std::set<std::pair<std::string, std::vector<std::size_t>>> target(
      at.facts.begin(), at.facts.end());
  std::vector<std::size_t> assign(g.vars.size());
  std::vector<bool> used(at.node_types.size(), false);
  std::function<bool(std::size_t)> search = [&](std::size_t i) -> bool {
    if (i == g.vars.size()) {
      for (const auto &[label, args] : g.facts) {
        std::vector<std::size_t> mapped;
        for (auto a : args)
          mapped.push_back(assign[a]);
        if (!target.count({label, mapped}))
          return false;
      }
      return true;
    }
    for (std::size_t n = 0; n < at.node_types.size(); ++n) {
      if (used[n] || at.node_types[n] != g.types[i])
        continue;
      used[n] = true;
      assign[i] = n;
      if (search(i + 1))
        return true;
      used[n] = false;
    }
    return false;
  };
  return search(0);
}

std::string fresh_name(const std::string &type, std::size_t index) {
  std::string initial = type.empty() ? "v" : type.substr(0, 1);
  return "?" + initial + std::to_string(index);
}

class MacroSearch {
public:
  MacroSearch(const Domain &flat, const AbstractType &at,
              const PredicatePartition &partition, const GenerationLimits &limits,
              GenerationResult &out)
      : flat_(flat), at_(at), partition_(partition), limits_(limits), out_(out) {}

  void run() { expand(MacroSearchNode{}); }

private:
  void expand(const MacroSearchNode &node) {
    if (node.macro.length() >= limits_.size.max_length)
      return;
    for (const auto &op : flat_.operators) {
      std::vector<VarMap> maps;
      VarMap vm;
      std::set<std::string> taken;
      enumerate_maps(op, node.macro, 0, vm, taken, maps);
      for (const auto &m : maps) {
        if (out_.truncated)
          return;
        try_extend(node, op, m);
      }
    }
  }

  // New operator variables bind to unused macro variables of the same type
  // or to fresh ones.
  void enumerate_maps(const Operator &op, const MacroOperator &m, std::size_t i,
                      VarMap &vm, std::set<std::string> &taken,
                      std::vector<VarMap> &out) const {
    if (i == op.params.size()) {
      out.push_back(vm);
      return;
    }
    const auto &p = op.params[i];
    for (const auto &v : m.vars) {
      if (v.type != p.type || taken.count(v.name))
        continue;
      taken.insert(v.name);
      vm[p.name] = v.name;
      enumerate_maps(op, m, i + 1, vm, taken, out);
      taken.erase(v.name);
      vm.erase(p.name);
    }
    // Fresh variables are numbered after the macro's and earlier fresh ones.
    std::size_t created = 0;
    for (const auto &[k, v] : vm)
      if (std::none_of(m.vars.begin(), m.vars.end(),
                       [&](const auto &x) { return x.name == v; }))
        ++created;
    vm[p.name] = fresh_name(p.type, m.vars.size() + created);
    enumerate_maps(op, m, i + 1, vm, taken, out);
    vm.erase(p.name);
  }

  void try_extend(const MacroSearchNode &node, const Operator &op,
                  const VarMap &vm) {
    if (++out_.nodes > limits_.max_nodes) {
      out_.truncated = true;
      return;
    }
    const MacroOperator &m = node.macro;
    if (m.length() > 0) {
      if (prune_negated_precondition(op, vm, m))
        return;
      const Operator *last = flat_.find_operator(m.ops.back());
      if (prune_chaining(op, vm, *last, m.varmap(m.length() - 1, *last)))
        return;
    }
    MacroSearchNode next = extend_node(node, op, vm, &flat_);
    if (prune_repetition(next) || prune_size(next.macro, limits_.size))
      return;
    // Adding operators only adds local static preconditions, so a failing
    // prefix cannot be repaired by extending it.
    if (!locality_check(next.macro, at_, partition_))
      return;
    if (next.macro.length() >= 2) {
      auto key = canonical_key(next.macro);
      if (seen_.insert(key).second)
        out_.macros.push_back(next.macro);
    }
    expand(next);
  }

  const Domain &flat_;
  const AbstractType &at_;
  const PredicatePartition &partition_;
  const GenerationLimits &limits_;
  GenerationResult &out_;
  std::set<std::string> seen_;
};

} // namespace

bool locality_check(const MacroOperator &m, const AbstractType &at,
                    const PredicatePartition &partition) {
  return embeds(local_static_graph(m, at, partition), at);
}

GenerationResult generate_macros(const Domain &flat, const AbstractType &at,
                                 const PredicatePartition &partition,
                                 const GenerationLimits &limits) {
  GenerationResult out;
  MacroSearch(flat, at, partition, limits, out).run();
  return out;
}

GenerationResult generate_macros(const Domain &flat,
                                 const std::vector<AbstractType> &types,
                                 const PredicatePartition &partition,
                                 const GenerationLimits &limits) {
  GenerationResult all;
  std::map<std::string, MacroOperator> unique;
  for (const auto &at : types) {
    auto r = generate_macros(flat, at, partition, limits);
    all.truncated = all.truncated || r.truncated;
    all.nodes += r.nodes;
    for (auto &m : r.macros)
      unique.emplace(canonical_key(m), std::move(m));
  }
  for (auto &[k, m] : unique)
    all.macros.push_back(std::move(m));
  return all;
}

} // namespace macroplan
