#include "macroplan/solep.hpp"

#include <algorithm>
#include <map>

namespace macroplan {

bool steps_interact(const PrimitiveStep &a, const PrimitiveStep &b) {
  if (a.args.empty() || b.args.empty())
    return true;
  return std::any_of(a.args.begin(), a.args.end(), [&](const auto &x) {
    return std::find(b.args.begin(), b.args.end(), x) != b.args.end();
  });
}

SolutionGraph build_solution_graph(std::span<const PrimitiveStep> plan) {
  SolutionGraph g;
  g.steps.assign(plan.begin(), plan.end());
  for (std::size_t i = 0; i + 1 < plan.size(); ++i)
    if (steps_interact(plan[i], plan[i + 1]))
      g.edges.emplace_back(i, i + 1);
  return g;
}

MacroOperator lift_steps(const Domain &domain,
                         std::span<const PrimitiveStep> steps) {
  MacroOperator m;
  std::map<std::string, std::size_t> var_of;
  for (const auto &s : steps) {
    const Operator *op = domain.find_operator(s.op);
    if (!op)
      throw UndeclaredSymbol("plan uses unknown operator '" + s.op + "'");
    if (op->params.size() != s.args.size())
      throw PddlError("arity mismatch in plan step " + to_string(s));
    std::vector<std::size_t> binding;
    for (std::size_t j = 0; j < s.args.size(); ++j) {
      const auto &type = op->params[j].type;
      auto it = var_of.find(s.args[j]);
      if (it == var_of.end()) {
        it = var_of.emplace(s.args[j], m.vars.size()).first;
        m.vars.push_back({"?x" + std::to_string(m.vars.size()), type});
      } else if (domain.types.is_subtype(type, m.vars[it->second].type)) {
        m.vars[it->second].type = type;
      }
      binding.push_back(it->second);
    }
    m.ops.push_back(s.op);
    m.bindings.push_back(std::move(binding));
  }
  return m;
}

bool solep_filter(const Domain &domain, const MacroOperator &m) {
  MacroSearchNode node;
  node.macro.vars = m.vars;
  for (std::size_t i = 0; i < m.length(); ++i) {
    const Operator *op = domain.find_operator(m.ops[i]);
    VarMap vm = m.varmap(i, *op);
    if (i > 0) {
      if (prune_negated_precondition(*op, vm, node.macro))
        return false;
      const auto &prev = m.bindings[i - 1];
      const auto &cur = m.bindings[i];
      bool shares = std::any_of(cur.begin(), cur.end(), [&](auto v) {
        return std::find(prev.begin(), prev.end(), v) != prev.end();
      });
      if (!shares && !prev.empty() && !cur.empty())
        return false;
    }
    node = extend_node(node, *op, vm, &domain);
    if (prune_repetition(node))
      return false;
  }
  return true;
}

std::vector<LiftedMacro> extract_macros(const Domain &domain,
                                        std::span<const PrimitiveStep> plan) {
  const SolutionGraph g = build_solution_graph(plan);
  std::map<std::string, LiftedMacro> merged;
  for (const auto &[i, j] : g.edges) {
    PrimitiveStep pair[2] = {g.steps[i], g.steps[j]};
    MacroOperator m = lift_steps(domain, pair);
    auto key = canonical_key(m);
    auto it = merged.find(key);
    if (it == merged.end())
      it = merged.emplace(key, LiftedMacro{std::move(m), 0}).first;
    ++it->second.occurrences;
  }
  std::vector<LiftedMacro> out;
  for (auto &[key, lm] : merged)
    if (solep_filter(domain, lm.macro))
      out.push_back(std::move(lm));
  std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
    if (a.macro.ops != b.macro.ops)
      return a.macro.ops < b.macro.ops;
    return canonical_key(a.macro) < canonical_key(b.macro);
  });
  return out;
}

} // namespace macroplan
