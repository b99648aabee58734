#include "macroplan/grounding.hpp"

#include <algorithm>
#include <random>

namespace macroplan {

FactId FactTable::intern(const Atom &fact) {
  auto [it, inserted] = ids_.emplace(fact, static_cast<FactId>(atoms_.size()));
  if (inserted)
    atoms_.push_back(fact);
  return it->second;
}

std::optional<FactId> FactTable::find(const Atom &fact) const {
  auto it = ids_.find(fact);
  if (it == ids_.end())
    return std::nullopt;
  return it->second;
}

std::string to_string(const PrimitiveStep &step) {
  std::string s = "(" + step.op;
  for (const auto &a : step.args)
    s += " " + a;
  return s + ")";
}

std::string GroundAction::name() const { return to_string(PrimitiveStep{op, args}); }

InitialFactStore::InitialFactStore(std::span<const Atom> facts)
    : facts_(facts.begin(), facts.end()) {}

bool initial_facts_contains(const InitialFactStore &store, const Atom &fact) {
  return store.contains(fact);
}

ZobristTable::ZobristTable(std::size_t num_facts, std::uint64_t seed)
    : seed_(seed), keys_(num_facts) {
  std::mt19937_64 rng(seed);
  for (auto &k : keys_)
    k = rng();
}

std::uint64_t state_hash(std::span<const FactId> state, const ZobristTable &zt) {
  std::uint64_t h = 0;
  for (FactId f : state)
    h ^= zt.key(f);
  return h;
}

FactIndex build_fact_index(std::span<const GroundAction> actions,
                           std::size_t num_facts) {
  FactIndex idx;
  idx.pre_of.resize(num_facts);
  idx.add_of.resize(num_facts);
  idx.del_of.resize(num_facts);
  for (const auto &a : actions) {
    for (FactId f : a.pre)
      idx.pre_of.at(f).push_back(a.id);
    for (FactId f : a.add)
      idx.add_of.at(f).push_back(a.id);
    for (FactId f : a.del)
      idx.del_of.at(f).push_back(a.id);
    if (a.pre.empty())
      idx.no_pre.push_back(a.id);
  }
  return idx;
}

namespace {

void sort_unique(std::vector<FactId> &v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

class Grounder {
public:
  Grounder(const Domain &dom, const Problem &prob, const GroundingOptions &opts,
           GroundTask &task)
      : dom_(dom), prob_(prob), opts_(opts), task_(task),
        partition_(partition_predicates(dom)), store_(prob.init) {
    for (const auto &o : prob.objects)
      type_of_[o.name] = o.type;
  }

  void run() {
    for (const auto &f : prob_.init)
      if (!is_static(f))
        task_.init.push_back(task_.facts.intern(f));
    for (const auto &g : prob_.goal) {
      if (is_static(g) && store_.contains(g))
        continue;
      task_.goal.push_back(task_.facts.intern(g));
    }
    sort_unique(task_.init);
    sort_unique(task_.goal);
    for (const auto &op : dom_.operators)
      ground_operator(op);
  }

private:
  bool is_static(const Atom &fact) const {
    LowLevelPredicate lp{fact.predicate, {}};
    for (const auto &a : fact.args) {
      auto it = type_of_.find(a);
      if (it == type_of_.end())
        return false;
      lp.types.push_back(it->second);
    }
    return partition_.is_static(lp);
  }

  Atom bind(const Atom &a, const Operator &op,
            const std::vector<std::string> &binding) const {
    Atom g{a.predicate, {}};
    for (const auto &arg : a.args) {
      if (auto i = op.param_index(arg))
        g.args.push_back(binding[*i]);
      else
        g.args.push_back(arg);
    }
    return g;
  }

  void ground_operator(const Operator &op) {
    const std::size_t n = op.params.size();
    std::vector<std::vector<std::string>> candidates(n);
    for (std::size_t i = 0; i < n; ++i)
      for (const auto &o : prob_.objects)
        if (dom_.types.is_subtype(o.type, op.params[i].type))
          candidates[i].push_back(o.name);
    // Each precondition is checked as soon as its last variable is bound.
    std::vector<std::vector<std::size_t>> ready(n + 1);
    for (std::size_t k = 0; k < op.pre.size(); ++k) {
      std::size_t depth = 0;
      for (const auto &arg : op.pre[k].args)
        if (auto i = op.param_index(arg))
          depth = std::max(depth, *i + 1);
      ready[depth].push_back(k);
    }
    auto parts = split_macro_name(dom_, op.name);
    std::vector<std::string> binding(n);
    descend(op, candidates, ready, parts, binding, 0);
  }

  bool statics_hold(const Operator &op, const std::vector<std::size_t> &pres,
                    const std::vector<std::string> &binding) const {
    for (auto k : pres) {
      Atom g = bind(op.pre[k], op, binding);
      if (is_static(g) && !store_.contains(g))
        return false;
    }
    return true;
  }

  void descend(const Operator &op,
               const std::vector<std::vector<std::string>> &candidates,
               const std::vector<std::vector<std::size_t>> &ready,
               const std::vector<std::string> &macro_ops,
               std::vector<std::string> &binding, std::size_t depth) {
    if (!statics_hold(op, ready[depth], binding))
      return;
    if (depth == op.params.size()) {
      emit(op, macro_ops, binding);
      return;
    }
    // Distinct macro variables denote distinct objects.
    for (const auto &obj : candidates[depth]) {
      if (!macro_ops.empty() &&
          std::find(binding.begin(), binding.begin() + depth, obj) !=
              binding.begin() + depth)
        continue;
      binding[depth] = obj;
      descend(op, candidates, ready, macro_ops, binding, depth + 1);
    }
  }

  void emit(const Operator &op, const std::vector<std::string> &macro_ops,
            const std::vector<std::string> &binding) {
    ++task_.substitutions;
    if (task_.actions.size() >= opts_.max_actions)
      throw ResourceLimitError("grounding exceeded " +
                               std::to_string(opts_.max_actions) + " actions");
    GroundAction a;
    a.id = static_cast<ActionId>(task_.actions.size());
    a.op = op.name;
    a.args = binding;
    for (const auto &p : op.pre) {
      Atom g = bind(p, op, binding);
      if (!is_static(g))
        a.pre.push_back(task_.facts.intern(g));
    }
    for (const auto &p : op.add)
      a.add.push_back(task_.facts.intern(bind(p, op, binding)));
    for (const auto &p : op.del)
      a.del.push_back(task_.facts.intern(bind(p, op, binding)));
    sort_unique(a.pre);
    sort_unique(a.add);
    sort_unique(a.del);
    std::erase_if(a.del, [&](FactId f) {
      return std::binary_search(a.add.begin(), a.add.end(), f);
    });
    a.is_macro = !macro_ops.empty();
    a.macro_ops = macro_ops;
    task_.actions.push_back(std::move(a));
  }

  const Domain &dom_;
  const Problem &prob_;
  const GroundingOptions &opts_;
  GroundTask &task_;
  PredicatePartition partition_;
  InitialFactStore store_;
  std::map<std::string, std::string> type_of_;
};

} // namespace

GroundTask ground_actions(const Domain &domain, const Problem &problem,
                          const GroundingOptions &opts) {
  GroundTask task;
  Grounder(domain, problem, opts, task).run();
  return task;
}

} // namespace macroplan
