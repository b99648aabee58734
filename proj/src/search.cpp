#include "macroplan/search.hpp"

#include "macroplan/open_list.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace macroplan {

bool State::contains(FactId f) const {
  return std::binary_search(facts.begin(), facts.end(), f);
}

bool State::contains_all(std::span<const FactId> fs) const {
  // Both sides are sorted.
  return std::includes(facts.begin(), facts.end(), fs.begin(), fs.end());
}

State make_state(std::vector<FactId> facts, const ZobristTable &zt) {
  std::sort(facts.begin(), facts.end());
  facts.erase(std::unique(facts.begin(), facts.end()), facts.end());
  State s;
  s.hash = state_hash(facts, zt);
  s.facts = std::move(facts);
  return s;
}

bool applicable(const State &s, const GroundAction &a) {
  return s.contains_all(a.pre);
}

State apply_action(const State &s, const GroundAction &a, const ZobristTable &zt) {
  if (!applicable(s, a))
    throw InapplicableAction("action " + a.name() + " is not applicable", 0);
  State out;
  out.hash = s.hash;
  out.facts.reserve(s.facts.size() + a.add.size());
  std::vector<FactId> kept;
  kept.reserve(s.facts.size());
  std::set_difference(s.facts.begin(), s.facts.end(), a.del.begin(), a.del.end(),
                      std::back_inserter(kept));
  for (FactId f : a.del)
    if (s.contains(f)) out.hash ^= zt.key(f);
  std::set_union(kept.begin(), kept.end(), a.add.begin(), a.add.end(),
                 std::back_inserter(out.facts));
  for (FactId f : a.add)
    if (!std::binary_search(kept.begin(), kept.end(), f)) out.hash ^= zt.key(f);
  return out;
}

State apply_macro(const State &s, std::span<const ActionId> chain,
                  const GroundTask &task, const ZobristTable &zt) {
  State cur = s;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const GroundAction &a = task.actions.at(chain[i]);
    if (!applicable(cur, a))
      throw InapplicableAction("macro chain broken at step " + std::to_string(i) +
                                   ": " + a.name(),
                               i);
    cur = apply_action(cur, a, zt);
  }
  return cur;
}

bool RelaxedPlan::contains(ActionId a) const {
  return std::binary_search(actions.begin(), actions.end(), a);
}

RelaxedPlanner::RelaxedPlanner(const GroundTask &task, const FactIndex &index)
    : task_(task), index_(index), fact_layer_(task.facts.size(), -1),
      action_layer_(task.actions.size(), -1), counter_(task.actions.size(), 0),
      true_at_(task.facts.size(), -1), goal_at_(task.facts.size(), -1),
      selected_(task.actions.size(), 0) {}

RelaxedPlan RelaxedPlanner::compute(const State &s, std::span<const FactId> goal) {
  RelaxedPlan rp;
  std::vector<FactId> reached;
  std::vector<ActionId> scheduled;
  std::vector<FactId> frontier;
  for (FactId f : s.facts) {
    fact_layer_[f] = 0;
    reached.push_back(f);
    frontier.push_back(f);
  }
  auto goals_reached = [&] {
    for (FactId g : goal)
      if (fact_layer_[g] < 0) return false;
    return true;
  };

  int layer = 0;
  bool ok = goals_reached();
  std::vector<ActionId> layer_actions;
  while (!ok) {
    layer_actions.clear();
    if (layer == 0) {
      for (ActionId a : index_.no_pre) {
        action_layer_[a] = 0;
        layer_actions.push_back(a);
        scheduled.push_back(a);
      }
    }
    for (FactId f : frontier) {
      for (ActionId a : index_.pre_of[f]) {
        if (action_layer_[a] >= 0) continue;
        if (counter_[a] == 0) {
          counter_[a] = task_.actions[a].pre.size();
          scheduled.push_back(a);
        }
        if (--counter_[a] == 0) {
          action_layer_[a] = layer;
          layer_actions.push_back(a);
        }
      }
    }
    frontier.clear();
    for (ActionId a : layer_actions)
      for (FactId f : task_.actions[a].add)
        if (fact_layer_[f] < 0) {
          fact_layer_[f] = layer + 1;
          reached.push_back(f);
          frontier.push_back(f);
        }
    ++layer;
    if (frontier.empty()) break;
    ok = goals_reached();
  }

  if (ok) {
    rp.reachable = true;
    std::vector<std::vector<FactId>> goals(layer + 1);
    std::vector<FactId> marked;
    auto enqueue = [&](FactId f) {
      int l = fact_layer_[f];
      if (l <= 0 || goal_at_[f] == l) return;
      goal_at_[f] = l;
      marked.push_back(f);
      goals[l].push_back(f);
    };
    for (FactId g : goal) enqueue(g);
    std::vector<ActionId> chosen;
    std::vector<FactId> made_true;
    for (int l = layer; l >= 1; --l) {
      for (std::size_t gi = 0; gi < goals[l].size(); ++gi) {
        FactId g = goals[l][gi];
        if (true_at_[g] == l) continue;
        // Achievers of a fact first reached at l sit exactly at layer l-1.
        ActionId best = 0;
        bool found = false;
        for (ActionId a : index_.add_of[g])
          if (action_layer_[a] == l - 1 && (!found || a < best)) {
            best = a;
            found = true;
          }
        if (!selected_[best]) {
          selected_[best] = 1;
          chosen.push_back(best);
        }
        if (l == 1) rp.first_layer.push_back(best);
        for (FactId p : task_.actions[best].pre) enqueue(p);
        for (FactId f : task_.actions[best].add) {
          if (true_at_[f] != l) made_true.push_back(f);
          true_at_[f] = l;
        }
      }
    }
    rp.first_layer_goals = goals.size() > 1 ? goals[1] : std::vector<FactId>{};
    std::sort(rp.first_layer_goals.begin(), rp.first_layer_goals.end());
    std::sort(chosen.begin(), chosen.end());
    std::sort(rp.first_layer.begin(), rp.first_layer.end());
    rp.first_layer.erase(std::unique(rp.first_layer.begin(), rp.first_layer.end()),
                         rp.first_layer.end());
    rp.h = static_cast<int>(chosen.size());
    for (ActionId a : chosen) selected_[a] = 0;
    rp.actions = std::move(chosen);
    for (FactId f : marked) goal_at_[f] = -1;
    for (FactId f : made_true) true_at_[f] = -1;
  }

  for (FactId f : reached) fact_layer_[f] = -1;
  for (ActionId a : scheduled) {
    action_layer_[a] = -1;
    counter_[a] = 0;
  }
  return rp;
}

RelaxedPlan relaxed_graphplan(const State &s, std::span<const FactId> goal,
                              const GroundTask &task, const FactIndex &index) {
  RelaxedPlanner planner(task, index);
  return planner.compute(s, goal);
}

std::vector<ActionId> applicable_actions(const State &s, const GroundTask &task,
                                         const FactIndex &index) {
  std::unordered_map<ActionId, std::size_t> seen;
  std::vector<ActionId> out(index.no_pre.begin(), index.no_pre.end());
  for (FactId f : s.facts)
    for (ActionId a : index.pre_of[f])
      if (++seen[a] == task.actions[a].pre.size()) out.push_back(a);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ActionId> helpful_actions(const State &s, const RelaxedPlan &rp,
                                      const GroundTask &task, const FactIndex &index) {
  std::vector<ActionId> out;
  for (FactId g : rp.first_layer_goals)
    for (ActionId a : index.add_of[g])
      if (applicable(s, task.actions[a])) out.push_back(a);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

void match_macro(std::size_t macro_index, const MacroOperator &m, std::size_t step,
                 const std::map<std::string, std::vector<ActionId>> &by_op,
                 const GroundTask &task, std::vector<const std::string *> &binding,
                 std::vector<ActionId> &chain, std::vector<MacroInstance> &out) {
  if (step == m.length()) {
    out.push_back({macro_index, chain});
    return;
  }
  auto it = by_op.find(m.ops[step]);
  if (it == by_op.end()) return;
  const auto &vars = m.bindings[step];
  for (ActionId a : it->second) {
    const GroundAction &ga = task.actions[a];
    if (ga.args.size() != vars.size()) continue;
    std::vector<std::size_t> newly;
    bool ok = true;
    for (std::size_t j = 0; j < vars.size() && ok; ++j) {
      const std::string *&slot = binding[vars[j]];
      if (slot) {
        ok = *slot == ga.args[j];
        continue;
      }
      // Distinct macro variables stand for distinct objects.
      for (const std::string *other : binding)
        if (other && *other == ga.args[j]) ok = false;
      if (ok) {
        slot = &ga.args[j];
        newly.push_back(vars[j]);
      }
    }
    if (ok) {
      chain.push_back(a);
      match_macro(macro_index, m, step + 1, by_op, task, binding, chain, out);
      chain.pop_back();
    }
    for (std::size_t v : newly) binding[v] = nullptr;
  }
}

bool chain_applicable(const State &s, std::span<const ActionId> chain,
                      const GroundTask &task) {
  State cur = s;
  for (ActionId a : chain) {
    const GroundAction &ga = task.actions[a];
    if (!applicable(cur, ga)) return false;
    std::vector<FactId> kept, next;
    std::set_difference(cur.facts.begin(), cur.facts.end(), ga.del.begin(),
                        ga.del.end(), std::back_inserter(kept));
    std::set_union(kept.begin(), kept.end(), ga.add.begin(), ga.add.end(),
                   std::back_inserter(next));
    cur.facts = std::move(next);
  }
  return true;
}

} // namespace

std::vector<MacroInstance>
helpful_macro_instantiations(const State &s, const RelaxedPlan &rp,
                             std::span<const MacroOperator> macros,
                             const GroundTask &task) {
  std::vector<MacroInstance> out;
  if (!rp.reachable || macros.empty()) return out;
  std::map<std::string, std::vector<ActionId>> by_op;
  for (ActionId a : rp.actions) by_op[task.actions[a].op].push_back(a);
  for (std::size_t i = 0; i < macros.size(); ++i) {
    const MacroOperator &m = macros[i];
    std::vector<const std::string *> binding(m.vars.size(), nullptr);
    std::vector<ActionId> chain;
    std::vector<MacroInstance> found;
    match_macro(i, m, 0, by_op, task, binding, chain, found);
    for (auto &inst : found)
      if (chain_applicable(s, inst.actions, task)) out.push_back(std::move(inst));
  }
  std::vector<MacroInstance> unique;
  for (auto &inst : out)
    if (std::find(unique.begin(), unique.end(), inst) == unique.end())
      unique.push_back(std::move(inst));
  return unique;
}

std::vector<Successor> expand(const State &s, const RelaxedPlan &rp,
                              ExpansionMode mode,
                              std::span<const MacroOperator> macros,
                              const GroundTask &task, const FactIndex &index,
                              const ZobristTable &zt) {
  std::vector<Successor> out;
  for (auto &inst : helpful_macro_instantiations(s, rp, macros, task)) {
    Successor succ;
    succ.state = apply_macro(s, inst.actions, task, zt);
    succ.actions = std::move(inst.actions);
    succ.macro = static_cast<int>(inst.macro);
    out.push_back(std::move(succ));
  }
  std::vector<ActionId> prims = mode == ExpansionMode::Helpful
                                    ? helpful_actions(s, rp, task, index)
                                    : applicable_actions(s, task, index);
  for (ActionId a : prims) {
    Successor succ;
    succ.state = apply_action(s, task.actions[a], zt);
    succ.actions = {a};
    out.push_back(std::move(succ));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct LimitHit {
  std::string what;
};

} // namespace

struct Planner::Budget {
  using Clock = std::chrono::steady_clock;
  Clock::time_point start = Clock::now();
  const SearchOptions &opts;
  SearchStats &stats;
  std::size_t bytes = 0;

  Budget(const SearchOptions &o, SearchStats &s) : opts(o), stats(s) {}

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start).count();
  }
  void on_expand() {
    ++stats.expanded;
    if (stats.expanded > opts.max_expanded)
      throw LimitHit{"node limit of " + std::to_string(opts.max_expanded) +
                     " expansions reached"};
    if ((stats.expanded & 255) == 0 && elapsed() > opts.time_limit_seconds)
      throw LimitHit{"time limit reached"};
  }
  void charge(std::size_t n) {
    bytes += n;
    if (bytes > opts.memory_limit_mb * 1024ull * 1024ull)
      throw LimitHit{"memory limit reached"};
  }
};

namespace {

/// Hash-keyed duplicate detection; optionally keeps full states to count
/// collisions and separate them.
class SeenSet {
public:
  explicit SeenSet(bool verify) : verify_(verify) {}

  /// Returns false when the state was already present.
  bool insert(const State &s, std::size_t &collisions) {
    if (!verify_) return keys_.insert(s.hash).second;
    auto &bucket = full_[s.hash];
    for (const auto &f : bucket)
      if (f == s.facts) return false;
    if (!bucket.empty()) ++collisions;
    bucket.push_back(s.facts);
    return true;
  }

private:
  bool verify_;
  std::unordered_set<std::uint64_t> keys_;
  std::unordered_map<std::uint64_t, std::vector<std::vector<FactId>>> full_;
};

std::size_t state_bytes(const State &s) {
  return sizeof(State) + s.facts.size() * sizeof(FactId) + 48;
}

} // namespace

Planner::Planner(const GroundTask &task, std::vector<MacroOperator> macros,
                 SearchOptions options)
    : task_(task), index_(build_fact_index(task.actions, task.facts.size())),
      zobrist_(task.facts.size(), options.zobrist_seed), macros_(std::move(macros)),
      options_(options), relaxed_(task_, index_) {}

State Planner::initial_state() const { return make_state(task_.init, zobrist_); }

bool Planner::is_goal(const State &s) const { return s.contains_all(task_.goal); }

RelaxedPlan Planner::relaxed_plan(const State &s) {
  return relaxed_.compute(s, task_.goal);
}

namespace {

PlanStep make_step(const Successor &succ, const std::vector<MacroOperator> &macros) {
  PlanStep step;
  step.actions = succ.actions;
  if (succ.macro >= 0) step.macro = macros[succ.macro].name();
  return step;
}

} // namespace

SearchResult Planner::enhanced_hill_climbing() {
  SearchResult result;
  Budget budget(options_, result.stats);
  try {
    State cur = initial_state();
    if (is_goal(cur)) {
      result.stats.initial_h = 0;
      result.status = SearchStatus::Solved;
      result.stats.solved_by_hill_climbing = true;
      return result;
    }
    RelaxedPlan rp = relaxed_plan(cur);
    ++result.stats.evaluated;
    result.stats.initial_h = rp.h;
    if (!rp.reachable) {
      result.message = "initial state is a dead end";
      return result;
    }

    struct Node {
      State state;
      RelaxedPlan rp;
      int parent;
      PlanStep step;
    };
    while (rp.h > 0) {
      std::vector<Node> arena;
      arena.push_back({cur, rp, -1, {}});
      std::deque<int> queue{0};
      SeenSet seen(options_.verify_hashes);
      seen.insert(cur, result.stats.hash_collisions);
      budget.bytes = 0;
      int better = -1;
      while (!queue.empty() && better < 0) {
        int ni = queue.front();
        queue.pop_front();
        budget.on_expand();
        auto succs = expand(arena[ni].state, arena[ni].rp, ExpansionMode::Helpful,
                            macros_, task_, index_, zobrist_);
        for (auto &succ : succs) {
          ++result.stats.generated;
          if (!seen.insert(succ.state, result.stats.hash_collisions)) continue;
          RelaxedPlan srp;
          if (is_goal(succ.state)) {
            srp.reachable = true;
            srp.h = 0;
          } else {
            srp = relaxed_plan(succ.state);
            ++result.stats.evaluated;
            if (!srp.reachable) continue;
          }
          budget.charge(state_bytes(succ.state) + sizeof(Node) +
                        srp.actions.size() * 8);
          arena.push_back({std::move(succ.state), std::move(srp), ni,
                           make_step(succ, macros_)});
          int idx = static_cast<int>(arena.size()) - 1;
          if (arena[idx].rp.h < rp.h) {
            better = idx;
            break;
          }
          queue.push_back(idx);
        }
      }
      if (better < 0) {
        result.message = "hill climbing exhausted a plateau";
        return result;
      }
      std::vector<PlanStep> segment;
      for (int i = better; arena[i].parent >= 0; i = arena[i].parent)
        segment.push_back(arena[i].step);
      result.plan.insert(result.plan.end(), segment.rbegin(), segment.rend());
      cur = arena[better].state;
      rp = arena[better].rp;
    }
    result.status = SearchStatus::Solved;
    result.stats.solved_by_hill_climbing = true;
  } catch (const LimitHit &hit) {
    result.status = SearchStatus::ResourceLimit;
    result.message = hit.what;
    result.plan.clear();
  }
  result.stats.seconds = budget.elapsed();
  return result;
}

SearchResult Planner::best_first_search() {
  SearchResult result;
  Budget budget(options_, result.stats);
  struct Node {
    State state;
    std::int64_t parent;
    std::vector<ActionId> actions;
    int macro;
    std::vector<ActionId> rp_actions;
  };
  try {
    std::vector<Node> nodes;
    State init = initial_state();
    if (is_goal(init)) {
      result.status = SearchStatus::Solved;
      result.stats.initial_h = 0;
      return result;
    }
    RelaxedPlan rp0 = relaxed_plan(init);
    ++result.stats.evaluated;
    result.stats.initial_h = rp0.h;
    if (!rp0.reachable) {
      result.message = "initial state is a dead end";
      result.stats.seconds = budget.elapsed();
      return result;
    }
    SeenSet seen(options_.verify_hashes);
    seen.insert(init, result.stats.hash_collisions);
    nodes.push_back({init, -1, {}, -1, rp0.actions});
    BucketOpenList<std::size_t> open;
    open_push(open, rp0.h, std::size_t{0});

    std::int64_t goal_node = -1;
    while (auto popped = open_pop(open)) {
      std::size_t ni = *popped;
      budget.on_expand();
      // Macro matching only needs the selected actions of RP(s).
      RelaxedPlan rp;
      rp.reachable = true;
      rp.actions = nodes[ni].rp_actions;
      auto succs = expand(nodes[ni].state, rp, ExpansionMode::Complete, macros_,
                          task_, index_, zobrist_);
      for (auto &succ : succs) {
        ++result.stats.generated;
        if (!seen.insert(succ.state, result.stats.hash_collisions)) continue;
        budget.charge(state_bytes(succ.state) + sizeof(Node) + 16);
        if (is_goal(succ.state)) {
          nodes.push_back({std::move(succ.state), static_cast<std::int64_t>(ni),
                           std::move(succ.actions), succ.macro, {}});
          goal_node = static_cast<std::int64_t>(nodes.size()) - 1;
          break;
        }
        RelaxedPlan srp = relaxed_plan(succ.state);
        ++result.stats.evaluated;
        if (!srp.reachable) continue;
        std::vector<ActionId> keep;
        if (!macros_.empty()) keep = std::move(srp.actions);
        budget.charge(keep.size() * sizeof(ActionId));
        nodes.push_back({std::move(succ.state), static_cast<std::int64_t>(ni),
                         std::move(succ.actions), succ.macro, std::move(keep)});
        open_push(open, srp.h, nodes.size() - 1);
      }
      if (goal_node >= 0) break;
      // Expanded states no longer need their relaxed plan.
      std::vector<ActionId>().swap(nodes[ni].rp_actions);
    }
    if (goal_node < 0) {
      result.message = "search space exhausted";
    } else {
      std::vector<PlanStep> rev;
      for (std::int64_t i = goal_node; nodes[i].parent >= 0; i = nodes[i].parent) {
        PlanStep step;
        step.actions = nodes[i].actions;
        if (nodes[i].macro >= 0) step.macro = macros_[nodes[i].macro].name();
        rev.push_back(std::move(step));
      }
      result.plan.assign(rev.rbegin(), rev.rend());
      result.status = SearchStatus::Solved;
    }
  } catch (const LimitHit &hit) {
    result.status = SearchStatus::ResourceLimit;
    result.message = hit.what;
  }
  result.stats.seconds = budget.elapsed();
  return result;
}

SearchResult Planner::solve() {
  SearchResult ehc;
  if (options_.hill_climbing) {
    ehc = enhanced_hill_climbing();
    if (ehc.status != SearchStatus::Unsolvable || !options_.best_first) return ehc;
  }
  if (!options_.best_first) return ehc;
  SearchOptions rest = options_;
  if (options_.hill_climbing) {
    rest.time_limit_seconds = std::max(0.0, options_.time_limit_seconds - ehc.stats.seconds);
    rest.max_expanded = options_.max_expanded > ehc.stats.expanded
                            ? options_.max_expanded - ehc.stats.expanded
                            : 0;
  }
  SearchOptions saved = options_;
  options_ = rest;
  SearchResult bfs = best_first_search();
  options_ = saved;
  bfs.stats.expanded += ehc.stats.expanded;
  bfs.stats.evaluated += ehc.stats.evaluated;
  bfs.stats.generated += ehc.stats.generated;
  bfs.stats.hash_collisions += ehc.stats.hash_collisions;
  bfs.stats.seconds += ehc.stats.seconds;
  if (options_.hill_climbing) bfs.stats.initial_h = ehc.stats.initial_h;
  return bfs;
}

// ---------------------------------------------------------------------------

namespace {

class PlanExpander {
public:
  PlanExpander(const GroundTask &task, const ZobristTable &zt) : task_(task), zt_(zt) {
    for (const auto &a : task.actions)
      if (!a.is_macro) by_op_[a.op].push_back(a.id);
  }

  /// Primitive chain equivalent to `a` from `s`.
  std::vector<ActionId> resolve(const State &s, const GroundAction &a) {
    if (!a.is_macro) return {a.id};
    State target = apply_action(s, a, zt_);
    std::vector<ActionId> chain;
    if (!search(s, a, 0, target, chain))
      throw std::runtime_error("cannot expand macro action " + a.name());
    return chain;
  }

private:
  bool search(const State &s, const GroundAction &macro, std::size_t step,
              const State &target, std::vector<ActionId> &chain) {
    if (step == macro.macro_ops.size()) return s == target;
    auto it = by_op_.find(macro.macro_ops[step]);
    if (it == by_op_.end()) return false;
    for (ActionId id : it->second) {
      const GroundAction &cand = task_.actions[id];
      bool subset = std::all_of(cand.args.begin(), cand.args.end(), [&](auto &x) {
        return std::find(macro.args.begin(), macro.args.end(), x) != macro.args.end();
      });
      if (!subset || !applicable(s, cand)) continue;
      chain.push_back(id);
      if (search(apply_action(s, cand, zt_), macro, step + 1, target, chain))
        return true;
      chain.pop_back();
    }
    return false;
  }

  const GroundTask &task_;
  const ZobristTable &zt_;
  std::map<std::string, std::vector<ActionId>> by_op_;
};

} // namespace

std::vector<PlanLine> primitive_plan(const GroundTask &task,
                                     std::span<const PlanStep> plan,
                                     const ZobristTable &zt) {
  PlanExpander expander(task, zt);
  std::vector<PlanLine> out;
  State cur = make_state(task.init, zt);
  for (const auto &step : plan) {
    for (ActionId id : step.actions) {
      const GroundAction &a = task.actions.at(id);
      for (ActionId p : expander.resolve(cur, a)) {
        const GroundAction &prim = task.actions[p];
        std::string source = !step.macro.empty() ? step.macro : a.is_macro ? a.op : "";
        out.push_back({{prim.op, prim.args}, source});
        cur = apply_action(cur, prim, zt);
      }
    }
  }
  return out;
}

std::string format_plan(std::span<const PlanLine> lines) {
  std::ostringstream os;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string text = to_string(lines[i].step);
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    os << i << ": " << text;
    if (!lines[i].macro.empty()) os << " ; macro " << lines[i].macro;
    os << '\n';
  }
  return os.str();
}

} // namespace macroplan
