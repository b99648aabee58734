#include "macroplan/components.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace macroplan {

// ---------------------------------------------------------------- partition

PredicatePartition partition_predicates(const Domain &domain) {
  const Domain flat = domain.flattened ? domain : flatten_types(domain);
  PredicatePartition part;
  for (const auto &p : flat.predicates) {
    LowLevelPredicate lp{p.name, {}};
    for (const auto &v : p.params)
      lp.types.push_back(v.type);
    part.all.push_back(std::move(lp));
  }
  auto arg_type = [&](const Operator &op, const std::string &arg) {
    if (auto i = op.param_index(arg))
      return op.params[*i].type;
    for (const auto &c : flat.constants)
      if (c.name == arg)
        return c.type;
    return std::string{TypeHierarchy::kRoot};
  };
  for (const auto &op : flat.operators)
    for (const auto *effects : {&op.add, &op.del})
      for (const auto &a : *effects) {
        LowLevelPredicate lp{a.predicate, {}};
        for (const auto &arg : a.args)
          lp.types.push_back(arg_type(op, arg));
        part.fluent.insert(std::move(lp));
      }
  for (const auto &lp : part.all) {
    if (part.fluent.count(lp))
      continue;
    part.statics.insert(lp);
    std::set<std::string> distinct(lp.types.begin(), lp.types.end());
    if (lp.types.size() >= 2 && distinct.size() == lp.types.size())
      part.usable_static.insert(lp);
  }
  return part;
}

std::optional<LowLevelPredicate> signature_of(const Atom &fact,
                                              const Problem &problem) {
  LowLevelPredicate lp{fact.predicate, {}};
  for (const auto &arg : fact.args) {
    auto t = problem.type_of(arg);
    if (!t)
      return std::nullopt;
    lp.types.push_back(*t);
  }
  return lp;
}

// ---------------------------------------------------------------- graph

std::optional<std::string> StaticGraph::type_of(std::string_view node) const {
  for (const auto &n : nodes)
    if (n.name == node)
      return n.type;
  return std::nullopt;
}

std::vector<std::tuple<std::string, std::string, std::string>>
StaticGraph::edges() const {
  std::vector<std::tuple<std::string, std::string, std::string>> out;
  for (const auto &f : facts)
    for (std::size_t i = 0; i < f.args.size(); ++i)
      for (std::size_t j = i + 1; j < f.args.size(); ++j)
        out.emplace_back(f.predicate, f.args[i], f.args[j]);
  return out;
}

StaticGraph build_static_graph(const Problem &problem,
                               const PredicatePartition &partition) {
  StaticGraph g;
  std::set<std::string> seen;
  for (const auto &f : problem.init) {
    auto sig = signature_of(f, problem);
    if (!sig || !partition.is_usable(*sig))
      continue;
    g.facts.push_back(f);
    for (std::size_t i = 0; i < f.args.size(); ++i)
      if (seen.insert(f.args[i]).second)
        g.nodes.push_back({f.args[i], sig->types[i]});
  }
  return g;
}

// ---------------------------------------------------------------- clustering

namespace {

class UnionFind {
public:
  std::size_t find(std::size_t x) {
    while (parent_[x] != x)
      x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }
  std::size_t add() {
    parent_.push_back(parent_.size());
    return parent_.size() - 1;
  }

private:
  std::vector<std::size_t> parent_;
};

std::map<std::string, std::size_t>
component_of(const std::vector<AbstractComponent> &components) {
  std::map<std::string, std::size_t> owner;
  for (std::size_t i = 0; i < components.size(); ++i)
    for (const auto &n : components[i].nodes)
      owner[n] = i;
  return owner;
}

// Groups the facts into connected clusters over components and unassigned
// constants. Returns, per cluster, the fact indices and the set of existing
// components it touches.
struct Cluster {
  std::vector<std::size_t> facts;
  std::set<std::size_t> components;
};

std::vector<Cluster> cluster_facts(const std::vector<Atom> &facts,
                                   const std::vector<AbstractComponent> &comps) {
  auto owner = component_of(comps);
  UnionFind uf;
  for (std::size_t i = 0; i < comps.size(); ++i)
    uf.add();
  std::map<std::string, std::size_t> free_node;
  auto node_of = [&](const std::string &c) {
    auto it = owner.find(c);
    if (it != owner.end())
      return it->second;
    auto jt = free_node.find(c);
    if (jt != free_node.end())
      return jt->second;
    return free_node[c] = uf.add();
  };
  std::vector<std::size_t> anchor(facts.size());
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const auto &f = facts[i];
    if (f.args.empty())
      continue;
    std::size_t first = node_of(f.args.front());
    for (std::size_t j = 1; j < f.args.size(); ++j)
      uf.unite(node_of(f.args[j]), first);
    anchor[i] = first;
  }
  std::map<std::size_t, Cluster> clusters;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (facts[i].args.empty())
      continue;
    std::size_t root = uf.find(anchor[i]);
    if (!clusters.count(root))
      order.push_back(root);
    clusters[root].facts.push_back(i);
  }
  for (std::size_t c = 0; c < comps.size(); ++c) {
    auto it = clusters.find(uf.find(c));
    if (it != clusters.end())
      it->second.components.insert(c);
  }
  std::vector<Cluster> out;
  for (auto r : order)
    out.push_back(std::move(clusters[r]));
  return out;
}

std::vector<Atom> facts_of(const StaticGraph &g, const LowLevelPredicate &p) {
  std::vector<Atom> out;
  for (const auto &f : g.facts) {
    if (f.predicate != p.name || f.args.size() != p.types.size())
      continue;
    bool match = true;
    for (std::size_t i = 0; i < f.args.size() && match; ++i)
      match = g.type_of(f.args[i]) == p.types[i];
    if (match)
      out.push_back(f);
  }
  return out;
}

std::vector<LowLevelPredicate> graph_predicates(const StaticGraph &g) {
  std::vector<LowLevelPredicate> out;
  for (const auto &f : g.facts) {
    LowLevelPredicate lp{f.predicate, {}};
    for (const auto &a : f.args)
      lp.types.push_back(*g.type_of(a));
    if (std::find(out.begin(), out.end(), lp) == out.end())
      out.push_back(std::move(lp));
  }
  return out;
}

bool evaluate_decomposition(const std::vector<AbstractComponent> &comps,
                            const StaticGraph &g, const SizeBounds &bounds) {
  if (comps.empty())
    return false;
  return std::all_of(comps.begin(), comps.end(), [&](const auto &ac) {
    auto n = component_size(ac, g);
    return n >= bounds.min_types && n <= bounds.max_types;
  });
}

std::optional<Decomposition>
cluster_subgraph(const StaticGraph &g, const Domain &domain,
                 const ClusteringOptions &opts, ClusteringTrace *trace) {
  // Types(g) in declaration order, predicates in first-appearance order.
  std::vector<std::string> types;
  for (const auto &t : domain.types.types())
    for (const auto &n : g.nodes)
      if (n.type == t) {
        types.push_back(t);
        break;
      }
  for (const auto &n : g.nodes)
    if (std::find(types.begin(), types.end(), n.type) == types.end())
      types.push_back(n.type);
  if (opts.shuffle_seed) {
    std::mt19937 rng(*opts.shuffle_seed);
    std::shuffle(types.begin(), types.end(), rng);
  }
  if (opts.seed_type) {
    auto it = std::find(types.begin(), types.end(), *opts.seed_type);
    if (it != types.end())
      std::rotate(types.begin(), it, it + 1);
  }
  auto preds = graph_predicates(g);
  auto decl = [&](const LowLevelPredicate &p) {
    for (std::size_t i = 0; i < domain.predicates.size(); ++i)
      if (domain.predicates[i].name == p.name)
        return i;
    return domain.predicates.size();
  };
  std::stable_sort(preds.begin(), preds.end(),
                   [&](const auto &a, const auto &b) { return decl(a) < decl(b); });

  for (const auto &seed : types) {
    std::vector<AbstractComponent> comps;
    for (const auto &n : g.nodes)
      if (n.type == seed)
        comps.push_back({{n.name}, {}, seed});
    std::vector<std::string> open{seed};
    std::set<std::string> closed;
    std::set<LowLevelPredicate> tried;
    while (!open.empty()) {
      std::string t1 = open.front();
      open.erase(open.begin());
      closed.insert(t1);
      for (const auto &p : preds) {
        if (std::find(p.types.begin(), p.types.end(), t1) == p.types.end() ||
            tried.count(p))
          continue;
        tried.insert(p);
        auto facts = facts_of(g, p);
        bool connects = pred_connects_components(facts, comps);
        if (trace)
          trace->steps.push_back({seed, p, !connects});
        if (connects)
          continue;
        extend_components(facts, comps, seed);
        for (const auto &t2 : p.types)
          if (!closed.count(t2) &&
              std::find(open.begin(), open.end(), t2) == open.end())
            open.push_back(t2);
      }
    }
    if (evaluate_decomposition(comps, g, opts.bounds))
      return Decomposition{seed, std::move(comps)};
  }
  return std::nullopt;
}

} // namespace

bool pred_connects_components(const std::vector<Atom> &facts,
                              const std::vector<AbstractComponent> &comps) {
  for (const auto &c : cluster_facts(facts, comps))
    if (c.components.size() > 1)
      return true;
  return false;
}

void extend_components(const std::vector<Atom> &facts,
                       std::vector<AbstractComponent> &comps,
                       const std::string &seed_type) {
  for (const auto &cluster : cluster_facts(facts, comps)) {
    if (cluster.components.size() > 1)
      throw std::logic_error("extend_components would merge two components");
    AbstractComponent *target = nullptr;
    if (cluster.components.empty()) {
      comps.push_back({{}, {}, seed_type});
      target = &comps.back();
    } else {
      target = &comps[*cluster.components.begin()];
    }
    for (auto i : cluster.facts) {
      const Atom &f = facts[i];
      target->nodes.insert(f.args.begin(), f.args.end());
      if (std::find(target->facts.begin(), target->facts.end(), f) ==
          target->facts.end())
        target->facts.push_back(f);
    }
  }
}

std::size_t component_size(const AbstractComponent &ac, const StaticGraph &g) {
  std::set<std::string> types;
  for (const auto &n : ac.nodes)
    if (auto t = g.type_of(n))
      types.insert(*t);
  return types.size();
}

std::vector<Decomposition> component_abstraction(const StaticGraph &g,
                                                 const Domain &domain,
                                                 const ClusteringOptions &opts,
                                                 ClusteringTrace *trace) {
  // Connected subgraphs, then merged while their type sets overlap.
  UnionFind uf;
  std::map<std::string, std::size_t> idx;
  for (const auto &n : g.nodes)
    idx[n.name] = uf.add();
  for (const auto &f : g.facts)
    for (std::size_t j = 1; j < f.args.size(); ++j)
      uf.unite(idx[f.args[j]], idx[f.args[0]]);
  std::map<std::string, std::size_t> type_group;
  for (const auto &n : g.nodes) {
    auto it = type_group.find(n.type);
    if (it != type_group.end())
      uf.unite(idx[n.name], it->second);
    else
      type_group[n.type] = idx[n.name];
  }
  std::vector<std::size_t> roots;
  for (const auto &n : g.nodes) {
    auto r = uf.find(idx[n.name]);
    if (std::find(roots.begin(), roots.end(), r) == roots.end())
      roots.push_back(r);
  }
  std::vector<Decomposition> out;
  for (auto r : roots) {
    StaticGraph sub;
    for (const auto &n : g.nodes)
      if (uf.find(idx[n.name]) == r)
        sub.nodes.push_back(n);
    for (const auto &f : g.facts)
      if (!f.args.empty() && uf.find(idx[f.args[0]]) == r)
        sub.facts.push_back(f);
    if (auto d = cluster_subgraph(sub, domain, opts, trace))
      out.push_back(std::move(*d));
  }
  return out;
}

std::vector<AbstractComponent>
all_components(const std::vector<Decomposition> &ds) {
  std::vector<AbstractComponent> out;
  for (const auto &d : ds)
    out.insert(out.end(), d.components.begin(), d.components.end());
  return out;
}

// ---------------------------------------------------------------- abstract types

namespace {

std::vector<std::string> sorted_nodes(const AbstractComponent &ac,
                                      const StaticGraph &g) {
  std::vector<std::string> nodes(ac.nodes.begin(), ac.nodes.end());
  std::stable_sort(nodes.begin(), nodes.end(), [&](const auto &a, const auto &b) {
    return g.type_of(a).value_or("") < g.type_of(b).value_or("");
  });
  return nodes;
}

std::string fact_string(const std::string &label,
                        const std::vector<std::size_t> &args) {
  std::string s = label + "(";
  for (auto a : args)
    s += std::to_string(a) + ",";
  return s + ")";
}

} // namespace

std::set<std::string> AbstractType::labels() const {
  std::set<std::string> out;
  for (const auto &f : facts)
    out.insert(f.first);
  return out;
}

std::string AbstractType::to_string() const {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < node_types.size(); ++i)
    out << (i ? " " : "") << i << ":" << node_types[i];
  out << "]";
  for (const auto &f : facts) {
    out << " (" << f.first;
    for (auto a : f.second)
      out << " " << a;
    out << ")";
  }
  return out.str();
}

AbstractType abstract_type_of(const AbstractComponent &ac, const StaticGraph &g) {
  const auto nodes = sorted_nodes(ac, g);
  std::vector<std::string> types;
  for (const auto &n : nodes)
    types.push_back(g.type_of(n).value_or(""));

  // Try every type-preserving relabeling (permutations within equal-type
  // runs) and keep the lexicographically smallest fact list.
  std::vector<std::size_t> perm(nodes.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = 0; i < types.size();) {
    std::size_t j = i;
    while (j < types.size() && types[j] == types[i])
      ++j;
    runs.emplace_back(i, j);
    i = j;
  }
  std::optional<std::vector<std::string>> best;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> best_facts;
  auto evaluate = [&]() {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      pos[nodes[perm[i]]] = i;
    std::vector<std::pair<std::string, std::vector<std::size_t>>> fs;
    for (const auto &f : ac.facts) {
      std::vector<std::size_t> args;
      for (const auto &a : f.args)
        args.push_back(pos.at(a));
      fs.emplace_back(f.predicate, std::move(args));
    }
    std::sort(fs.begin(), fs.end());
    std::vector<std::string> strs;
    for (const auto &f : fs)
      strs.push_back(fact_string(f.first, f.second));
    if (!best || strs < *best) {
      best = std::move(strs);
      best_facts = std::move(fs);
    }
  };
  // Odometer over the per-run permutations.
  auto advance = [&]() {
    for (std::size_t r = runs.size(); r-- > 0;) {
      auto [b, e] = runs[r];
      if (std::next_permutation(perm.begin() + static_cast<long>(b),
                                perm.begin() + static_cast<long>(e)))
        return true;
    }
    return false;
  };
  do {
    evaluate();
  } while (advance());

  AbstractType at;
  at.node_types = types;
  at.facts = std::move(best_facts);
  std::string key;
  for (const auto &t : types)
    key += t + ";";
  key += "|";
  for (const auto &s : *best)
    key += s;
  at.key = std::move(key);
  return at;
}

bool identical_structure(const AbstractComponent &a, const StaticGraph &ga,
                         const AbstractComponent &b, const StaticGraph &gb) {
  if (a.nodes.size() != b.nodes.size() || a.facts.size() != b.facts.size())
    return false;
  std::vector<std::string> na(a.nodes.begin(), a.nodes.end());
  std::vector<std::string> nb(b.nodes.begin(), b.nodes.end());
  std::set<Atom> fb(b.facts.begin(), b.facts.end());
  std::vector<std::size_t> perm(nb.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    std::map<std::string, std::string> p;
    for (std::size_t i = 0; i < na.size() && ok; ++i) {
      ok = ga.type_of(na[i]) == gb.type_of(nb[perm[i]]);
      p[na[i]] = nb[perm[i]];
    }
    if (!ok)
      continue;
    // With equal fact counts and distinct facts, the forward image being
    // contained in Facts(b) makes the mapping a bijection on facts too.
    std::set<Atom> image;
    for (const auto &f : a.facts) {
      Atom m{f.predicate, {}};
      for (const auto &x : f.args)
        m.args.push_back(p[x]);
      if (!fb.count(m)) {
        ok = false;
        break;
      }
      image.insert(std::move(m));
    }
    if (ok && image == fb)
      return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

} // namespace macroplan
