#include "macroplan/pipeline.hpp"

#include "macroplan/solep.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace macroplan {

void TrainingConfig::check() const {
  if (problem_paths.empty())
    throw std::invalid_argument("at least one training problem is required");
  if (search.max_expanded == 0 || search.time_limit_seconds <= 0 ||
      search.memory_limit_mb == 0 || generation_nodes == 0)
    throw std::invalid_argument("budgets must be positive");
  if (size.max_length < 2)
    throw std::invalid_argument("max length must be at least 2");
}

namespace {

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

} // namespace

// ---------------------------------------------------------------- solving

SolveOutcome solve(const Domain &domain, const Problem &problem,
                   std::span<const MacroOperator> macros, Setup setup,
                   const SearchOptions &search, const GroundingOptions &grounding) {
  SolveOutcome out;
  std::vector<MacroOperator> used;
  if (setup == Setup::Solep || setup == Setup::Both) {
    for (const auto &m : macros)
      for (const auto &op : m.ops)
        if (!domain.find_operator(op))
          throw std::invalid_argument("macro " + m.name() + " uses unknown operator " +
                                      op);
    used.assign(macros.begin(), macros.end());
  }
  auto t0 = std::chrono::steady_clock::now();
  GroundTask task;
  try {
    task = ground_actions(domain, problem, grounding);
  } catch (const ResourceLimitError &e) {
    out.search.status = SearchStatus::ResourceLimit;
    out.search.message = e.what();
    return out;
  }
  out.grounding_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.ground_actions = task.actions.size();

  Planner planner(task, std::move(used), search);
  out.search = planner.solve();
  if (!out.solved()) return out;

  for (const auto &step : out.search.plan)
    for (ActionId a : step.actions)
      out.search_steps.push_back({task.actions[a].op, task.actions[a].args});
  out.plan = primitive_plan(task, out.search.plan, planner.zobrist());
  auto check = validate_plan(domain, problem, primitive_steps(out.plan));
  if (!check.ok)
    throw std::logic_error("internal error: emitted plan fails validation at step " +
                           std::to_string(check.step) + ": " + check.message);
  return out;
}

std::vector<PrimitiveStep> primitive_steps(std::span<const PlanLine> plan) {
  std::vector<PrimitiveStep> out;
  out.reserve(plan.size());
  for (const auto &l : plan) out.push_back(l.step);
  return out;
}

// ---------------------------------------------------------------- validation

namespace {

struct Simulation {
  std::vector<std::set<Atom>> states;
  ValidationResult result;
};

Simulation run_plan(const Domain &domain, const Problem &problem,
                    std::span<const PrimitiveStep> plan) {
  Simulation sim;
  std::set<Atom> state(problem.init.begin(), problem.init.end());
  sim.states.push_back(state);
  auto fail = [&](std::size_t i, std::string msg) {
    sim.result.ok = false;
    sim.result.step = i;
    sim.result.message = std::move(msg);
    return sim;
  };
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto &step = plan[i];
    const Operator *op = domain.find_operator(step.op);
    if (!op) return fail(i, "unknown operator " + step.op);
    if (op->params.size() != step.args.size())
      return fail(i, "wrong number of arguments for " + step.op);
    std::map<std::string, std::string> sub;
    for (std::size_t j = 0; j < op->params.size(); ++j) {
      auto type = problem.type_of(step.args[j]);
      if (!type) return fail(i, "unknown object " + step.args[j]);
      if (!domain.types.is_subtype(*type, op->params[j].type))
        return fail(i, "object " + step.args[j] + " is not a " + op->params[j].type);
      sub[op->params[j].name] = step.args[j];
    }
    auto ground = [&](const Atom &a) {
      Atom g{a.predicate, {}};
      for (const auto &x : a.args) g.args.push_back(is_variable(x) ? sub.at(x) : x);
      return g;
    };
    for (const auto &p : op->pre)
      if (!state.count(ground(p)))
        return fail(i, "precondition " + to_string(ground(p)) + " of " +
                           to_string(step) + " does not hold");
    for (const auto &d : op->del) state.erase(ground(d));
    for (const auto &a : op->add) state.insert(ground(a));
    sim.states.push_back(state);
  }
  for (const auto &g : problem.goal)
    if (!state.count(g))
      return fail(plan.size(), "goal " + to_string(g) + " does not hold");
  return sim;
}

} // namespace

ValidationResult validate_plan(const Domain &domain, const Problem &problem,
                               std::span<const PrimitiveStep> plan) {
  return run_plan(domain, problem, plan).result;
}

std::vector<std::set<Atom>> simulate_plan(const Domain &domain, const Problem &problem,
                                          std::span<const PrimitiveStep> plan) {
  return run_plan(domain, problem, plan).states;
}

std::vector<PrimitiveStep> parse_plan(std::string_view text) {
  std::vector<PrimitiveStep> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (auto c = line.find(';'); c != std::string::npos) line.resize(c);
    auto open = line.find('(');
    if (open == std::string::npos) continue;
    auto close = line.find(')', open);
    if (close == std::string::npos)
      throw std::invalid_argument("unterminated plan step: " + line);
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : line.substr(open + 1, close - open - 1)) {
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!cur.empty()) tokens.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    if (tokens.empty()) throw std::invalid_argument("empty plan step");
    PrimitiveStep step;
    step.op = tokens.front();
    step.args.assign(tokens.begin() + 1, tokens.end());
    out.push_back(std::move(step));
  }
  return out;
}

// ---------------------------------------------------------------- training

CaedTraining train_caed(const Domain &domain, std::span<const Problem> problems,
                        const TrainingConfig &cfg) {
  CaedTraining out;
  out.enhanced = domain;
  out.weights = WeightTable(RankingMode::Frequency, cfg.ranking);
  Domain flat = flatten_types(domain);
  PredicatePartition partition = partition_predicates(domain);

  std::map<std::string, AbstractType> types;
  for (const auto &p : problems) {
    StaticGraph graph = build_static_graph(p, partition);
    ClusteringOptions copts;
    copts.bounds = cfg.component_bounds;
    for (const auto &c : all_components(component_abstraction(graph, domain, copts)))
      types.emplace(abstract_type_of(c, graph).key, abstract_type_of(c, graph));
  }
  auto unchanged = [&](const std::string &why) {
    out.report.push_back("no macros: " + why);
    out.enhanced_text = write_domain(domain);
    return out;
  };
  if (types.empty()) return unchanged("no abstract components found");
  for (const auto &[key, at] : types)
    out.report.push_back("abstract type " + at.to_string());

  std::vector<AbstractType> type_list;
  for (const auto &[key, at] : types) type_list.push_back(at);
  GenerationLimits limits;
  limits.size = cfg.size;
  limits.max_nodes = cfg.generation_nodes;
  GenerationResult gen = generate_macros(flat, type_list, partition, limits);
  if (gen.truncated)
    out.report.push_back("warning: macro generation stopped after " +
                         std::to_string(gen.nodes) + " nodes");
  out.candidates = restore_hierarchy(gen.macros, flat);
  assign_variants(out.candidates);
  for (auto &m : out.candidates)
    if (!m.compiled) m = compile_macro(domain, m);
  out.report.push_back(std::to_string(out.candidates.size()) + " candidate macros");
  if (out.candidates.empty()) return unchanged("no macro passed the pruning rules");

  Domain all = parse_domain(write_domain(domain, out.candidates));
  std::map<std::string, std::string> key_of_name;
  for (const auto &m : out.candidates) key_of_name[m.name()] = out.weights.add(m);

  for (std::size_t i = 0; i < problems.size(); ++i) {
    SolveOutcome r;
    try {
      r = solve(all, problems[i], {}, Setup::Caed, cfg.search, cfg.grounding);
    } catch (const ResourceLimitError &e) {
      r.search.message = e.what();
    }
    if (!r.solved()) {
      out.report.push_back("warning: training problem " + problems[i].name +
                           " not solved with candidates (" + r.search.message + ")");
      continue;
    }
    std::map<std::string, std::size_t> occurrences;
    for (const auto &s : r.search_steps)
      if (auto it = key_of_name.find(s.op); it != key_of_name.end())
        ++occurrences[it->second];
    frequency_update(out.weights, occurrences);
    out.report.push_back("problem " + problems[i].name + ": plan length " +
                         std::to_string(r.plan.size()) + ", " +
                         std::to_string(occurrences.size()) + " macros used");
  }

  out.selected = select_top_k(out.weights, cfg.k);
  assign_variants(out.selected);
  for (const auto &m : out.selected)
    out.report.push_back("selected " + m.name() + " weight " +
                         fmt("%.0f", out.weights.weight(canonical_key(m))));
  if (out.selected.empty()) return unchanged("no candidate was used in a training plan");
  out.enhanced_text = write_domain(domain, out.selected);
  out.enhanced = parse_domain(out.enhanced_text);
  return out;
}

SolepTraining train_solep(const Domain &domain, std::span<const Problem> problems,
                          const TrainingConfig &cfg) {
  SolepTraining out;
  out.weights = WeightTable(RankingMode::Gradient, cfg.ranking);
  for (const auto &p : problems) {
    SolveOutcome base = solve(domain, p, {}, Setup::NoMacros, cfg.search, cfg.grounding);
    if (!base.solved()) {
      out.report.push_back("warning: skipping unsolved training problem " + p.name);
      continue;
    }
    double n = static_cast<double>(base.search.stats.expanded);
    double len = static_cast<double>(base.plan.size());
    if (n == 0) {
      out.report.push_back("warning: skipping trivial training problem " + p.name);
      continue;
    }
    auto candidates = extract_macros(domain, base.search_steps);
    out.report.push_back("problem " + p.name + ": N=" + fmt("%.0f", n) +
                         " L=" + fmt("%.0f", len) + ", " +
                         std::to_string(candidates.size()) + " candidates");
    SearchOptions budget = cfg.search;
    budget.max_expanded = 2 * base.search.stats.expanded;
    for (const auto &c : candidates) {
      std::string key = out.weights.add(c.macro);
      std::vector<MacroOperator> one{c.macro};
      SolveOutcome r = solve(domain, p, one, Setup::Solep, budget, cfg.grounding);
      std::optional<double> nm;
      if (r.solved()) nm = static_cast<double>(r.search.stats.expanded);
      gradient_update(out.weights, key, n, nm, len);
      out.report.push_back("  " + c.macro.name() + " x" +
                           std::to_string(c.occurrences) + ": N_m=" +
                           (nm ? fmt("%.0f", *nm) : std::string("unsolved")) +
                           " w=" + fmt("%.6f", out.weights.weight(key)));
    }
    threshold_update(out.weights, len);
  }

  out.file.domain = domain.name;
  out.file.config = {
      {"method", "solep"},
      {"alpha", fmt("%.6f", cfg.ranking.alpha)},
      {"c", fmt("%.6f", cfg.ranking.c)},
      {"problems", std::to_string(problems.size())},
      {"seed", std::to_string(cfg.seed)},
  };
  out.file.threshold = out.weights.threshold();
  for (const auto &m : select_below_threshold(out.weights))
    out.file.entries.push_back({"solep", m, out.weights.weight(canonical_key(m))});
  out.report.push_back("threshold " + fmt("%.6f", out.weights.threshold()) + ", " +
                       std::to_string(out.file.entries.size()) + " macros selected");
  return out;
}

} // namespace macroplan
