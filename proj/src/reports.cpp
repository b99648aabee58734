#include "macroplan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace macroplan {

std::vector<AccuracyRow> heuristic_accuracy(const Domain &domain, const Problem &problem,
                                            std::span<const PrimitiveStep> plan,
                                            const std::string &label) {
  auto states = simulate_plan(domain, problem, plan);
  if (states.size() != plan.size() + 1)
    throw std::invalid_argument("plan is not executable in domain " + domain.name);
  GroundTask task = ground_actions(domain, problem);
  FactIndex index = build_fact_index(task.actions, task.facts.size());
  ZobristTable zt(task.facts.size());
  RelaxedPlanner rpg(task, index);
  std::vector<AccuracyRow> rows;
  for (std::size_t i = 0; i < states.size(); ++i) {
    std::vector<FactId> ids;
    for (const auto &a : states[i])
      if (auto id = task.facts.find(a)) ids.push_back(*id);
    State s = make_state(std::move(ids), zt);
    rows.push_back({problem.name, label, i, rpg.compute(s, task.goal).h, plan.size() - i});
  }
  return rows;
}

std::string accuracy_csv(std::span<const AccuracyRow> rows) {
  std::ostringstream os;
  os << "problem,domain,step,h,steps_to_goal\n";
  for (const auto &r : rows) {
    os << r.problem << ',' << r.label << ',' << r.step << ',';
    if (r.h == kInfiniteH)
      os << "inf";
    else
      os << r.h;
    os << ',' << r.steps_to_goal << '\n';
  }
  return os.str();
}

double mean_accuracy_error(std::span<const AccuracyRow> rows, const std::string &label) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto &r : rows)
    if (r.label == label && r.h != kInfiniteH) {
      sum += std::abs(static_cast<double>(r.h) - static_cast<double>(r.steps_to_goal));
      ++n;
    }
  return n ? sum / static_cast<double>(n) : 0.0;
}

RunRecord make_run_record(const std::string &problem, Setup setup,
                          const SolveOutcome &outcome) {
  RunRecord r;
  r.problem = problem;
  r.setup = static_cast<int>(setup);
  r.solved = outcome.solved();
  r.expanded = outcome.search.stats.expanded;
  r.evaluated = outcome.search.stats.evaluated;
  r.search_seconds = outcome.search.stats.seconds;
  r.ground_actions = outcome.ground_actions;
  r.plan_length = outcome.plan.size();
  return r;
}

namespace {

double node_cost(const RunRecord &r) {
  // Sub-nanosecond timings are clamped so ratios stay positive.
  double t = std::max(r.search_seconds, 1e-9);
  return t / static_cast<double>(std::max<std::size_t>(r.evaluated, 1));
}

} // namespace

std::vector<CostRow> cost_per_node(std::span<const RunRecord> runs) {
  std::map<std::string, const RunRecord *> base;
  for (const auto &r : runs)
    if (r.setup == 1) base[r.problem] = &r;
  std::vector<CostRow> out;
  for (const auto &r : runs) {
    auto it = base.find(r.problem);
    if (it == base.end()) continue;
    CostRow row;
    row.run = r;
    row.cost_per_node = node_cost(r);
    row.ratio = r.setup == 1 ? 1.0 : row.cost_per_node / node_cost(*it->second);
    row.instantiation_rate =
        r.setup == 1 || it->second->ground_actions == 0
            ? 1.0
            : static_cast<double>(r.ground_actions) /
                  static_cast<double>(it->second->ground_actions);
    out.push_back(row);
  }
  return out;
}

std::string cost_csv(std::span<const CostRow> rows) {
  std::ostringstream os;
  os << "problem,setup,solved,expanded,evaluated,search_seconds,ground_actions,"
        "plan_length,cost_per_node,ratio_to_setup1,instantiation_rate\n";
  char buf[256];
  for (const auto &c : rows) {
    const auto &r = c.run;
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%zu,%zu,%.6f,%zu,%zu,%.9f,%.4f,%.4f\n",
                  r.problem.c_str(), r.setup, r.solved ? 1 : 0, r.expanded, r.evaluated,
                  r.search_seconds, r.ground_actions, r.plan_length, c.cost_per_node,
                  c.ratio, c.instantiation_rate);
    os << buf;
  }
  return os.str();
}

std::string stats_line(const SolveOutcome &outcome) {
  char buf[256];
  const auto &s = outcome.search.stats;
  std::snprintf(buf, sizeof buf,
                "; expanded %zu evaluated %zu length %zu time %.3f", s.expanded,
                s.evaluated, outcome.plan.size(), s.seconds + outcome.grounding_seconds);
  return buf;
}

} // namespace macroplan
