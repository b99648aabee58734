#include "macroplan/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace macroplan {

double sigmoid(double x) {
  // tanh(x/2) is the same curve and stays accurate near zero.
  return std::tanh(x / 2.0);
}

WeightTable::WeightTable(RankingMode mode, RankingParams params)
    : mode_(mode), params_(params) {}

std::string WeightTable::add(const MacroOperator &m) {
  std::string key = canonical_key(m);
  double init = mode_ == RankingMode::Frequency ? 0.0 : 1.0;
  entries_.emplace(key, Entry{m, init});
  return key;
}

void frequency_update(WeightTable &wt,
                      const std::map<std::string, std::size_t> &occurrences) {
  if (wt.mode() != RankingMode::Frequency)
    throw std::logic_error("frequency_update on a gradient table");
  for (const auto &[key, count] : occurrences) {
    if (count == 0 || !wt.contains(key))
      continue;
    wt.set_weight(key, wt.weight(key) + static_cast<double>(count) +
                           wt.params().bonus);
  }
}

std::vector<MacroOperator> select_top_k(const WeightTable &wt, std::size_t k) {
  std::vector<const WeightTable::Entry *> ranked;
  for (const auto &[key, e] : wt.entries())
    if (e.weight > 0.0)
      ranked.push_back(&e);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto *a, const auto *b) { return a->weight > b->weight; });
  std::vector<MacroOperator> out;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
    out.push_back(ranked[i]->macro);
  return out;
}

double gradient_delta(double nodes, std::optional<double> nodes_with_macro) {
  if (nodes <= 0)
    throw std::invalid_argument("gradient update needs N > 0");
  double nm = nodes_with_macro.value_or(2.0 * nodes);
  return sigmoid((nodes - nm) / nodes);
}

void gradient_update(WeightTable &wt, const std::string &key, double nodes,
                     std::optional<double> nodes_with_macro, double length) {
  if (wt.mode() != RankingMode::Gradient)
    throw std::logic_error("gradient_update on a frequency table");
  double delta = gradient_delta(nodes, nodes_with_macro);
  wt.set_weight(key, wt.weight(key) - wt.params().alpha * delta * length);
}

void threshold_update(WeightTable &wt, double length) {
  wt.set_threshold(wt.threshold() -
                   wt.params().alpha * sigmoid(wt.params().c) * length);
}

std::vector<MacroOperator> select_below_threshold(const WeightTable &wt) {
  std::vector<const WeightTable::Entry *> ranked;
  for (const auto &[key, e] : wt.entries())
    if (e.weight < wt.threshold())
      ranked.push_back(&e);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto *a, const auto *b) { return a->weight < b->weight; });
  std::vector<MacroOperator> out;
  for (const auto *e : ranked)
    out.push_back(e->macro);
  return out;
}

} // namespace macroplan
