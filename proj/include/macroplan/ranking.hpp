#pragma once

#include "macroplan/macro.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace macroplan {

/// Odd sigmoid bounded in (-1, 1): 2 / (1 + e^-x) - 1.
double sigmoid(double x);

enum class RankingMode {
  /// Occurrence counting; higher is better, weights start at 0.
  Frequency,
  /// Node-savings gradient descent; lower is better, weights start at 1.
  Gradient,
};

struct RankingParams {
  double alpha = 0.001;
  double bonus = 10.0;
  /// Relative node savings of the imaginary threshold macro.
  double c = 0.01;
};

class WeightTable {
public:
  struct Entry {
    MacroOperator macro;
    double weight = 0.0;
  };

  explicit WeightTable(RankingMode mode, RankingParams params = {});

  RankingMode mode() const { return mode_; }
  const RankingParams &params() const { return params_; }

  /// Registers a candidate (no-op if already present). Returns its key.
  std::string add(const MacroOperator &m);
  bool contains(const std::string &key) const { return entries_.count(key) > 0; }
  double weight(const std::string &key) const { return entries_.at(key).weight; }
  void set_weight(const std::string &key, double w) { entries_.at(key).weight = w; }
  /// Weight of the imaginary threshold macro (gradient mode).
  double threshold() const { return threshold_; }
  void set_threshold(double w) { threshold_ = w; }

  /// Entries in canonical macro order.
  const std::map<std::string, Entry> &entries() const { return entries_; }
  std::map<std::string, Entry> &entries() { return entries_; }

private:
  RankingMode mode_;
  RankingParams params_;
  double threshold_ = 1.0;
  std::map<std::string, Entry> entries_;
};

/// Adds occurrences + bonus to every macro present in a plan.
/// `occurrences` maps macro keys to their count in that plan.
void frequency_update(WeightTable &wt,
                      const std::map<std::string, std::size_t> &occurrences);

/// The k highest weights, ties in canonical order; zero weights never selected.
std::vector<MacroOperator> select_top_k(const WeightTable &wt, std::size_t k = 2);

/// w_m -= alpha * sigmoid((N - N_m) / N) * L. A missing N_m (the problem was
/// not solved with the macro) is treated as N_m = 2N.
void gradient_update(WeightTable &wt, const std::string &key, double nodes,
                     std::optional<double> nodes_with_macro, double length);

/// Delta for one gradient update (exposed for tests and reports).
double gradient_delta(double nodes, std::optional<double> nodes_with_macro);

/// w_im -= alpha * sigmoid(c) * L.
void threshold_update(WeightTable &wt, double length);

/// Macros whose weight is below the threshold, by increasing weight.
std::vector<MacroOperator> select_below_threshold(const WeightTable &wt);

} // namespace macroplan
