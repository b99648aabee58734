#pragma once

#include "macroplan/caed.hpp"
#include "macroplan/components.hpp"
#include "macroplan/grounding.hpp"
#include "macroplan/ranking.hpp"
#include "macroplan/search.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace macroplan {

enum class TrainingMethod { Caed, Solep, Both };

struct TrainingConfig {
  std::string domain_path;
  std::vector<std::string> problem_paths;
  TrainingMethod method = TrainingMethod::Both;
  RankingParams ranking;
  std::size_t k = 2;
  SizeLimits size;
  SizeBounds component_bounds;
  std::size_t generation_nodes = 200'000;
  SearchOptions search;
  GroundingOptions grounding;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when the configuration is unusable.
  void check() const;
};

// ---- macro file ------------------------------------------------------------

class MacroFileError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct MacroFileEntry {
  std::string method;
  MacroOperator macro;
  double weight = 0.0;
};

struct MacroFile {
  std::string domain;
  /// Echoed training settings, `key value` pairs in insertion order.
  std::vector<std::pair<std::string, std::string>> config;
  double threshold = 1.0;
  std::vector<MacroFileEntry> entries;

  std::vector<MacroOperator> macros() const;
};

std::string write_macro_file(const MacroFile &file, const Domain &domain);
/// Operator parameters are resolved against `domain`.
MacroFile parse_macro_file(std::string_view text, const Domain &domain);
MacroFile load_macro_file(const std::string &path, const Domain &domain);

// ---- training --------------------------------------------------------------

struct CaedTraining {
  /// Original domain with the selected macros appended.
  Domain enhanced;
  std::string enhanced_text;
  std::vector<MacroOperator> candidates;
  std::vector<MacroOperator> selected;
  WeightTable weights{RankingMode::Frequency};
  std::vector<std::string> report;
};

/// Component abstraction over the training problems, macro generation,
/// frequency ranking on training solutions and selection of the best k.
CaedTraining train_caed(const Domain &domain, std::span<const Problem> problems,
                        const TrainingConfig &cfg);

struct SolepTraining {
  MacroFile file;
  WeightTable weights{RankingMode::Gradient};
  std::vector<std::string> report;
};

/// Baseline solve, extraction, per-macro re-solve with gradient updates and
/// threshold selection.
SolepTraining train_solep(const Domain &domain, std::span<const Problem> problems,
                          const TrainingConfig &cfg);

// ---- solving ---------------------------------------------------------------

enum class Setup { NoMacros = 1, Caed = 2, Solep = 3, Both = 4 };

struct SolveOutcome {
  SearchResult search;
  std::vector<PlanLine> plan;
  /// Plan as seen by the search: compiled macro actions stay single steps.
  std::vector<PrimitiveStep> search_steps;
  std::size_t ground_actions = 0;
  double grounding_seconds = 0.0;

  bool solved() const { return search.status == SearchStatus::Solved; }
};

/// Grounds and searches. Setups 1 and 2 ignore `macros`; setups 2 and 4
/// expect `domain` to be an enhanced domain. Solved plans are validated
/// against `domain` before they are returned; a failure throws
/// std::logic_error.
SolveOutcome solve(const Domain &domain, const Problem &problem,
                   std::span<const MacroOperator> macros, Setup setup,
                   const SearchOptions &search = {},
                   const GroundingOptions &grounding = {});

// ---- validation ------------------------------------------------------------

struct ValidationResult {
  bool ok = true;
  /// First failing step; equals the plan length when only the goal fails.
  std::size_t step = 0;
  std::string message;
};

/// Simulates the steps from the initial state with the operator
/// definitions, checking argument types and preconditions.
ValidationResult validate_plan(const Domain &domain, const Problem &problem,
                               std::span<const PrimitiveStep> plan);

/// All states visited by the plan (fluent and static facts); stops at the
/// first inapplicable step.
std::vector<std::set<Atom>> simulate_plan(const Domain &domain, const Problem &problem,
                                          std::span<const PrimitiveStep> plan);

/// Reads `i: (name arg ...)` lines (also bare `(name ...)`), ignoring
/// comments after `;`.
std::vector<PrimitiveStep> parse_plan(std::string_view text);

std::vector<PrimitiveStep> primitive_steps(std::span<const PlanLine> plan);

// ---- reports ---------------------------------------------------------------

struct AccuracyRow {
  std::string problem;
  std::string label;
  std::size_t step = 0;
  int h = 0;
  std::size_t steps_to_goal = 0;
};

/// h(s) and remaining steps for every state along `plan`, evaluated in the
/// grounding of `domain`.
std::vector<AccuracyRow> heuristic_accuracy(const Domain &domain, const Problem &problem,
                                            std::span<const PrimitiveStep> plan,
                                            const std::string &label);

std::string accuracy_csv(std::span<const AccuracyRow> rows);
/// Mean |h - steps_to_goal| over rows with the given label (finite h only).
double mean_accuracy_error(std::span<const AccuracyRow> rows, const std::string &label);

struct RunRecord {
  std::string problem;
  int setup = 1;
  bool solved = false;
  std::size_t expanded = 0;
  std::size_t evaluated = 0;
  double search_seconds = 0.0;
  std::size_t ground_actions = 0;
  std::size_t plan_length = 0;
};

RunRecord make_run_record(const std::string &problem, Setup setup,
                          const SolveOutcome &outcome);

struct CostRow {
  RunRecord run;
  double cost_per_node = 0.0;
  /// Cost per node relative to setup 1 on the same problem.
  double ratio = 0.0;
  /// Ground actions relative to setup 1 on the same problem.
  double instantiation_rate = 0.0;
};

/// Rows for every run that has a setup-1 run of the same problem.
std::vector<CostRow> cost_per_node(std::span<const RunRecord> runs);
std::string cost_csv(std::span<const CostRow> rows);

/// Statistics line printed after a plan.
std::string stats_line(const SolveOutcome &outcome);

} // namespace macroplan
