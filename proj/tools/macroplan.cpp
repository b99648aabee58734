// macroplan: train macros, solve problems, validate plans, emit reports.

#include "macroplan/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace macroplan;

namespace {

constexpr int kOk = 0;
constexpr int kUnsolved = 1;
constexpr int kUsage = 2;
constexpr int kResource = 3;

void write_output(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<Problem> load_problems(const std::vector<std::string> &paths,
                                   const Domain &domain) {
  std::vector<Problem> out;
  for (const auto &p : paths) out.push_back(load_problem(p, domain));
  return out;
}

struct Limits {
  double time = 1800;
  std::size_t mem = 1024;
  std::size_t nodes = SearchOptions{}.max_expanded;
  std::size_t max_actions = GroundingOptions{}.max_actions;

  void add_to(CLI::App *app) {
    app->add_option("--time", time, "Search time limit in seconds")->capture_default_str();
    app->add_option("--mem", mem, "Search memory limit in MB")->capture_default_str();
    app->add_option("--nodes", nodes, "Expanded-node limit")->capture_default_str();
    app->add_option("--max-actions", max_actions, "Ground action limit")
        ->capture_default_str();
  }
  SearchOptions search() const {
    SearchOptions s;
    s.time_limit_seconds = time;
    s.memory_limit_mb = mem;
    s.max_expanded = nodes;
    return s;
  }
  GroundingOptions grounding() const { return {max_actions}; }
};

void dump_components(const Domain &domain, const Problem &problem, std::ostream &os) {
  auto partition = partition_predicates(domain);
  auto graph = build_static_graph(problem, partition);
  for (const auto &d : component_abstraction(graph, domain)) {
    os << "; seed type " << d.seed_type << "\n";
    for (const auto &c : d.components) {
      os << ";   {";
      bool first = true;
      for (const auto &n : c.nodes) {
        os << (first ? "" : " ") << n;
        first = false;
      }
      os << "} " << abstract_type_of(c, graph).to_string() << "\n";
    }
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"STRIPS planner with learned macro-operators"};
  app.require_subcommand(1);

  // train
  auto *train = app.add_subcommand("train", "Learn macros from training problems");
  std::string method = "both", train_domain, out_domain, out_macros;
  std::vector<std::string> train_problems;
  TrainingConfig cfg;
  Limits train_limits;
  bool train_dump_components = false, train_dump_macros = false;
  train->add_option("--method", method, "caed, solep or both")
      ->check(CLI::IsMember({"caed", "solep", "both"}))
      ->capture_default_str();
  train->add_option("--domain", train_domain, "Domain file")->required();
  train->add_option("--problems", train_problems, "Training problems")->required();
  train->add_option("--alpha", cfg.ranking.alpha)->capture_default_str();
  train->add_option("--bonus", cfg.ranking.bonus)->capture_default_str();
  train->add_option("--c", cfg.ranking.c)->capture_default_str();
  train->add_option("--k", cfg.k)->capture_default_str();
  train->add_option("--max-length", cfg.size.max_length)->capture_default_str();
  train->add_option("--max-preconditions", cfg.size.max_preconditions)
      ->capture_default_str();
  train->add_option("--generation-nodes", cfg.generation_nodes)->capture_default_str();
  train->add_option("--seed", cfg.seed)->capture_default_str();
  train->add_option("--out-domain", out_domain, "Enhanced domain output (caed, both)");
  train->add_option("--out-macros", out_macros, "Macro file output (solep, both)");
  train->add_flag("--dump-components", train_dump_components);
  train->add_flag("--dump-macros", train_dump_macros);
  train_limits.add_to(train);

  // solve
  auto *solve_cmd = app.add_subcommand("solve", "Solve a problem");
  int setup = 1;
  std::string domain_path, problem_path, macros_path, plan_out;
  Limits limits;
  bool dump_grounding = false, dump_components_flag = false, dump_macros = false;
  solve_cmd->add_option("--setup", setup, "1 none, 2 CA-ED, 3 SOL-EP, 4 both")
      ->check(CLI::Range(1, 4))
      ->capture_default_str();
  solve_cmd->add_option("--domain", domain_path)->required();
  solve_cmd->add_option("--problem", problem_path)->required();
  solve_cmd->add_option("--macros", macros_path, "Macro file (setups 3, 4)");
  solve_cmd->add_option("--out", plan_out, "Plan output file");
  solve_cmd->add_flag("--dump-grounding", dump_grounding);
  solve_cmd->add_flag("--dump-components", dump_components_flag);
  solve_cmd->add_flag("--dump-macros", dump_macros);
  limits.add_to(solve_cmd);

  // validate
  auto *validate = app.add_subcommand("validate", "Validate a plan");
  std::string plan_path;
  validate->add_option("--domain", domain_path)->required();
  validate->add_option("--problem", problem_path)->required();
  validate->add_option("--plan", plan_path)->required();

  // report
  auto *report = app.add_subcommand("report", "Heuristic accuracy or cost per node");
  std::string kind, enhanced_path, macros_enhanced_path, report_out;
  std::vector<std::string> report_problems;
  Limits report_limits;
  report->add_option("kind", kind, "accuracy or cost")
      ->required()
      ->check(CLI::IsMember({"accuracy", "cost"}));
  report->add_option("--domain", domain_path)->required();
  report->add_option("--enhanced", enhanced_path, "CA-ED enhanced domain");
  report->add_option("--macros", macros_path, "SOL-EP macros for the original domain");
  report->add_option("--macros-enhanced", macros_enhanced_path,
                     "SOL-EP macros for the enhanced domain");
  report->add_option("--problems", report_problems)->required();
  report->add_option("--out", report_out);
  report_limits.add_to(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*train) {
      cfg.domain_path = train_domain;
      cfg.problem_paths = train_problems;
      cfg.method = method == "caed"    ? TrainingMethod::Caed
                   : method == "solep" ? TrainingMethod::Solep
                                       : TrainingMethod::Both;
      cfg.search = train_limits.search();
      cfg.grounding = train_limits.grounding();
      cfg.check();
      Domain domain = load_domain(train_domain);
      auto problems = load_problems(train_problems, domain);
      if (train_dump_components)
        for (const auto &p : problems) {
          std::cerr << "; components of " << p.name << "\n";
          dump_components(domain, p, std::cerr);
        }
      Domain solep_domain = domain;
      if (cfg.method != TrainingMethod::Solep) {
        CaedTraining caed = train_caed(domain, problems, cfg);
        for (const auto &line : caed.report) std::cerr << "; caed: " << line << "\n";
        if (train_dump_macros) {
          MacroFile dump;
          dump.domain = domain.name;
          dump.config = {{"method", "caed"}, {"candidates", std::to_string(caed.candidates.size())}};
          for (const auto &m : caed.candidates)
            dump.entries.push_back({"caed", m, caed.weights.weight(canonical_key(m))});
          std::cerr << write_macro_file(dump, domain);
        }
        write_output(out_domain, caed.enhanced_text);
        solep_domain = caed.enhanced;
      }
      if (cfg.method != TrainingMethod::Caed) {
        auto reparsed = load_problems(train_problems, solep_domain);
        SolepTraining solep = train_solep(solep_domain, reparsed, cfg);
        for (const auto &line : solep.report) std::cerr << "; solep: " << line << "\n";
        write_output(out_macros, write_macro_file(solep.file, solep_domain));
      }
      return kOk;
    }

    if (*solve_cmd) {
      Domain domain = load_domain(domain_path);
      Problem problem = load_problem(problem_path, domain);
      std::vector<MacroOperator> macros;
      if (setup >= 3) {
        if (macros_path.empty()) {
          std::cerr << "error: setups 3 and 4 need --macros\n";
          return kUsage;
        }
        macros = load_macro_file(macros_path, domain).macros();
      }
      if (dump_components_flag) dump_components(domain, problem, std::cerr);
      if (dump_macros && !macros.empty())
        std::cerr << read_file(macros_path);
      if (dump_grounding) {
        GroundTask task = ground_actions(domain, problem, limits.grounding());
        std::cerr << "; " << task.facts.size() << " facts, " << task.actions.size()
                  << " actions\n";
        for (const auto &a : task.actions) std::cerr << "; " << a.name() << "\n";
      }
      SolveOutcome r = solve(domain, problem, macros, static_cast<Setup>(setup),
                             limits.search(), limits.grounding());
      if (r.search.status == SearchStatus::ResourceLimit) {
        std::cerr << "resource limit: " << r.search.message << "\n";
        return kResource;
      }
      if (!r.solved()) {
        std::cerr << "no plan found: " << r.search.message << "\n";
        std::cout << stats_line(r) << "\n";
        return kUnsolved;
      }
      write_output(plan_out, format_plan(r.plan));
      std::cout << stats_line(r) << "\n";
      return kOk;
    }

    if (*validate) {
      Domain domain = load_domain(domain_path);
      Problem problem = load_problem(problem_path, domain);
      auto steps = parse_plan(read_file(plan_path));
      auto v = validate_plan(domain, problem, steps);
      if (v.ok) {
        std::cout << "plan valid (" << steps.size() << " steps)\n";
        return kOk;
      }
      std::cout << "plan invalid at step " << v.step << ": " << v.message << "\n";
      return kUnsolved;
    }

    if (*report) {
      Domain domain = load_domain(domain_path);
      std::optional<Domain> enhanced;
      if (!enhanced_path.empty()) enhanced = load_domain(enhanced_path);
      if (kind == "accuracy") {
        std::vector<AccuracyRow> rows;
        for (const auto &path : report_problems) {
          Problem p = load_problem(path, domain);
          SolveOutcome base = solve(domain, p, {}, Setup::NoMacros,
                                    report_limits.search(), report_limits.grounding());
          if (!base.solved()) {
            std::cerr << "warning: " << p.name << " not solved, skipped\n";
            continue;
          }
          auto steps = primitive_steps(base.plan);
          auto a = heuristic_accuracy(domain, p, steps, "original");
          rows.insert(rows.end(), a.begin(), a.end());
          if (enhanced) {
            Problem pe = load_problem(path, *enhanced);
            SolveOutcome own = solve(*enhanced, pe, {}, Setup::Caed,
                                     report_limits.search(), report_limits.grounding());
            if (!own.solved()) {
              std::cerr << "warning: " << p.name << " not solved in the enhanced domain\n";
              continue;
            }
            auto b = heuristic_accuracy(*enhanced, pe, own.search_steps, "enhanced");
            rows.insert(rows.end(), b.begin(), b.end());
          }
        }
        write_output(report_out, accuracy_csv(rows));
        return kOk;
      }
      std::vector<RunRecord> runs;
      std::vector<MacroOperator> m3, m4;
      if (!macros_path.empty()) m3 = load_macro_file(macros_path, domain).macros();
      if (enhanced && !macros_enhanced_path.empty())
        m4 = load_macro_file(macros_enhanced_path, *enhanced).macros();
      auto run = [&](const Domain &d, const std::string &path, Setup s,
                     const std::vector<MacroOperator> &ms) {
        Problem p = load_problem(path, d);
        runs.push_back(make_run_record(
            p.name, s,
            solve(d, p, ms, s, report_limits.search(), report_limits.grounding())));
      };
      for (const auto &path : report_problems) {
        run(domain, path, Setup::NoMacros, {});
        if (enhanced) run(*enhanced, path, Setup::Caed, {});
        if (!macros_path.empty()) run(domain, path, Setup::Solep, m3);
        if (enhanced && !macros_enhanced_path.empty())
          run(*enhanced, path, Setup::Both, m4);
      }
      write_output(report_out, cost_csv(cost_per_node(runs)));
      return kOk;
    }
  } catch (const PddlError &e) {
    std::cerr << "error: " << e.what();
    if (e.line()) std::cerr << " (line " << e.line() << ", column " << e.column() << ")";
    std::cerr << "\n";
    return kUsage;
  } catch (const MacroFileError &e) {
    std::cerr << "error: invalid macro file: " << e.what() << "\n";
    return kUsage;
  } catch (const ResourceLimitError &e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResource;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}
