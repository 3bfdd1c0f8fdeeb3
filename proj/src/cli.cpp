#include "ivr/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ivr/compare.hpp"
#include "ivr/family.hpp"
#include "ivr/iterative.hpp"
#include "ivr/report.hpp"
#include "ivr/symbolic.hpp"

namespace ivr {

namespace {

struct Options {
  // gen
  std::size_t blocks = 0;
  double p = 0.01;
  std::vector<std::string> mechanisms;
  std::uint64_t seed = 0;
  double jitter = 0.0;
  // model commands
  std::string input;
  std::string heuristic = "pi-min";
  std::vector<std::string> heuristics;
  std::size_t step = 1;
  std::vector<std::size_t> steps{1, 2, 3, 4};
  std::size_t node_limit = 0;
  double time_limit = 0.0;
  double deadline = -1.0;
  std::string format;
  std::string out;
  std::string order_out;
  std::size_t workers = 1;
  int passes = 1;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty())
    out << text;
  else
    write_file(o.out, text);
}

Budget budget_of(const Options& o) {
  Budget b;
  if (o.node_limit > 0) b.node_limit = o.node_limit;
  if (o.time_limit > 0.0) b.time_limit_s = o.time_limit;
  return b;
}

int cmd_gen(const Options& o, std::ostream& out, std::ostream& err) {
  GenConfig cfg;
  cfg.blocks = o.blocks;
  cfg.p = o.p;
  cfg.seed = o.seed;
  cfg.jitter = o.jitter;
  if (!o.mechanisms.empty()) {
    cfg.mechanisms.clear();
    for (const auto& name : o.mechanisms) {
      const auto m = parse_mechanism(name);
      if (!m) {
        err << "error: unknown mechanism " << name << "\n";
        return kExitUsage;
      }
      cfg.mechanisms.push_back(*m);
    }
  }
  GeneratedFamily fam;
  try {
    fam = generate(cfg);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (o.out.empty()) {
    out << fam.source;
    err << fam.metadata_json;
  } else {
    write_file(o.out, fam.source);
    write_file(std::filesystem::path(o.out).replace_extension(".json").string(),
               fam.metadata_json);
  }
  return kExitOk;
}

int cmd_build(const Options& o, std::ostream& out) {
  const Program p = parse(read_file(o.input));
  const SymbolicModel m = construct(p, VarOrder::identity(p.vars.size()), budget_of(o));
  if (o.format == "csv") {
    std::ostringstream os;
    os << "states,trans_nodes,init_nodes,reach_nodes,peak_nodes,build_seconds\n"
       << m.stats.states.str() << ',' << m.stats.trans_nodes << ',' << m.stats.init_nodes << ','
       << m.stats.reach_nodes << ',' << m.stats.peak_nodes << ','
       << seconds(m.stats.build_seconds) << '\n';
    emit(o, out, os.str());
  } else {
    emit(o, out, stats_json(m.stats) + "\n");
  }
  return kExitOk;
}

int cmd_iterate(const Options& o, std::ostream& out, std::ostream& err) {
  const Program p = parse(read_file(o.input));
  const auto sel = parse_selection(o.heuristic);
  const VarOrder pi = VarOrder::identity(p.vars.size());
  IterateOptions opts;
  opts.sift.passes = o.passes;
  const bool csv = o.format != "json";

  const auto report = [&](const std::vector<IterationStats>& rows, const VarOrder& order,
                          bool truncated, std::optional<std::size_t> failed,
                          const std::string& error) {
    emit(o, out, csv ? iteration_csv(rows) : iteration_json(p, rows, order, truncated, failed, error));
    if (!o.order_out.empty())
      write_file(o.order_out, order_json(p, order));
    else if (csv)
      err << "order: " << order_json(p, order);
  };

  try {
    const IterateResult r = iterate(p, pi, std::nullopt, {*sel, o.step}, budget_of(o), opts);
    report(r.rows, r.order, r.truncated, std::nullopt, {});
  } catch (const ConstructionFailed& e) {
    report(e.rows(), e.order(), false, e.iteration(), e.detail());
    err << "error: iteration " << e.iteration() << " failed: " << e.detail() << "\n";
    return kExitConstructionFailed;
  }
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  const Program p = parse(read_file(o.input));
  CompareConfig cfg;
  if (!o.heuristics.empty()) {
    cfg.selections.clear();
    for (const auto& h : o.heuristics) cfg.selections.push_back(*parse_selection(h));
  }
  cfg.steps = o.steps;
  cfg.budget = budget_of(o);
  cfg.sift.passes = o.passes;
  if (o.deadline >= 0.0) cfg.deadline_s = o.deadline;
  cfg.workers = o.workers;
  const auto rows = compare_parallel(p, VarOrder::identity(p.vars.size()), cfg);
  emit(o, out, o.format == "json" ? compare_json(rows) : compare_csv(rows));
  for (const auto& r : rows) {
    if (r.status == CellStatus::Failed)
      err << "warning: " << to_string(r.selection) << " step " << r.step << ": " << r.message << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Iterative variable reordering for symbolic family models", "ivr"};
  app.require_subcommand(1);
  const auto selection_check = CLI::IsMember({"pi-min", "rho-min", "rho-max"});
  const auto format_check = CLI::IsMember({"csv", "json"});

  auto* gen = app.add_subcommand("gen", "Generate a redundancy family program");
  gen->add_option("--blocks,-m", o.blocks, "Number of blocks")->required()->check(CLI::PositiveNumber);
  gen->add_option("--p", o.p, "Fault probability per block execution")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--mechanisms", o.mechanisms, "Allowed mechanisms (none, comparison, voting)")
      ->delimiter(',');
  gen->add_option("--seed", o.seed, "Seed for probability jitter");
  gen->add_option("--jitter", o.jitter, "Relative per-block spread of p")->check(CLI::NonNegativeNumber);
  gen->add_option("--out", o.out, "Program file; metadata goes next to it as .json");

  const auto add_budget = [&](CLI::App* sub) {
    sub->add_option("input", o.input, "Program file")->required();
    sub->add_option("--node-limit", o.node_limit, "Maximum live nodes")->check(CLI::PositiveNumber);
    sub->add_option("--time-limit", o.time_limit, "Seconds per model construction")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Write the report here instead of stdout");
  };

  auto* build = app.add_subcommand("build", "Construct the model under declaration order");
  add_budget(build);
  build->add_option("--format", o.format, "Output format")->check(format_check);

  auto* iter = app.add_subcommand("iterate", "Run iterative reordering");
  add_budget(iter);
  iter->add_option("--heuristic", o.heuristic, "Variable selection")->check(selection_check);
  iter->add_option("--step", o.step, "Domain growth steps per iteration")->check(CLI::PositiveNumber);
  iter->add_option("--passes", o.passes, "Sifting passes")->check(CLI::PositiveNumber);
  iter->add_option("--format", o.format, "Output format")->check(format_check);
  iter->add_option("--order-out", o.order_out, "Write the final order (JSON array) here");

  auto* cmp = app.add_subcommand("compare", "Compare selections and step sizes");
  add_budget(cmp);
  cmp->add_option("--heuristic", o.heuristics, "Selections to run (default: all)")
      ->check(selection_check)
      ->delimiter(',');
  cmp->add_option("--steps", o.steps, "Step sizes")->check(CLI::PositiveNumber)->delimiter(',');
  cmp->add_option("--deadline", o.deadline, "Wall-clock seconds per cell")
      ->check(CLI::NonNegativeNumber);
  cmp->add_option("--workers", o.workers, "Parallel workers")->check(CLI::PositiveNumber);
  cmp->add_option("--passes", o.passes, "Sifting passes")->check(CLI::PositiveNumber);
  cmp->add_option("--format", o.format, "Output format")->check(format_check);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(o, out, err);
    if (build->parsed()) return cmd_build(o, out);
    if (iter->parsed()) return cmd_iterate(o, out, err);
    if (cmp->parsed()) return cmd_compare(o, out, err);
  } catch (const ParseError& e) {
    err << "error: " << o.input << ":" << e.what() << "\n";
    return kExitInvalidProgram;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidProgram;
  } catch (const EmptyInit& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidProgram;
  } catch (const NodeLimitExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitNodeLimit;
  } catch (const TimeBudgetExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitTimeBudget;
  } catch (const OverlappingGuards& e) {
    err << "error: " << e.what() << "\n";
    return kExitModelError;
  } catch (const OutOfDomainUpdate& e) {
    err << "error: " << e.what() << "\n";
    return kExitModelError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace ivr
