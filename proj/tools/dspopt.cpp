// dspopt: command-line front end for generating synthetic bidding markets,
// solving the allocation/bid-price plan, and simulating the online policies.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dspopt/common.hpp"
#include "dspopt/dual.hpp"
#include "dspopt/generate.hpp"
#include "dspopt/instance.hpp"
#include "dspopt/primal.hpp"
#include "dspopt/simulate.hpp"

namespace fs = std::filesystem;

namespace {

int g_log_level = 2;  // 0 quiet, 1 error, 2 warn, 3 info, 4 debug

void init_log_level() {
  const char* env = std::getenv("DSPOPT_LOG");
  if (!env) return;
  const std::string value(env);
  if (value == "quiet") g_log_level = 0;
  else if (value == "error") g_log_level = 1;
  else if (value == "warn") g_log_level = 2;
  else if (value == "info") g_log_level = 3;
  else if (value == "debug") g_log_level = 4;
  else std::fprintf(stderr, "warning: unknown DSPOPT_LOG level \"%s\"\n", env);
}

void log_info(const std::string& msg) {
  if (g_log_level >= 3) std::fprintf(stderr, "info: %s\n", msg.c_str());
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw dspopt::InputError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content, bool force) {
  if (fs::exists(path) && !force) {
    throw dspopt::InputError("refusing to overwrite " + path.string() +
                             " (pass --force to allow)");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw dspopt::InputError("cannot write " + path.string());
  os << content;
  if (!os) throw dspopt::InputError("short write to " + path.string());
}

fs::path sidecar_path(fs::path out) {
  if (out.extension() == ".json") {
    out.replace_extension(".quality.json");
  } else {
    out += ".quality.json";
  }
  return out;
}

dspopt::Instance load_instance(const fs::path& path) {
  return dspopt::parse_instance_text(read_file(path));
}

dspopt::Instance load_valid_instance(const fs::path& path) {
  dspopt::Instance instance = load_instance(path);
  const dspopt::ValidationReport report = dspopt::validate(instance);
  if (!report.pass()) {
    std::string msg = path.string() + " failed validation:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw dspopt::InputError(msg);
  }
  return instance;
}

struct GenerateArgs {
  std::string preset;
  dspopt::GeneratorConfig config;
  std::string budget_mode = "constant";
  bool types_set = false, campaigns_set = false, budget_set = false;
  std::string out;
  bool force = false;
};

void run_generate(GenerateArgs& args, CLI::App* cmd) {
  dspopt::GeneratorConfig config;
  if (args.preset == "example-a") {
    config = dspopt::example_a_config(args.config.seed);
  } else if (args.preset == "example-b") {
    config = dspopt::example_b_config(args.config.seed);
  } else if (args.preset == "sweep") {
    config = dspopt::sweep_base_config(args.config.seed, 50.0);
  } else if (!args.preset.empty()) {
    throw dspopt::InputError("unknown preset \"" + args.preset + "\"");
  } else {
    config.seed = args.config.seed;
  }
  if (cmd->count("--types")) config.n_impression_types = args.config.n_impression_types;
  if (cmd->count("--campaigns")) config.n_campaigns = args.config.n_campaigns;
  if (cmd->count("--market-size")) config.market_size = args.config.market_size;
  if (cmd->count("--supply")) config.supply = args.config.supply;
  if (cmd->count("--cpc")) config.cpc = args.config.cpc;
  if (cmd->count("--budget")) config.budget = args.config.budget;
  if (cmd->count("--budget-mode")) {
    if (args.budget_mode == "constant") {
      config.budget_mode = dspopt::BudgetMode::kConstant;
    } else if (args.budget_mode == "quality-scaled") {
      config.budget_mode = dspopt::BudgetMode::kQualityScaled;
    } else {
      throw dspopt::InputError("unknown budget mode \"" + args.budget_mode + "\"");
    }
  }

  const dspopt::GeneratedInstance generated = dspopt::generate(config);
  const dspopt::ValidationReport report = dspopt::validate(generated.instance);
  if (!report.pass()) throw dspopt::InternalError("generated instance failed validation");

  write_file(args.out, dspopt::instance_to_json(generated.instance).dump(2) + "\n",
             args.force);
  write_file(sidecar_path(args.out),
             dspopt::quality_sidecar_json(generated).dump(2) + "\n", args.force);
  log_info("wrote " + args.out + " (" +
           std::to_string(dspopt::edge_count(generated.instance)) + " edges)");
}

struct SolveArgs {
  std::string instance_path;
  std::string out;
  std::string dual_trace;
  dspopt::SolverConfig solver;
  bool force = false;
};

void run_solve(const SolveArgs& args) {
  const dspopt::Instance instance = load_valid_instance(args.instance_path);
  dspopt::TwoPhaseConfig config;
  config.dual = args.solver;
  dspopt::DualState dual_state;
  const dspopt::PlanSolution plan = dspopt::two_phase(instance, config, &dual_state);

  std::printf("primal=%.10g dual_bound=%.10g gap=%.10g gap_abs=%.10g\n", plan.primal_value,
              plan.dual_bound, plan.gap, plan.gap_absolute);
  write_file(args.out, dspopt::plan_to_json(instance, plan).dump(2) + "\n", args.force);

  if (!args.dual_trace.empty()) {
    std::ostringstream csv;
    csv << "iteration,dual_value,step_size,subgradient_norm\n";
    for (const auto& row : dual_state.trajectory) {
      csv << row.iteration << ',' << dspopt::format_double(row.dual_value) << ','
          << dspopt::format_double(row.step_size) << ','
          << dspopt::format_double(row.subgradient_norm) << '\n';
    }
    write_file(args.dual_trace, csv.str(), args.force);
  }
}

struct SimulateArgs {
  std::string instance_path;
  std::string plan_path;
  int runs = 500;
  std::uint64_t base_seed = 0;
  int workers = 1;
  std::string out_prefix;
  bool force = false;
};

void run_simulate(const SimulateArgs& args) {
  const dspopt::Instance instance = load_valid_instance(args.instance_path);
  const dspopt::json plan_doc = dspopt::json::parse(read_file(args.plan_path));
  const dspopt::PlanSolution plan = dspopt::plan_from_json(instance, plan_doc);

  const dspopt::ExperimentResult result =
      dspopt::paired_experiment(instance, plan, args.runs, args.base_seed, args.workers);

  std::ostringstream csv;
  dspopt::write_runs_csv(csv, result.records);
  write_file(args.out_prefix + ".runs.csv", csv.str(), args.force);
  write_file(args.out_prefix + ".summary.json",
             dspopt::report_to_json(result.report).dump(2) + "\n", args.force);

  std::printf("runs=%d relative_profit=%.6g relative_cost=%.6g relative_revenue=%.6g\n",
              result.report.runs, result.report.relative_profit.mean,
              result.report.relative_cost.mean, result.report.relative_revenue.mean);
}

struct SweepArgs {
  std::uint64_t seed = 0;
  std::vector<double> budgets = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
  int runs = 500;
  std::uint64_t base_seed = 0;
  int workers = 1;
  dspopt::SolverConfig solver;
  std::string out;
  bool force = false;
};

void run_sweep(const SweepArgs& args) {
  std::ostringstream csv;
  csv << "budget,mean_rel_profit,stderr\n";
  for (double budget : args.budgets) {
    const dspopt::GeneratedInstance generated =
        dspopt::generate(dspopt::sweep_base_config(args.seed, budget));
    dspopt::TwoPhaseConfig config;
    config.dual = args.solver;
    const dspopt::PlanSolution plan = dspopt::two_phase(generated.instance, config);
    const dspopt::ExperimentResult result = dspopt::paired_experiment(
        generated.instance, plan, args.runs, args.base_seed, args.workers);
    csv << dspopt::format_double(budget) << ','
        << dspopt::format_double(result.report.relative_profit.mean) << ','
        << dspopt::format_double(result.report.relative_profit.std_error) << '\n';
    log_info("budget " + dspopt::format_double(budget) + ": mean relative profit " +
             dspopt::format_double(result.report.relative_profit.mean));
  }
  write_file(args.out, csv.str(), args.force);
}

int run_validate(const std::string& path) {
  const dspopt::Instance instance = load_instance(path);
  const dspopt::ValidationReport report = dspopt::validate(instance);
  for (const auto& v : report.violations) std::printf("violation: %s\n", v.c_str());
  for (const auto& w : report.warnings) std::printf("warning: %s\n", w.c_str());
  if (!report.pass()) return 1;
  std::printf("ok: %zu impression types, %zu campaigns, %zu edges\n",
              instance.n_types(), instance.n_campaigns(), dspopt::edge_count(instance));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_log_level();
  CLI::App app{"Planner and simulator for demand-side platform bidding"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cmd_generate = app.add_subcommand("generate", "Generate a synthetic instance");
  cmd_generate->add_option("--preset", gen.preset,
                           "Named configuration: example-a, example-b, or sweep");
  cmd_generate->add_option("--seed", gen.config.seed, "Generator seed");
  cmd_generate->add_option("--types", gen.config.n_impression_types, "Impression types");
  cmd_generate->add_option("--campaigns", gen.config.n_campaigns, "Campaigns");
  cmd_generate->add_option("--market-size", gen.config.market_size, "Competing market size");
  cmd_generate->add_option("--supply", gen.config.supply, "Expected supply per type");
  cmd_generate->add_option("--cpc", gen.config.cpc, "Cost per click");
  cmd_generate->add_option("--budget", gen.config.budget, "Budget parameter");
  cmd_generate->add_option("--budget-mode", gen.budget_mode,
                           "constant or quality-scaled");
  cmd_generate->add_option("-o,--out", gen.out, "Instance file to write")->required();
  cmd_generate->add_flag("--force", gen.force, "Overwrite existing outputs");

  SolveArgs solve;
  CLI::App* cmd_solve = app.add_subcommand("solve", "Run the two-phase planner");
  cmd_solve->add_option("--instance", solve.instance_path, "Instance file")->required();
  cmd_solve->add_option("--max-iters", solve.solver.max_iters, "Subgradient iterations");
  cmd_solve->add_option("--step-scale", solve.solver.step_scale,
                        "Step-size scale (0 = automatic)");
  cmd_solve->add_option("--seed", solve.solver.seed, "Solver seed");
  cmd_solve->add_option("--dual-trace", solve.dual_trace,
                        "Optional CSV of the dual descent trajectory");
  cmd_solve->add_option("-o,--out", solve.out, "Plan file to write")->required();
  cmd_solve->add_flag("--force", solve.force, "Overwrite existing outputs");

  SimulateArgs sim;
  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "Paired policy simulation on a solved plan");
  cmd_simulate->add_option("--instance", sim.instance_path, "Instance file")->required();
  cmd_simulate->add_option("--plan", sim.plan_path, "Plan file")->required();
  cmd_simulate->add_option("--runs", sim.runs, "Number of paired simulation runs");
  cmd_simulate->add_option("--base-seed", sim.base_seed, "Base seed; run r uses base+r");
  cmd_simulate->add_option("--workers", sim.workers, "Worker threads");
  cmd_simulate->add_option("-o,--out", sim.out_prefix,
                           "Output prefix (<prefix>.runs.csv, <prefix>.summary.json)")
      ->required();
  cmd_simulate->add_flag("--force", sim.force, "Overwrite existing outputs");

  SweepArgs sweep;
  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "Budget sweep: generate, solve, simulate per level");
  cmd_sweep->add_option("--seed", sweep.seed, "Generator seed shared across levels");
  cmd_sweep->add_option("--budgets", sweep.budgets, "Budget levels");
  cmd_sweep->add_option("--runs", sweep.runs, "Paired runs per level");
  cmd_sweep->add_option("--base-seed", sweep.base_seed, "Simulation base seed");
  cmd_sweep->add_option("--workers", sweep.workers, "Worker threads");
  cmd_sweep->add_option("--max-iters", sweep.solver.max_iters, "Subgradient iterations");
  cmd_sweep->add_option("--step-scale", sweep.solver.step_scale,
                        "Step-size scale (0 = automatic)");
  cmd_sweep->add_option("-o,--out", sweep.out, "CSV file to write")->required();
  cmd_sweep->add_flag("--force", sweep.force, "Overwrite existing outputs");

  std::string validate_path;
  CLI::App* cmd_validate = app.add_subcommand("validate", "Check an instance file");
  cmd_validate->add_option("instance", validate_path, "Instance file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_generate->parsed()) run_generate(gen, cmd_generate);
    if (cmd_solve->parsed()) run_solve(solve);
    if (cmd_simulate->parsed()) run_simulate(sim);
    if (cmd_sweep->parsed()) run_sweep(sweep);
    if (cmd_validate->parsed()) return run_validate(validate_path);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
