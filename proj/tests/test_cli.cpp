#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dspopt/instance.hpp"
#include "dspopt/primal.hpp"

namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "dspopt_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CommandResult run_cli(const std::string& args) {
  const fs::path out = work_dir() / "cmd_output.txt";
  const std::string cmd =
      std::string(DSPOPT_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream is(out);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return {WEXITSTATUS(status), buffer.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return buffer.str();
}

std::string path_of(const char* name) { return (work_dir() / name).string(); }

}  // namespace

TEST_CASE("generate writes a valid instance plus its quality sidecar") {
  const auto result =
      run_cli("generate --preset example-a --seed 7 -o " + path_of("a.json"));
  REQUIRE(result.exit_code == 0);

  const auto instance = dspopt::parse_instance_text(slurp(work_dir() / "a.json"));
  CHECK(dspopt::validate(instance).pass());
  CHECK(instance.n_types() == 100);

  const auto validate_run = run_cli("validate " + path_of("a.json"));
  CHECK(validate_run.exit_code == 0);
  CHECK(validate_run.output.find("ok:") != std::string::npos);
}

TEST_CASE("generate example-b budgets equal 50 * Q_k from the sidecar") {
  REQUIRE(run_cli("generate --preset example-b --seed 7 -o " + path_of("b.json"))
              .exit_code == 0);
  const auto instance = dspopt::parse_instance_text(slurp(work_dir() / "b.json"));
  const auto sidecar = dspopt::json::parse(slurp(work_dir() / "b.quality.json"));
  const auto q_k = sidecar.at("Q_k").get<std::vector<double>>();
  REQUIRE(q_k.size() == instance.n_campaigns());
  for (std::size_t k = 0; k < q_k.size(); ++k) {
    CHECK(instance.campaigns[k].budget == 50.0 * q_k[k]);
  }
}

TEST_CASE("generate usage and overwrite guards") {
  CHECK(run_cli("generate --preset example-a --seed 1").exit_code != 0);  // no -o
  const std::string target = path_of("guard.json");
  REQUIRE(run_cli("generate --preset sweep --seed 1 -o " + target).exit_code == 0);
  const auto clobber = run_cli("generate --preset sweep --seed 2 -o " + target);
  CHECK(clobber.exit_code != 0);
  CHECK(clobber.output.find("refusing to overwrite") != std::string::npos);
  CHECK(run_cli("generate --preset sweep --seed 2 -o " + target + " --force").exit_code ==
        0);
}

TEST_CASE("solve prints the gap and writes the plan") {
  // tiny instance so the whole pipeline stays fast
  REQUIRE(run_cli("generate --types 6 --campaigns 5 --supply 40 --budget 2 --seed 3 -o " +
                  path_of("small.json"))
              .exit_code == 0);
  const auto result = run_cli("solve --instance " + path_of("small.json") + " -o " +
                              path_of("small_plan.json") + " --max-iters 400 --dual-trace " +
                              path_of("small_trace.csv"));
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("primal=") != std::string::npos);
  CHECK(result.output.find("dual_bound=") != std::string::npos);
  CHECK(result.output.find("gap=") != std::string::npos);

  const auto instance = dspopt::parse_instance_text(slurp(work_dir() / "small.json"));
  const auto plan = dspopt::plan_from_json(
      instance, dspopt::json::parse(slurp(work_dir() / "small_plan.json")));
  CHECK(plan.primal_value <= plan.dual_bound + 1e-9);

  const std::string trace = slurp(work_dir() / "small_trace.csv");
  CHECK(trace.find("iteration,dual_value,step_size,subgradient_norm\n") == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 401);  // header + 400 rows
}

TEST_CASE("solve reaches a tiny gap when budgets never bind") {
  REQUIRE(run_cli("generate --types 5 --campaigns 4 --supply 30 --budget 100000 --seed 4"
                  " -o " +
                  path_of("rich.json"))
              .exit_code == 0);
  REQUIRE(run_cli("solve --instance " + path_of("rich.json") + " -o " +
                  path_of("rich_plan.json"))
              .exit_code == 0);
  const auto instance = dspopt::parse_instance_text(slurp(work_dir() / "rich.json"));
  const auto plan = dspopt::plan_from_json(
      instance, dspopt::json::parse(slurp(work_dir() / "rich_plan.json")));
  CHECK(plan.gap <= 1e-6);
}

TEST_CASE("solve rejects bad configs and bad files") {
  CHECK(run_cli("solve --instance " + path_of("small.json") + " -o " +
                path_of("zzz.json") + " --max-iters 0")
            .exit_code != 0);
  const auto missing = run_cli("solve --instance " + path_of("nope.json") + " -o " +
                               path_of("zzz.json"));
  CHECK(missing.exit_code != 0);
  CHECK(missing.output.find("error:") != std::string::npos);

  std::ofstream(work_dir() / "broken.json") << "{ not json";
  const auto broken = run_cli("solve --instance " + path_of("broken.json") + " -o " +
                              path_of("zzz.json"));
  CHECK(broken.exit_code != 0);
  CHECK(broken.output.find("parse error") != std::string::npos);
}

TEST_CASE("simulate is deterministic and rejects missing inputs") {
  REQUIRE(run_cli("generate --types 4 --campaigns 4 --supply 25 --budget 1.5 --seed 5 -o " +
                  path_of("sim.json"))
              .exit_code == 0);
  REQUIRE(run_cli("solve --instance " + path_of("sim.json") + " -o " +
                  path_of("sim_plan.json") + " --max-iters 200")
              .exit_code == 0);

  const std::string base = "simulate --instance " + path_of("sim.json") + " --plan " +
                           path_of("sim_plan.json") + " --runs 3 --base-seed 3 -o ";
  REQUIRE(run_cli(base + path_of("s1") + " --workers 1").exit_code == 0);
  REQUIRE(run_cli(base + path_of("s2") + " --workers 2").exit_code == 0);
  CHECK(slurp(work_dir() / "s1.runs.csv") == slurp(work_dir() / "s2.runs.csv"));
  CHECK(slurp(work_dir() / "s1.summary.json") == slurp(work_dir() / "s2.summary.json"));

  REQUIRE(run_cli(base + path_of("s3")).exit_code == 0);
  CHECK(slurp(work_dir() / "s1.runs.csv") == slurp(work_dir() / "s3.runs.csv"));

  const auto summary = dspopt::json::parse(slurp(work_dir() / "s1.summary.json"));
  CHECK(summary.contains("relative_profit"));
  CHECK(summary.at("runs") == 3);

  CHECK(run_cli("simulate --instance " + path_of("sim.json") + " --plan " +
                path_of("missing_plan.json") + " --runs 1 -o " + path_of("s4"))
            .exit_code != 0);
}

TEST_CASE("sweep emits one row per budget level") {
  const auto result = run_cli("sweep --seed 2 --budgets 5 50 --runs 2 --max-iters 150 -o " +
                              path_of("sweep.csv"));
  REQUIRE(result.exit_code == 0);
  const std::string csv = slurp(work_dir() / "sweep.csv");
  CHECK(csv.find("budget,mean_rel_profit,stderr\n") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  CHECK(run_cli("sweep --seed 2 --budgets 5 --runs 0 -o " + path_of("sweep0.csv"))
            .exit_code != 0);
}

TEST_CASE("DSPOPT_LOG raises the log level") {
  const fs::path out = work_dir() / "log_output.txt";
  const std::string cmd = "DSPOPT_LOG=info " + std::string(DSPOPT_CLI_PATH) +
                          " generate --types 3 --campaigns 3 --supply 5 --seed 2 -o " +
                          path_of("logged.json") + " --force > " + out.string() + " 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(slurp(out).find("info: wrote") != std::string::npos);

  // default level stays quiet
  const auto quiet = run_cli("generate --types 3 --campaigns 3 --supply 5 --seed 2 -o " +
                             path_of("logged.json") + " --force");
  CHECK(quiet.output.find("info:") == std::string::npos);
}

TEST_CASE("validate reports violations with a nonzero exit") {
  std::ofstream(work_dir() / "bad_instance.json") << R"({
    "impression_types": [{"id": "i0", "s": 1.0, "landscape": "L0"}],
    "campaigns": [{"id": "c0", "budget": -3.0, "cpc": 1.0, "targets": ["i0"]}],
    "edges": [{"i": "i0", "k": "c0", "ctr": 0.5}],
    "landscapes": [{"id": "L0", "kind": "binomial_max_uniform", "params": {"M": 1, "Q": 0.5}}]
  })";
  const auto result = run_cli("validate " + path_of("bad_instance.json"));
  CHECK(result.exit_code != 0);
  CHECK(result.output.find("negative budget") != std::string::npos);
}
