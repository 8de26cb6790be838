// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dora/harness.hpp"

namespace {

int cmd_check(const std::string& path) {
  try {
    dora::Scenario scn = dora::load_scenario(path);
    std::cout << "ok: " << scn.name << " (" << scn.inst.n_orchestrators
              << " orchestrators, " << scn.inst.n_nodes << " nodes, "
              << scn.inst.n_functions << " functions, " << scn.inst.n_services
              << " services)\n";
    return 0;
  } catch (const dora::ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return 1;
  }
}

int cmd_run(const std::string& path, std::uint64_t seed,
            const std::string& mode, bool with_oracle,
            const std::string& out_path, const std::string& trace_path) {
  dora::Scenario scn = dora::load_scenario(path);
  scn.seed = seed;
  if (mode == "sync") scn.mode = dora::SimMode::kSync;
  else if (mode == "async") scn.mode = dora::SimMode::kAsync;
  else if (!mode.empty()) {
    std::cerr << "unknown mode \"" << mode << "\"\n";
    return 1;
  }
  dora::SimTrace trace;
  dora::MetricsRecord rec = dora::run_experiment(scn, with_oracle, &trace);

  std::cout << "converged: " << (rec.converged ? "yes" : "no")
            << "\niterations: " << rec.iterations
            << "\nmessages (raw/mst): " << rec.messages_raw << "/"
            << rec.messages_mst
            << "\nallocation_ratio: " << rec.allocation_ratio
            << "\ndora_utility: " << rec.dora_utility << "\n";
  if (rec.oracle_utility)
    std::cout << "oracle_utility: " << *rec.oracle_utility << "\n";
  if (rec.utility_ratio)
    std::cout << "utility_ratio: " << *rec.utility_ratio << "\n";

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot write " << out_path << "\n";
      return 1;
    }
    dora::write_csv(out, {rec});
  }
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) {
      std::cerr << "cannot write " << trace_path << "\n";
      return 1;
    }
    dora::write_trace(out, trace);
  }
  return rec.converged ? 0 : 2;
}

int cmd_oracle(const std::string& path, std::uint64_t budget) {
  dora::Scenario scn = dora::load_scenario(path);
  dora::OracleResult res = dora::solve_exact(scn.inst, budget);
  std::cout << "optimum: " << res.best_value
            << (res.complete ? "" : " (incomplete: budget exhausted)")
            << "\nnodes_explored: " << res.nodes_explored << "\n";
  const dora::Allocation& a = res.best_allocation;
  for (std::size_t i = 0; i < scn.inst.n_orchestrators; ++i) {
    if (!a.y[i]) continue;
    std::cout << scn.orchestrator_names[i] << ":";
    for (std::size_t j = 0; j < scn.inst.n_functions; ++j)
      for (std::size_t n = 0; n < scn.inst.n_nodes; ++n)
        if (a.x[i][j][n])
          std::cout << " " << scn.function_names[j] << "@"
                    << scn.node_names[n];
    std::cout << "\n";
  }
  return res.complete ? 0 : 2;
}

int cmd_sweep(const std::string& path, const std::string& range,
              const std::vector<std::string>& policies, std::size_t seeds,
              const std::string& out_path, bool with_oracle) {
  dora::Scenario templ = dora::load_scenario(path);
  dora::SweepSpec spec;
  auto dots = range.find("..");
  if (dots == std::string::npos) {
    spec.orchestrators_min = spec.orchestrators_max = std::stoul(range);
  } else {
    spec.orchestrators_min = std::stoul(range.substr(0, dots));
    spec.orchestrators_max = std::stoul(range.substr(dots + 2));
  }
  spec.policies.clear();
  for (const std::string& p : policies)
    spec.policies.push_back(dora::detail::policy_kind_from(p));
  spec.n_seeds = seeds;
  spec.with_oracle = with_oracle;

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return 1;
  }
  std::vector<dora::MetricsRecord> records = dora::sweep(templ, spec);
  dora::write_csv(out, records);
  std::cout << records.size() << " rows -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DORA distributed orchestration-resource assignment simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  auto* check = app.add_subcommand("check", "validate a scenario file");
  check->add_option("scenario", scenario_path)->required();

  std::uint64_t seed = 0;
  std::string mode;
  bool with_oracle = false;
  std::string out_path, trace_path;
  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("scenario", scenario_path)->required();
  run->add_option("--seed", seed);
  run->add_option("--mode", mode)->check(CLI::IsMember({"sync", "async"}));
  run->add_flag("--oracle", with_oracle, "also solve exactly");
  run->add_option("--out", out_path, "metrics CSV path");
  run->add_option("--trace", trace_path, "NDJSON trace path");

  std::uint64_t budget = 50'000'000;
  auto* oracle = app.add_subcommand("oracle", "print the exact optimum");
  oracle->add_option("scenario", scenario_path)->required();
  oracle->add_option("--budget", budget, "node-exploration limit");

  std::string range = "2..2";
  std::vector<std::string> policies = {"neutral"};
  std::size_t seeds = 1;
  std::string sweep_out = "sweep.csv";
  auto* sweep = app.add_subcommand("sweep", "run a seeded experiment sweep");
  sweep->add_option("scenario", scenario_path)->required();
  sweep->add_option("--orchestrators", range, "range A..B");
  sweep->add_option("--policies", policies)->delimiter(',');
  sweep->add_option("--seeds", seeds);
  sweep->add_option("--out", sweep_out)->required();
  sweep->add_flag("--oracle", with_oracle);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(scenario_path);
    if (run->parsed())
      return cmd_run(scenario_path, seed, mode, with_oracle, out_path,
                     trace_path);
    if (oracle->parsed()) return cmd_oracle(scenario_path, budget);
    if (sweep->parsed())
      return cmd_sweep(scenario_path, range, policies, seeds, sweep_out,
                       with_oracle);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
