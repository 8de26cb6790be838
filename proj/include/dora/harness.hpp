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

#ifndef DORA_HARNESS_HPP_
#define DORA_HARNESS_HPP_

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "dora/model.hpp"
#include "dora/oracle.hpp"
#include "dora/simnet.hpp"

namespace dora {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string name;
  ProblemInstance inst;
  std::vector<std::string> resource_names;
  std::vector<std::string> node_names;
  std::vector<std::string> function_names;
  std::vector<std::string> service_names;
  std::vector<std::string> orchestrator_names;
  EmbeddingPolicy policy;
  Topology::Kind topology_kind = Topology::Kind::kComplete;
  std::uint64_t topology_seed = 0;
  ChannelModel channel;
  FailurePlan failures;
  SimMode mode = SimMode::kSync;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 10'000;
  ElectMode elect_mode = ElectMode::kGreedy;
  std::size_t enum_depth = 3;
};

struct MetricsRecord {
  std::uint64_t seed = 0;
  std::size_t n_orchestrators = 0;
  std::size_t n_nodes = 0;
  std::string policy;
  std::string mode;
  bool converged = false;
  std::size_t iterations = 0;
  std::uint64_t messages_raw = 0;
  std::uint64_t messages_mst = 0;
  double allocation_ratio = 0.0;
  double dora_utility = 0.0;
  std::optional<double> oracle_utility;
  std::optional<double> utility_ratio;
  // Deterministic cost proxy (simulated time), so CSV output is
  // byte-identical across reruns; real wall time is never serialized.
  std::uint64_t wallclock_ms = 0;
};

namespace detail {

inline std::size_t index_of(const std::vector<std::string>& names,
                            const std::string& name, const char* what) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw ScenarioError(std::string("unresolved ") + what + " \"" + name + "\"");
}

inline Topology::Kind topology_kind_from(const std::string& s) {
  if (s == "line") return Topology::Kind::kLine;
  if (s == "ring") return Topology::Kind::kRing;
  if (s == "star") return Topology::Kind::kStar;
  if (s == "complete") return Topology::Kind::kComplete;
  if (s == "random-connected") return Topology::Kind::kRandomConnected;
  throw ScenarioError("unknown topology kind \"" + s + "\"");
}

inline PolicyKind policy_kind_from(const std::string& s) {
  if (s == "neutral") return PolicyKind::kNeutral;
  if (s == "single-node" || s == "single-node-preferred")
    return PolicyKind::kSingleNodePreferred;
  if (s == "spread" || s == "spread-preferred")
    return PolicyKind::kSpreadPreferred;
  throw ScenarioError("unknown policy kind \"" + s + "\"");
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j,
                                   const std::string& where = "<inline>") {
  auto fail = [&](const std::string& msg) -> ScenarioError {
    return ScenarioError(where + ": " + msg);
  };
  try {
    Scenario s;
    s.name = j.value("name", "unnamed");

    for (const auto& r : j.at("resources"))
      s.resource_names.push_back(r.get<std::string>());
    for (const auto& sv : j.at("services"))
      s.service_names.push_back(sv.get<std::string>());

    ProblemInstance& inst = s.inst;
    inst.n_resources = s.resource_names.size();
    inst.n_services = s.service_names.size();

    for (const auto& node : j.at("nodes")) {
      s.node_names.push_back(node.at("name").get<std::string>());
      ResourceVector cap(inst.n_resources, 0);
      for (const auto& [key, val] : node.at("capacity").items())
        cap[detail::index_of(s.resource_names, key, "resource")] =
            val.get<ResourceAmount>();
      inst.capacity.push_back(cap);
    }
    inst.n_nodes = s.node_names.size();

    for (const auto& fn : j.at("functions")) {
      s.function_names.push_back(fn.at("name").get<std::string>());
      ResourceVector cost(inst.n_resources, 0);
      for (const auto& [key, val] : fn.at("cost").items())
        cost[detail::index_of(s.resource_names, key, "resource")] =
            val.get<ResourceAmount>();
      inst.cost.push_back(cost);
    }
    inst.n_functions = s.function_names.size();

    inst.implements.assign(
        inst.n_services, std::vector<std::uint8_t>(inst.n_functions, 0));
    for (std::size_t f = 0; f < inst.n_functions; ++f)
      for (const auto& sv : j.at("functions")[f].at("implements")) {
        std::size_t m = detail::index_of(s.service_names,
                                         sv.get<std::string>(), "service");
        inst.implements[m][f] = 1;
      }

    for (const auto& orch : j.at("orchestrators"))
      s.orchestrator_names.push_back(orch.at("name").get<std::string>());
    inst.n_orchestrators = s.orchestrator_names.size();
    inst.bundle.assign(inst.n_orchestrators,
                       std::vector<std::uint8_t>(inst.n_services, 0));
    inst.base_utility.assign(
        inst.n_orchestrators,
        std::vector<std::vector<double>>(inst.n_functions,
                                         std::vector<double>(inst.n_nodes, 0)));
    for (std::size_t i = 0; i < inst.n_orchestrators; ++i) {
      const auto& orch = j.at("orchestrators")[i];
      for (const auto& sv : orch.at("bundle")) {
        std::size_t m = detail::index_of(s.service_names,
                                         sv.get<std::string>(), "service");
        inst.bundle[i][m] = 1;
      }
      // Utility keys: "fn@node" for one placement, "fn" for every node.
      for (const auto& [key, val] : orch.at("utility").items()) {
        double u = val.get<double>();
        auto at = key.find('@');
        if (at == std::string::npos) {
          std::size_t f = detail::index_of(s.function_names, key, "function");
          for (std::size_t n = 0; n < inst.n_nodes; ++n)
            inst.base_utility[i][f][n] = u;
        } else {
          std::size_t f = detail::index_of(s.function_names, key.substr(0, at),
                                           "function");
          std::size_t n = detail::index_of(s.node_names, key.substr(at + 1),
                                           "node");
          inst.base_utility[i][f][n] = u;
        }
      }
    }

    if (j.contains("policy")) {
      s.policy.kind = detail::policy_kind_from(
          j.at("policy").value("kind", std::string("neutral")));
      s.policy.weight = j.at("policy").value("weight", 0.5);
    }
    if (j.contains("topology")) {
      s.topology_kind = detail::topology_kind_from(
          j.at("topology").value("kind", std::string("complete")));
      s.topology_seed = j.at("topology").value("seed", 0ull);
    }
    if (j.contains("channel")) {
      const auto& c = j.at("channel");
      s.channel.base_delay = c.value("base_delay", 1.0);
      s.channel.jitter = c.value("jitter", 0.0);
      s.channel.drop_probability = c.value("drop_probability", 0.0);
      s.channel.retransmit_timeout = c.value("retransmit_timeout", 5.0);
    }
    if (j.contains("failures"))
      for (const auto& f : j.at("failures"))
        s.failures.crashes.emplace_back(
            detail::index_of(s.orchestrator_names,
                             f.at("orchestrator").get<std::string>(),
                             "orchestrator"),
            f.at("time").get<double>());
    std::string mode = j.value("mode", std::string("sync"));
    if (mode == "sync") s.mode = SimMode::kSync;
    else if (mode == "async") s.mode = SimMode::kAsync;
    else throw fail("unknown mode \"" + mode + "\"");
    s.seed = j.value("seed", 0ull);
    s.max_iterations = j.value("max_iterations", std::size_t{10'000});
    if (j.contains("election")) {
      std::string em = j.at("election").value("mode", std::string("greedy"));
      if (em == "greedy") s.elect_mode = ElectMode::kGreedy;
      else if (em == "partial-enumeration")
        s.elect_mode = ElectMode::kPartialEnumeration;
      else throw fail("unknown election mode \"" + em + "\"");
      s.enum_depth = j.at("election").value("depth", std::size_t{3});
    }

    auto defects = validate_instance(s.inst);
    if (!defects.empty()) {
      std::string msg = "instance validation failed:";
      for (const auto& d : defects) msg += "\n  - " + d.what;
      throw fail(msg);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(path + ": parse error: " + e.what());
  }
  return scenario_from_json(j, path);
}

inline std::vector<OrchestratorAgent> make_agents(const Scenario& scn) {
  std::vector<OrchestratorAgent> agents;
  agents.reserve(scn.inst.n_orchestrators);
  for (std::size_t i = 0; i < scn.inst.n_orchestrators; ++i)
    agents.emplace_back(i, scn.inst, scn.policy, scn.elect_mode,
                        scn.enum_depth);
  return agents;
}

// Builds the final global allocation from the agreed winner sets and the
// winning agents' private assignment vectors.
inline Allocation final_allocation(const Scenario& scn,
                                   const std::vector<OrchestratorAgent>& agents,
                                   const ConsensusView& view,
                                   const std::vector<std::size_t>& live) {
  Allocation alloc = Allocation::zeros(scn.inst);
  for (std::size_t i : live) {
    const OrchestratorAgent& a = agents[i];
    if (a.conceded() || a.assignment_placements().empty()) continue;
    bool all_won = true;
    for (const Placement& p : a.assignment_placements())
      if (!view.outcome.won(i, p.node)) { all_won = false; break; }
    if (!all_won) continue;
    for (const Placement& p : a.assignment_placements())
      alloc.x[i][p.fn][p.node] = 1;
  }
  alloc.refresh_y();
  return alloc;
}

inline MetricsRecord run_experiment(const Scenario& scn, bool with_oracle,
                                    SimTrace* trace_out = nullptr) {
  Topology topo = Topology::make(scn.topology_kind, scn.inst.n_orchestrators,
                                 scn.topology_seed);
  std::vector<OrchestratorAgent> agents = make_agents(scn);
  SimTrace trace = run(agents, topo, scn.channel, scn.failures, scn.mode,
                       scn.max_iterations, scn.seed);

  MetricsRecord rec;
  rec.seed = scn.seed;
  rec.n_orchestrators = scn.inst.n_orchestrators;
  rec.n_nodes = scn.inst.n_nodes;
  rec.policy = to_string(scn.policy.kind);
  rec.mode = scn.mode == SimMode::kSync ? "sync" : "async";
  rec.converged = trace.converged;
  rec.iterations = trace.iterations;
  rec.messages_raw = trace.messages_raw;
  rec.messages_mst = trace.messages_mst;
  rec.wallclock_ms = static_cast<std::uint64_t>(trace.virtual_time);

  ConsensusView view = consensus_view(agents, trace.live_agents, scn.inst,
                                      scn.elect_mode, scn.enum_depth);
  Allocation alloc = final_allocation(scn, agents, view, trace.live_agents);
  if (trace.converged) {
    FeasibilityReport report = check_feasibility(scn.inst, alloc);
    if (!report.feasible())
      throw std::logic_error(
          "converged run produced an infeasible allocation (protocol bug)");
  }
  std::size_t allocated = 0;
  for (std::size_t i = 0; i < scn.inst.n_orchestrators; ++i)
    if (alloc.y[i]) ++allocated;
  rec.allocation_ratio = scn.inst.n_orchestrators == 0
                             ? 0.0
                             : static_cast<double>(allocated) /
                                   static_cast<double>(scn.inst.n_orchestrators);
  rec.dora_utility = global_utility(scn.inst, alloc);

  if (with_oracle) {
    OracleResult oracle = solve_exact(scn.inst);
    rec.oracle_utility = oracle.best_value;
    if (oracle.best_value > kValueTol)
      rec.utility_ratio = rec.dora_utility / oracle.best_value;
  }
  if (trace_out) *trace_out = std::move(trace);
  return rec;
}

inline const char* kCsvHeader =
    "seed,n_orchestrators,n_nodes,policy,mode,converged,iterations,"
    "messages_raw,messages_mst,allocation_ratio,dora_utility,oracle_utility,"
    "utility_ratio,wallclock_ms";

inline void write_csv(std::ostream& out,
                      const std::vector<MetricsRecord>& records) {
  out << kCsvHeader << "\n";
  for (const MetricsRecord& r : records) {
    out << r.seed << ',' << r.n_orchestrators << ',' << r.n_nodes << ','
        << r.policy << ',' << r.mode << ',' << (r.converged ? 1 : 0) << ','
        << r.iterations << ',' << r.messages_raw << ',' << r.messages_mst
        << ',' << detail::fmt_double(r.allocation_ratio) << ','
        << detail::fmt_double(r.dora_utility) << ',';
    if (r.oracle_utility) out << detail::fmt_double(*r.oracle_utility);
    out << ',';
    if (r.utility_ratio) out << detail::fmt_double(*r.utility_ratio);
    out << ',' << r.wallclock_ms << "\n";
  }
}

inline void write_trace(std::ostream& out, const SimTrace& trace) {
  for (const IterationRecord& rec : trace.records) {
    nlohmann::json j;
    j["iteration"] = rec.iteration;
    j["agent_digests"] = rec.agent_digests;
    j["messages_sent_total"] = rec.messages_sent_total;
    j["messages_delivered_total"] = rec.messages_delivered_total;
    j["quiescent"] = rec.quiescent;
    out << j.dump() << "\n";
  }
}

struct SweepSpec {
  std::size_t orchestrators_min = 2;
  std::size_t orchestrators_max = 2;
  std::vector<PolicyKind> policies = {PolicyKind::kNeutral};
  std::size_t n_seeds = 1;
  bool with_oracle = false;
};

// Derives a scenario with `n_orch` randomly generated orchestrators from the
// template's infrastructure (nodes, functions, services). Deterministic in
// (template, n_orch, seed).
inline Scenario derive_scenario(const Scenario& templ, std::size_t n_orch,
                                PolicyKind policy, std::uint64_t seed) {
  Scenario s = templ;
  s.seed = seed;
  s.policy.kind = policy;
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + n_orch);
  std::uniform_real_distribution<double> util(3.0, 7.0);
  const ProblemInstance& base = templ.inst;
  ProblemInstance& inst = s.inst;
  inst.n_orchestrators = n_orch;
  s.orchestrator_names.clear();
  inst.bundle.assign(n_orch, std::vector<std::uint8_t>(base.n_services, 0));
  inst.base_utility.assign(
      n_orch, std::vector<std::vector<double>>(
                  base.n_functions, std::vector<double>(base.n_nodes, 0.0)));
  std::size_t max_len = std::min<std::size_t>(4, base.n_services);
  std::uniform_int_distribution<std::size_t> len_dist(
      std::min<std::size_t>(3, max_len), max_len);
  for (std::size_t i = 0; i < n_orch; ++i) {
    s.orchestrator_names.push_back("g" + std::to_string(i));
    std::size_t len = len_dist(rng);
    std::vector<std::size_t> services(base.n_services);
    for (std::size_t m = 0; m < base.n_services; ++m) services[m] = m;
    std::shuffle(services.begin(), services.end(), rng);
    for (std::size_t m = 0; m < len; ++m) inst.bundle[i][services[m]] = 1;
    for (std::size_t j = 0; j < base.n_functions; ++j)
      for (std::size_t n = 0; n < base.n_nodes; ++n)
        inst.base_utility[i][j][n] = util(rng);
  }
  return s;
}

inline std::vector<MetricsRecord> sweep(const Scenario& templ,
                                        const SweepSpec& spec) {
  std::vector<MetricsRecord> records;
  for (std::size_t n = spec.orchestrators_min; n <= spec.orchestrators_max; ++n)
    for (PolicyKind policy : spec.policies)
      for (std::uint64_t seed = 1; seed <= spec.n_seeds; ++seed) {
        Scenario scn = derive_scenario(templ, n, policy, seed);
        records.push_back(run_experiment(scn, spec.with_oracle));
      }
  return records;
}

}  // namespace dora

#endif  // DORA_HARNESS_HPP_
