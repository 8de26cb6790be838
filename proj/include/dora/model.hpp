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

#ifndef DORA_MODEL_HPP_
#define DORA_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dora {

// Absolute tolerance for all utility / density comparisons.
inline constexpr double kValueTol = 1e-9;

using ResourceAmount = std::int64_t;
using ResourceVector = std::vector<ResourceAmount>;

// Assignment matrix x_i of one orchestrator: [function][node].
using AssignmentMatrix = std::vector<std::vector<std::uint8_t>>;

// The orchestrator-resources assignment instance: orchestrators place
// bundles of services, implemented by functions with per-resource costs,
// onto capacity-limited nodes.
struct ProblemInstance {
  std::size_t n_orchestrators = 0;
  std::size_t n_services = 0;
  std::size_t n_functions = 0;
  std::size_t n_nodes = 0;
  std::size_t n_resources = 0;

  // cost[j][k]: resource-k cost of function j.
  std::vector<ResourceVector> cost;
  // capacity[n][k]: resource-k capacity of node n.
  std::vector<ResourceVector> capacity;
  // implements[m][j]: function j can implement service m.
  std::vector<std::vector<std::uint8_t>> implements;
  // bundle[i][m]: service m is in orchestrator i's bundle.
  std::vector<std::vector<std::uint8_t>> bundle;
  // base_utility[i][j][n]: assignment-independent utility of placing
  // function j on node n for orchestrator i.
  std::vector<std::vector<std::vector<double>>> base_utility;

  std::size_t bundle_size(std::size_t i) const {
    std::size_t s = 0;
    for (std::uint8_t b : bundle[i]) s += b;
    return s;
  }

  std::vector<std::size_t> bundle_services(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t m = 0; m < n_services; ++m)
      if (bundle[i][m]) out.push_back(m);
    return out;
  }
};

struct Allocation {
  // x[i][j][n]
  std::vector<AssignmentMatrix> x;
  // y[i] = 1 iff any x[i][j][n] = 1 (derived).
  std::vector<std::uint8_t> y;

  static Allocation zeros(const ProblemInstance& inst) {
    Allocation a;
    a.x.assign(inst.n_orchestrators,
               AssignmentMatrix(inst.n_functions,
                                std::vector<std::uint8_t>(inst.n_nodes, 0)));
    a.y.assign(inst.n_orchestrators, 0);
    return a;
  }

  void refresh_y() {
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::uint8_t any = 0;
      for (const auto& row : x[i])
        for (std::uint8_t v : row) any |= v;
      y[i] = any;
    }
  }
};

enum class ConstraintId {
  kCapacity,        // per-node, per-resource capacity
  kBundleSize,      // assigned function count equals bundle size
  kBundleCoverage,  // every bundle service covered by an assigned function
  kSingleInstance,  // a function instance sits on at most one node
};

inline const char* to_string(ConstraintId id) {
  switch (id) {
    case ConstraintId::kCapacity: return "capacity";
    case ConstraintId::kBundleSize: return "bundle-size";
    case ConstraintId::kBundleCoverage: return "bundle-coverage";
    case ConstraintId::kSingleInstance: return "single-instance";
  }
  return "?";
}

struct Violation {
  ConstraintId id;
  std::vector<std::size_t> where;  // offending indices, meaning depends on id
};

struct FeasibilityReport {
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
};

// A structural problem with an instance. Defects are data, not failures.
struct Defect {
  std::string what;
};

namespace detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void check_dimensions(const ProblemInstance& inst,
                             const Allocation& alloc) {
  require(alloc.x.size() == inst.n_orchestrators &&
              alloc.y.size() == inst.n_orchestrators,
          "allocation orchestrator dimension mismatch");
  for (const auto& xi : alloc.x) {
    require(xi.size() == inst.n_functions,
            "allocation function dimension mismatch");
    for (const auto& row : xi)
      require(row.size() == inst.n_nodes,
              "allocation node dimension mismatch");
  }
}

}  // namespace detail

inline std::vector<Defect> validate_instance(const ProblemInstance& inst) {
  std::vector<Defect> defects;
  auto defect = [&](const std::string& msg) { defects.push_back({msg}); };

  auto dims = [&](const char* name, std::size_t got, std::size_t want) {
    if (got != want) {
      std::ostringstream os;
      os << name << " has " << got << " rows, expected " << want;
      defect(os.str());
      return false;
    }
    return true;
  };

  bool ok = true;
  ok &= dims("cost", inst.cost.size(), inst.n_functions);
  ok &= dims("capacity", inst.capacity.size(), inst.n_nodes);
  ok &= dims("implements", inst.implements.size(), inst.n_services);
  ok &= dims("bundle", inst.bundle.size(), inst.n_orchestrators);
  ok &= dims("base_utility", inst.base_utility.size(), inst.n_orchestrators);
  if (!ok) return defects;

  for (std::size_t j = 0; j < inst.n_functions; ++j) {
    if (inst.cost[j].size() != inst.n_resources) {
      defect("cost row " + std::to_string(j) + " has wrong width");
      return defects;
    }
    for (std::size_t k = 0; k < inst.n_resources; ++k)
      if (inst.cost[j][k] < 0) {
        std::ostringstream os;
        os << "negative cost at (" << j << "," << k << ")";
        defect(os.str());
      }
  }
  for (std::size_t n = 0; n < inst.n_nodes; ++n) {
    if (inst.capacity[n].size() != inst.n_resources) {
      defect("capacity row " + std::to_string(n) + " has wrong width");
      return defects;
    }
    for (std::size_t k = 0; k < inst.n_resources; ++k)
      if (inst.capacity[n][k] < 0) {
        std::ostringstream os;
        os << "negative capacity at (" << n << "," << k << ")";
        defect(os.str());
      }
  }
  for (std::size_t m = 0; m < inst.n_services; ++m) {
    if (inst.implements[m].size() != inst.n_functions) {
      defect("implements row " + std::to_string(m) + " has wrong width");
      return defects;
    }
    bool any = false;
    for (std::uint8_t b : inst.implements[m]) any |= b != 0;
    if (!any)
      defect("service " + std::to_string(m) + " has no implementing function");
  }
  for (std::size_t i = 0; i < inst.n_orchestrators; ++i) {
    if (inst.bundle[i].size() != inst.n_services) {
      defect("bundle row " + std::to_string(i) + " has wrong width");
      return defects;
    }
    if (inst.bundle_size(i) == 0)
      defect("orchestrator " + std::to_string(i) + " has an empty bundle");
    if (inst.base_utility[i].size() != inst.n_functions) {
      defect("base_utility row " + std::to_string(i) + " has wrong shape");
      return defects;
    }
    for (std::size_t j = 0; j < inst.n_functions; ++j) {
      if (inst.base_utility[i][j].size() != inst.n_nodes) {
        defect("base_utility row " + std::to_string(i) + " has wrong shape");
        return defects;
      }
      for (double u : inst.base_utility[i][j])
        if (u < 0.0) {
          std::ostringstream os;
          os << "negative utility for orchestrator " << i << " function " << j;
          defect(os.str());
          break;
        }
    }
  }
  return defects;
}

inline FeasibilityReport check_feasibility(const ProblemInstance& inst,
                                           const Allocation& alloc) {
  detail::check_dimensions(inst, alloc);
  FeasibilityReport report;

  // 1.2: per (n, k), sum of assigned costs within capacity.
  for (std::size_t n = 0; n < inst.n_nodes; ++n) {
    for (std::size_t k = 0; k < inst.n_resources; ++k) {
      ResourceAmount used = 0;
      for (std::size_t i = 0; i < inst.n_orchestrators; ++i)
        for (std::size_t j = 0; j < inst.n_functions; ++j)
          if (alloc.x[i][j][n]) used += inst.cost[j][k];
      if (used > inst.capacity[n][k])
        report.violations.push_back({ConstraintId::kCapacity, {n, k}});
    }
  }

  for (std::size_t i = 0; i < inst.n_orchestrators; ++i) {
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < inst.n_functions; ++j)
      for (std::size_t n = 0; n < inst.n_nodes; ++n) assigned += alloc.x[i][j][n];

    // 1.5: a function instance on at most one node.
    for (std::size_t j = 0; j < inst.n_functions; ++j) {
      std::size_t placed = 0;
      for (std::size_t n = 0; n < inst.n_nodes; ++n) placed += alloc.x[i][j][n];
      if (placed > 1)
        report.violations.push_back({ConstraintId::kSingleInstance, {i, j}});
    }

    if (!alloc.y[i]) continue;

    // 1.3: assigned function count equals bundle size.
    if (assigned != inst.bundle_size(i))
      report.violations.push_back({ConstraintId::kBundleSize, {i}});

    // 1.4: each bundle service covered by some assigned implementing function.
    for (std::size_t m = 0; m < inst.n_services; ++m) {
      if (!inst.bundle[i][m]) continue;
      bool covered = false;
      for (std::size_t j = 0; j < inst.n_functions && !covered; ++j) {
        if (!inst.implements[m][j]) continue;
        for (std::size_t n = 0; n < inst.n_nodes; ++n)
          if (alloc.x[i][j][n]) { covered = true; break; }
      }
      if (!covered)
        report.violations.push_back({ConstraintId::kBundleCoverage, {i, m}});
    }
  }
  return report;
}

// Hook modifying a single placement's utility; receives the owning
// orchestrator, its full assignment, the placement and the base value.
using UtilityHook = std::function<double(
    std::size_t orch, const AssignmentMatrix& xi, std::size_t fn,
    std::size_t node, double base)>;

inline double global_utility(const ProblemInstance& inst,
                             const Allocation& alloc,
                             const UtilityHook& hook = nullptr) {
  detail::check_dimensions(inst, alloc);
  double total = 0.0;
  for (std::size_t i = 0; i < inst.n_orchestrators; ++i)
    for (std::size_t j = 0; j < inst.n_functions; ++j)
      for (std::size_t n = 0; n < inst.n_nodes; ++n)
        if (alloc.x[i][j][n]) {
          double base = inst.base_utility[i][j][n];
          total += hook ? hook(i, alloc.x[i], j, n, base) : base;
        }
  return total;
}

}  // namespace dora

#endif  // DORA_MODEL_HPP_
