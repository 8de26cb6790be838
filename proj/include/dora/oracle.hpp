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

#ifndef DORA_ORACLE_HPP_
#define DORA_ORACLE_HPP_

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dora/model.hpp"

namespace dora {

struct OracleResult {
  Allocation best_allocation;
  double best_value = 0.0;
  std::uint64_t nodes_explored = 0;
  bool complete = true;  // false once the exploration budget was exhausted
};

struct WinnerSetOracleResult {
  std::vector<std::size_t> winners;  // ascending ids
  double value = 0.0;
};

namespace detail {

struct ExactSearch {
  const ProblemInstance& inst;
  std::uint64_t budget;
  std::uint64_t explored = 0;
  bool complete = true;
  double best_value = 0.0;
  Allocation best;
  Allocation current;
  std::vector<ResourceVector> residual;
  std::vector<double> optimistic;  // per-orchestrator utility upper bound
  std::vector<double> suffix_bound;

  explicit ExactSearch(const ProblemInstance& i, std::uint64_t b)
      : inst(i), budget(b), best(Allocation::zeros(i)),
        current(Allocation::zeros(i)), residual(i.capacity) {
    optimistic.assign(inst.n_orchestrators, 0.0);
    for (std::size_t o = 0; o < inst.n_orchestrators; ++o)
      for (std::size_t m : inst.bundle_services(o)) {
        double bestu = 0.0;
        for (std::size_t j = 0; j < inst.n_functions; ++j) {
          if (!inst.implements[m][j]) continue;
          for (std::size_t n = 0; n < inst.n_nodes; ++n)
            bestu = std::max(bestu, inst.base_utility[o][j][n]);
        }
        optimistic[o] += bestu;
      }
    suffix_bound.assign(inst.n_orchestrators + 1, 0.0);
    for (std::size_t o = inst.n_orchestrators; o-- > 0;)
      suffix_bound[o] = suffix_bound[o + 1] + optimistic[o];
  }

  bool tick() {
    if (explored >= budget) {
      complete = false;
      return false;
    }
    ++explored;
    return true;
  }

  void maybe_record(double value) {
    if (value > best_value + 1e-12) {
      best_value = value;
      best = current;
      best.refresh_y();
    }
  }

  // Enumerate complete embeddings of orchestrator o, one distinct function
  // per bundle service, then recurse to the next orchestrator.
  void place_services(std::size_t o, const std::vector<std::size_t>& services,
                      std::size_t depth, std::vector<std::uint8_t>& fn_used,
                      double value) {
    if (!complete) return;
    if (depth == services.size()) {
      next_orchestrator(o + 1, value);
      return;
    }
    if (!tick()) return;
    std::size_t m = services[depth];
    for (std::size_t j = 0; j < inst.n_functions; ++j) {
      if (!inst.implements[m][j] || fn_used[j]) continue;
      for (std::size_t n = 0; n < inst.n_nodes; ++n) {
        bool fits = true;
        for (std::size_t k = 0; k < inst.n_resources; ++k)
          if (inst.cost[j][k] > residual[n][k]) { fits = false; break; }
        if (!fits) continue;
        for (std::size_t k = 0; k < inst.n_resources; ++k)
          residual[n][k] -= inst.cost[j][k];
        fn_used[j] = 1;
        current.x[o][j][n] = 1;
        place_services(o, services, depth + 1, fn_used,
                       value + inst.base_utility[o][j][n]);
        current.x[o][j][n] = 0;
        fn_used[j] = 0;
        for (std::size_t k = 0; k < inst.n_resources; ++k)
          residual[n][k] += inst.cost[j][k];
      }
    }
  }

  void next_orchestrator(std::size_t o, double value) {
    if (!complete) return;
    if (value + suffix_bound[o] <= best_value + 1e-12) return;
    if (o == inst.n_orchestrators) {
      maybe_record(value);
      return;
    }
    std::vector<std::size_t> services = inst.bundle_services(o);
    std::vector<std::uint8_t> fn_used(inst.n_functions, 0);
    place_services(o, services, 0, fn_used, value);
    // y_o = 0: skip this orchestrator entirely.
    next_orchestrator(o + 1, value);
  }
};

}  // namespace detail

// Exhaustive branch-and-bound over per-orchestrator bundle embeddings.
// Exact at desk scale (neutral policy); exceeding the budget is reported
// through the `complete` flag, never silently.
inline OracleResult solve_exact(const ProblemInstance& inst,
                                std::uint64_t budget = 50'000'000) {
  detail::ExactSearch search(inst, budget);
  search.next_orchestrator(0, 0.0);
  OracleResult res;
  res.best_allocation = search.best;
  res.best_value = search.best_value;
  res.nodes_explored = search.explored;
  res.complete = search.complete;
  return res;
}

// Maximum-vote capacity-feasible subset by subset enumeration; ties break
// toward the lexicographically smallest id set.
inline WinnerSetOracleResult max_weight_winner_set(
    const std::vector<double>& votes,
    const std::vector<ResourceVector>& demands,
    const ResourceVector& capacity) {
  const std::size_t n = votes.size();
  if (demands.size() != n)
    throw std::invalid_argument("votes/demands size mismatch");
  if (n > 25) throw std::invalid_argument("too many candidates for enumeration");

  WinnerSetOracleResult best;  // empty set, value 0
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    double value = 0.0;
    ResourceVector used(capacity.size(), 0);
    bool feasible = true;
    for (std::size_t i = 0; i < n && feasible; ++i) {
      if (!(mask >> i & 1)) continue;
      value += votes[i];
      for (std::size_t k = 0; k < capacity.size(); ++k) {
        used[k] += demands[i][k];
        if (used[k] > capacity[k]) { feasible = false; break; }
      }
    }
    if (!feasible) continue;
    if (value > best.value + kValueTol) {
      best.value = value;
      best.winners.clear();
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1) best.winners.push_back(i);
    } else if (value > best.value - kValueTol) {
      std::vector<std::size_t> ids;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1) ids.push_back(i);
      if (std::lexicographical_compare(ids.begin(), ids.end(),
                                       best.winners.begin(),
                                       best.winners.end()))
        best.winners = ids;
    }
  }
  return best;
}

}  // namespace dora

#endif  // DORA_ORACLE_HPP_
