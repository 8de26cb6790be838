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

#ifndef DORA_EMBEDDING_HPP_
#define DORA_EMBEDDING_HPP_

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "dora/model.hpp"

namespace dora {

enum class PolicyKind {
  kNeutral,
  kSingleNodePreferred,
  kSpreadPreferred,
};

inline const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::kNeutral: return "neutral";
    case PolicyKind::kSingleNodePreferred: return "single-node";
    case PolicyKind::kSpreadPreferred: return "spread";
  }
  return "?";
}

struct EmbeddingPolicy {
  PolicyKind kind = PolicyKind::kNeutral;
  double weight = 0.5;
};

// One (function, node) placement of an assignment vector.
struct Placement {
  std::size_t fn = 0;
  std::size_t node = 0;
  auto operator<=>(const Placement&) const = default;
};

// Multiplies the base utility by a co-location (or anti-co-location) bonus
// relative to the placements already in the assignment. Never negative.
inline double policy_modifier(const EmbeddingPolicy& policy,
                              const std::vector<Placement>& placed,
                              const Placement& candidate, double base) {
  if (policy.kind == PolicyKind::kNeutral || placed.empty()) return base;
  std::size_t on_node = 0;
  for (const Placement& p : placed)
    if (p.node == candidate.node) ++on_node;
  double frac;
  if (policy.kind == PolicyKind::kSingleNodePreferred)
    frac = static_cast<double>(on_node) / static_cast<double>(placed.size());
  else
    frac = static_cast<double>(placed.size() - on_node) /
           static_cast<double>(placed.size());
  return base * (1.0 + policy.weight * frac);
}

// Everything an orchestrator remembers between embedding attempts: its view
// of residual capacities, which placements/nodes it gave up on, the density
// ceilings learned from lost elections, and the assignments already tried.
struct EmbeddingContext {
  std::vector<ResourceVector> residual;  // [n][k]
  std::set<Placement> excluded_pairs;
  std::set<std::size_t> excluded_nodes;
  std::map<std::size_t, double> lost_density_cap;  // node -> density ceiling
  std::set<std::vector<Placement>> tried;          // canonical placement sets

  static EmbeddingContext fresh(const ProblemInstance& inst) {
    EmbeddingContext ctx;
    ctx.residual = inst.capacity;
    return ctx;
  }
};

namespace detail {

struct EmbedSearch {
  const ProblemInstance& inst;
  EmbeddingContext& ctx;
  const EmbeddingPolicy& policy;
  std::vector<std::size_t> services;  // in embedding order
  std::vector<std::uint8_t> fn_used;
  std::vector<ResourceVector> residual;
  std::vector<Placement> placements;
  std::size_t orch;

  bool fits(const Placement& p) const {
    for (std::size_t k = 0; k < inst.n_resources; ++k)
      if (inst.cost[p.fn][k] > residual[p.node][k]) return false;
    return true;
  }

  void take(const Placement& p, int sign) {
    for (std::size_t k = 0; k < inst.n_resources; ++k)
      residual[p.node][k] -= sign * inst.cost[p.fn][k];
  }

  bool allowed(const Placement& p) const {
    return !fn_used[p.fn] && !ctx.excluded_nodes.count(p.node) &&
           !ctx.excluded_pairs.count(p);
  }

  // Depth-first in greedy preference order; the first complete assignment
  // not previously tried wins.
  bool dfs(std::size_t depth) {
    if (depth == services.size()) {
      std::vector<Placement> canon = placements;
      std::sort(canon.begin(), canon.end());
      if (ctx.tried.count(canon)) return false;
      ctx.tried.insert(canon);
      return true;
    }
    std::size_t m = services[depth];
    std::vector<std::pair<double, Placement>> cands;
    for (std::size_t j = 0; j < inst.n_functions; ++j) {
      if (!inst.implements[m][j]) continue;
      for (std::size_t n = 0; n < inst.n_nodes; ++n) {
        Placement p{j, n};
        if (!allowed(p) || !fits(p)) continue;
        cands.emplace_back(
            policy_modifier(policy, placements, p, inst.base_utility[orch][j][n]),
            p);
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
      if (a.first > b.first + kValueTol) return true;
      if (b.first > a.first + kValueTol) return false;
      return a.second < b.second;
    });
    for (const auto& [util, p] : cands) {
      fn_used[p.fn] = 1;
      take(p, +1);
      placements.push_back(p);
      if (dfs(depth + 1)) return true;
      placements.pop_back();
      take(p, -1);
      fn_used[p.fn] = 0;
    }
    return false;
  }
};

}  // namespace detail

// Builds the next assignment vector for one orchestrator's bundle, greedily
// maximizing the policy-modified utility service by service within the
// context's residual view. Returns the placements in construction order, or
// nullopt once every admissible assignment has been tried.
inline std::optional<std::vector<Placement>> embed(
    std::size_t orch, const ProblemInstance& inst, EmbeddingContext& ctx,
    const EmbeddingPolicy& policy) {
  std::vector<std::size_t> services = inst.bundle_services(orch);
  if (services.empty()) return std::nullopt;
  for (std::size_t m : services) {
    bool implementable = false;
    for (std::size_t j = 0; j < inst.n_functions; ++j)
      implementable |= inst.implements[m][j] != 0;
    if (!implementable) return std::nullopt;
  }

  // Descending best-utility order; ties keep service index order.
  std::vector<double> best(services.size(), 0.0);
  for (std::size_t s = 0; s < services.size(); ++s)
    for (std::size_t j = 0; j < inst.n_functions; ++j) {
      if (!inst.implements[services[s]][j]) continue;
      for (std::size_t n = 0; n < inst.n_nodes; ++n)
        best[s] = std::max(best[s], inst.base_utility[orch][j][n]);
    }
  std::vector<std::size_t> order(services.size());
  for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return best[a] > best[b] + kValueTol;
  });
  std::vector<std::size_t> ordered;
  for (std::size_t s : order) ordered.push_back(services[s]);

  detail::EmbedSearch search{inst, ctx, policy, std::move(ordered),
                             std::vector<std::uint8_t>(inst.n_functions, 0),
                             ctx.residual,
                             {},
                             orch};
  if (!search.dfs(0)) return std::nullopt;
  return search.placements;
}

inline AssignmentMatrix to_assignment(const ProblemInstance& inst,
                                      const std::vector<Placement>& placements) {
  AssignmentMatrix x(inst.n_functions, std::vector<std::uint8_t>(inst.n_nodes, 0));
  for (const Placement& p : placements) x[p.fn][p.node] = 1;
  return x;
}

}  // namespace dora

#endif  // DORA_EMBEDDING_HPP_
