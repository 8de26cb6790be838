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

#ifndef DORA_PROTOCOL_HPP_
#define DORA_PROTOCOL_HPP_

#include <algorithm>
#include <cassert>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "dora/embedding.hpp"
#include "dora/model.hpp"

namespace dora {

// Logical vote time. Only the owner advances its counter; (counter, owner)
// gives a total order so the last-writer-wins merge is well defined under
// asynchrony.
struct Timestamp {
  std::uint64_t counter = 0;
  std::uint32_t owner = 0;
  auto operator<=>(const Timestamp&) const = default;
};

// One orchestrator's view of the whole election: last known vote, demanded
// resources and vote time of every orchestrator on every node.
struct VoteState {
  std::vector<std::vector<double>> v;                 // [orch][node]
  std::vector<std::vector<ResourceVector>> r;         // [orch][node][res]
  std::vector<std::vector<Timestamp>> t;              // [orch][node]

  bool operator==(const VoteState&) const = default;

  static VoteState zeros(std::size_t n_orch, std::size_t n_nodes,
                         std::size_t n_res) {
    VoteState s;
    s.v.assign(n_orch, std::vector<double>(n_nodes, 0.0));
    s.r.assign(n_orch, std::vector<ResourceVector>(
                           n_nodes, ResourceVector(n_res, 0)));
    s.t.assign(n_orch, std::vector<Timestamp>(n_nodes));
    return s;
  }
};

// Full-state gossip payload.
struct Message {
  std::size_t sender = 0;
  VoteState snapshot;
};

struct ElectionOutcome {
  std::vector<std::vector<std::size_t>> winners_per_node;  // [node] -> ids

  bool won(std::size_t orch, std::size_t node) const {
    const auto& w = winners_per_node[node];
    return std::binary_search(w.begin(), w.end(), orch);
  }

  std::vector<std::size_t> overall_winners() const {
    std::set<std::size_t> all;
    for (const auto& w : winners_per_node) all.insert(w.begin(), w.end());
    return {all.begin(), all.end()};
  }
};

// Capacity-normalized L1 norm of a demand vector. A demand on a
// zero-capacity dimension is rejected: such a vote could never win.
inline double normalized_demand(const ResourceVector& demand,
                                const ResourceVector& node_capacity) {
  double norm = 0.0;
  for (std::size_t k = 0; k < demand.size(); ++k) {
    if (demand[k] == 0) continue;
    if (node_capacity[k] <= 0)
      throw std::invalid_argument("demand on zero-capacity resource");
    norm += static_cast<double>(demand[k]) /
            static_cast<double>(node_capacity[k]);
  }
  return norm;
}

inline double vote_density(double vote, const ResourceVector& demand,
                           const ResourceVector& node_capacity) {
  double norm = normalized_demand(demand, node_capacity);
  if (norm <= 0.0) return std::numeric_limits<double>::infinity();
  return vote / norm;
}

// Scoring function: a first vote on a node is worth the raw node utility;
// every re-vote is capped so its density cannot exceed the cheapest
// standing winner, nor any winning density the voter was beaten by before.
inline double score(bool voted_before, double node_utility, double norm_demand,
                    const std::vector<double>& winner_densities,
                    std::optional<double> lost_density_cap) {
  if (!voted_before) return node_utility;
  double cap = std::numeric_limits<double>::infinity();
  for (double d : winner_densities) cap = std::min(cap, d);
  if (lost_density_cap) cap = std::min(cap, *lost_density_cap);
  if (!std::isfinite(cap)) return node_utility;
  // Shaved strictly below the cap so a re-vote can never displace a
  // standing winner through a density tie.
  return std::min(node_utility, norm_demand * cap * (1.0 - 1e-6));
}

enum class ElectMode { kGreedy, kPartialEnumeration };

namespace detail {

inline bool demand_fits(const ResourceVector& demand,
                        const ResourceVector& residual) {
  for (std::size_t k = 0; k < demand.size(); ++k)
    if (demand[k] > residual[k]) return false;
  return true;
}

inline double greedy_complete(const std::vector<double>& votes,
                              const std::vector<ResourceVector>& demands,
                              const ResourceVector& capacity,
                              std::vector<std::size_t>& winners) {
  ResourceVector residual = capacity;
  double value = 0.0;
  for (std::size_t w : winners) {
    for (std::size_t k = 0; k < capacity.size(); ++k)
      residual[k] -= demands[w][k];
    value += votes[w];
  }
  std::vector<std::uint8_t> in(votes.size(), 0);
  for (std::size_t w : winners) in[w] = 1;
  for (;;) {
    std::size_t pick = votes.size();
    double pick_density = -1.0;
    for (std::size_t i = 0; i < votes.size(); ++i) {
      if (in[i] || votes[i] <= kValueTol) continue;
      if (!demand_fits(demands[i], residual)) continue;
      double d = vote_density(votes[i], demands[i], capacity);
      if (d > pick_density + kValueTol) {
        pick = i;
        pick_density = d;
      }
    }
    if (pick == votes.size()) break;
    in[pick] = 1;
    winners.push_back(pick);
    value += votes[pick];
    for (std::size_t k = 0; k < capacity.size(); ++k)
      residual[k] -= demands[pick][k];
  }
  std::sort(winners.begin(), winners.end());
  return value;
}

inline void subsets_of_size(const std::vector<std::size_t>& pool, std::size_t d,
                            std::vector<std::size_t>& scratch, std::size_t from,
                            const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (scratch.size() == d) {
    fn(scratch);
    return;
  }
  for (std::size_t i = from; i < pool.size(); ++i) {
    scratch.push_back(pool[i]);
    subsets_of_size(pool, d, scratch, i + 1, fn);
    scratch.pop_back();
  }
}

}  // namespace detail

// Per-node election. Greedy mode ranks fitting candidates by vote density;
// partial-enumeration mode additionally seeds the greedy with every feasible
// set of cardinality `depth` and takes the best of those completions and of
// all feasible sets of cardinality below `depth`.
inline std::vector<std::size_t> elect(const std::vector<double>& votes,
                                      const std::vector<ResourceVector>& demands,
                                      const ResourceVector& capacity,
                                      ElectMode mode = ElectMode::kGreedy,
                                      std::size_t depth = 3) {
  std::vector<std::size_t> greedy;
  double greedy_value =
      detail::greedy_complete(votes, demands, capacity, greedy);
  if (mode == ElectMode::kGreedy) return greedy;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < votes.size(); ++i)
    if (votes[i] > kValueTol) candidates.push_back(i);

  std::vector<std::size_t> best = greedy;
  double best_value = greedy_value;
  auto consider = [&](std::vector<std::size_t> set, double value) {
    if (value > best_value + kValueTol ||
        (value > best_value - kValueTol &&
         std::lexicographical_compare(set.begin(), set.end(), best.begin(),
                                      best.end()))) {
      best_value = value;
      best = std::move(set);
    }
  };

  auto feasible_value = [&](const std::vector<std::size_t>& set,
                            double& value) {
    ResourceVector used(capacity.size(), 0);
    value = 0.0;
    for (std::size_t i : set) {
      value += votes[i];
      for (std::size_t k = 0; k < capacity.size(); ++k) {
        used[k] += demands[i][k];
        if (used[k] > capacity[k]) return false;
      }
    }
    return true;
  };

  std::vector<std::size_t> scratch;
  for (std::size_t d = 1; d < depth; ++d)
    detail::subsets_of_size(candidates, d, scratch, 0,
                            [&](const std::vector<std::size_t>& set) {
                              double value;
                              if (feasible_value(set, value))
                                consider(set, value);
                            });
  detail::subsets_of_size(candidates, depth, scratch, 0,
                          [&](const std::vector<std::size_t>& set) {
                            double value;
                            if (!feasible_value(set, value)) return;
                            std::vector<std::size_t> seed = set;
                            double total = detail::greedy_complete(
                                votes, demands, capacity, seed);
                            consider(std::move(seed), total);
                          });
  return best;
}

// Greatest-fixed-point false-winner removal: start with every overall winner
// that lost some node it voted on, then peel off winners whose lost demands
// are covered by residual capacity plus resources still held by remaining
// false-winners.
inline std::vector<std::size_t> recount(
    const ElectionOutcome& outcome, const VoteState& state,
    const std::vector<ResourceVector>& capacities) {
  const std::size_t n_nodes = capacities.size();
  std::set<std::size_t> f;
  for (std::size_t w : outcome.overall_winners())
    for (std::size_t n = 0; n < n_nodes; ++n)
      if (state.v[w][n] > kValueTol && !outcome.won(w, n)) {
        f.insert(w);
        break;
      }

  // Residual after charging every per-node winner.
  std::vector<ResourceVector> residual = capacities;
  for (std::size_t n = 0; n < n_nodes; ++n)
    for (std::size_t w : outcome.winners_per_node[n])
      for (std::size_t k = 0; k < residual[n].size(); ++k)
        residual[n][k] -= state.r[w][n][k];

  bool shrunk = true;
  while (shrunk) {
    shrunk = false;
    std::vector<std::size_t> removable;
    for (std::size_t w : f) {
      bool all_covered = true;
      for (std::size_t n = 0; n < n_nodes && all_covered; ++n) {
        if (!(state.v[w][n] > kValueTol && !outcome.won(w, n))) continue;
        ResourceVector avail = residual[n];
        for (std::size_t other : f)
          if (other != w && outcome.won(other, n))
            for (std::size_t k = 0; k < avail.size(); ++k)
              avail[k] += state.r[other][n][k];
        if (!detail::demand_fits(state.r[w][n], avail)) all_covered = false;
      }
      if (all_covered) removable.push_back(w);
    }
    for (std::size_t w : removable) {
      f.erase(w);
      shrunk = true;
    }
  }
  return {f.begin(), f.end()};
}

// Elect on every node, then repeatedly strip false-winners and re-elect
// until none remain. Mutates `scratch` (votes of stripped orchestrators are
// zeroed); the caller's persistent state is untouched.
inline ElectionOutcome run_election(VoteState& scratch,
                                    const std::vector<ResourceVector>& capacities,
                                    ElectMode mode, std::size_t depth) {
  const std::size_t n_nodes = capacities.size();
  const std::size_t n_orch = scratch.v.size();
  ElectionOutcome outcome;
  for (;;) {
    outcome.winners_per_node.assign(n_nodes, {});
    for (std::size_t n = 0; n < n_nodes; ++n) {
      std::vector<double> votes(n_orch);
      std::vector<ResourceVector> demands(n_orch);
      for (std::size_t i = 0; i < n_orch; ++i) {
        votes[i] = scratch.v[i][n];
        demands[i] = scratch.r[i][n];
      }
      outcome.winners_per_node[n] =
          elect(votes, demands, capacities[n], mode, depth);
    }
    std::vector<std::size_t> false_winners = recount(outcome, scratch, capacities);
    if (false_winners.empty()) break;
    for (std::size_t w : false_winners)
      for (std::size_t n = 0; n < n_nodes; ++n) scratch.v[w][n] = 0.0;
  }
  return outcome;
}

// Record of one emitted re-vote, kept for auditing the scoring cap.
struct VoteAudit {
  std::size_t node = 0;
  double density = 0.0;
  double cap = 0.0;  // effective density ceiling at generation time
  bool first_vote = false;
};

// One DORA state machine. Mutated by a single logical thread; communicates
// only through immutable Message snapshots.
class OrchestratorAgent {
 public:
  OrchestratorAgent(std::size_t id, const ProblemInstance& inst,
                    EmbeddingPolicy policy,
                    ElectMode mode = ElectMode::kGreedy, std::size_t depth = 3)
      : id_(id),
        inst_(&inst),
        policy_(policy),
        mode_(mode),
        depth_(depth),
        state_(VoteState::zeros(inst.n_orchestrators, inst.n_nodes,
                                inst.n_resources)),
        ctx_(EmbeddingContext::fresh(inst)),
        has_voted_(inst.n_nodes, 0),
        loss_count_(inst.n_nodes, 0) {}

  std::size_t id() const { return id_; }
  const VoteState& state() const { return state_; }
  const std::vector<Placement>& assignment_placements() const {
    return placements_;
  }
  AssignmentMatrix assignment() const { return to_assignment(*inst_, placements_); }
  bool conceded() const { return conceded_; }
  const std::vector<VoteAudit>& vote_audits() const { return audits_; }

  Message make_message() const { return Message{id_, state_}; }

  // Last-writer-wins merge of an incoming snapshot; own entries are
  // authoritative and never overwritten. Returns whether anything changed.
  bool agree(const Message& incoming) {
    bool changed = false;
    const VoteState& in = incoming.snapshot;
    for (std::size_t o = 0; o < state_.v.size(); ++o) {
      if (o == id_) continue;
      for (std::size_t n = 0; n < inst_->n_nodes; ++n) {
        if (in.t[o][n] > state_.t[o][n]) {
          state_.v[o][n] = in.v[o][n];
          state_.r[o][n] = in.r[o][n];
          state_.t[o][n] = in.t[o][n];
          changed = true;
        }
      }
    }
    return changed;
  }

  // One orchestration step: embed / vote on the first call; afterwards run
  // the local election and, when outvoted anywhere, withdraw and place one
  // replacement vote. Stability is only re-checked on the next call, so a
  // multi-node assignment pays an iteration for every partial loss.
  // Returns whether the own row changed.
  bool orchestrate() {
    if (conceded_) return false;
    if (!initialized_) {
      initialized_ = true;
      VoteState scratch = state_;
      last_outcome_ = run_election(scratch, inst_->capacity, mode_, depth_);
      last_scratch_ = std::move(scratch);
      refresh_residuals();
      auto placements = embed(id_, *inst_, ctx_, policy_);
      if (!placements) {
        concede();
        return true;
      }
      emit_vote(*placements);
      return true;
    }
    VoteState scratch = state_;
    ElectionOutcome outcome =
        run_election(scratch, inst_->capacity, mode_, depth_);
    bool outvoted = false;
    for (std::size_t n : claimed_nodes_) {
      // A claim is only viable when backed by a positive vote that won.
      if (state_.v[id_][n] <= kValueTol || !outcome.won(id_, n)) {
        outvoted = true;
        break;
      }
    }
    last_outcome_ = outcome;
    last_scratch_ = std::move(scratch);
    if (!outvoted) return false;

    record_losses(outcome);
    // Lost anywhere: the whole assignment is rebuilt from scratch, so
    // local votes on every node are withdrawn first.
    for (std::size_t n = 0; n < inst_->n_nodes; ++n) {
      state_.v[id_][n] = 0.0;
      state_.r[id_][n].assign(inst_->n_resources, 0);
    }
    refresh_residuals();
    auto placements = embed(id_, *inst_, ctx_, policy_);
    if (!placements) {
      concede();
      return true;
    }
    emit_vote(*placements);
    return true;
  }

 private:
  void refresh_residuals() {
    ctx_.residual = inst_->capacity;
    for (std::size_t n = 0; n < inst_->n_nodes; ++n)
      for (std::size_t w : last_outcome_.winners_per_node[n]) {
        if (w == id_) continue;
        for (std::size_t k = 0; k < inst_->n_resources; ++k)
          ctx_.residual[n][k] -= last_scratch_.r[w][n][k];
      }
    for (auto& node : ctx_.residual)
      for (auto& amount : node) amount = std::max<ResourceAmount>(amount, 0);
  }

  void record_losses(const ElectionOutcome& outcome) {
    for (std::size_t n = 0; n < inst_->n_nodes; ++n) {
      if (!(state_.v[id_][n] > kValueTol && !outcome.won(id_, n))) continue;
      double min_density = std::numeric_limits<double>::infinity();
      for (std::size_t w : outcome.winners_per_node[n]) {
        if (w == id_) continue;
        min_density = std::min(
            min_density, vote_density(last_scratch_.v[w][n],
                                      last_scratch_.r[w][n],
                                      inst_->capacity[n]));
      }
      // No rival winner on the node means the vote fell only to the
      // false-winner recount, not to competition; that is not a loss here.
      if (!std::isfinite(min_density)) continue;
      auto it = ctx_.lost_density_cap.find(n);
      if (it == ctx_.lost_density_cap.end())
        ctx_.lost_density_cap[n] = min_density;
      else
        it->second = std::min(it->second, min_density);
      for (const Placement& p : placements_)
        if (p.node == n) ctx_.excluded_pairs.insert(p);
      if (++loss_count_[n] > 1) ctx_.excluded_nodes.insert(n);
    }
  }

  void emit_vote(const std::vector<Placement>& placements) {
    ++vote_counter_;
    Timestamp now{vote_counter_, static_cast<std::uint32_t>(id_)};
    std::set<std::size_t> touched;
    for (const Placement& p : placements) touched.insert(p.node);

    std::set<std::size_t> stamped = touched;
    stamped.insert(claimed_nodes_.begin(), claimed_nodes_.end());

    placements_ = placements;
    std::set<std::size_t> new_claims;
    for (std::size_t n : stamped) {
      state_.t[id_][n] = now;
      if (!touched.count(n)) {
        state_.v[id_][n] = 0.0;
        state_.r[id_][n].assign(inst_->n_resources, 0);
        continue;
      }
      ResourceVector demand(inst_->n_resources, 0);
      double node_utility = 0.0;
      for (const Placement& p : placements) {
        if (p.node != n) continue;
        for (std::size_t k = 0; k < inst_->n_resources; ++k)
          demand[k] += inst_->cost[p.fn][k];
        std::vector<Placement> others;
        for (const Placement& q : placements)
          if (!(q == p)) others.push_back(q);
        node_utility += policy_modifier(policy_, others, p,
                                        inst_->base_utility[id_][p.fn][p.node]);
      }
      double norm = normalized_demand(demand, inst_->capacity[n]);
      std::vector<double> winner_densities;
      for (std::size_t w : last_outcome_.winners_per_node[n]) {
        if (w == id_) continue;
        winner_densities.push_back(vote_density(last_scratch_.v[w][n],
                                                last_scratch_.r[w][n],
                                                inst_->capacity[n]));
      }
      std::optional<double> lost_cap;
      if (auto it = ctx_.lost_density_cap.find(n);
          it != ctx_.lost_density_cap.end())
        lost_cap = it->second;
      bool voted_before = has_voted_[n] != 0;
      double vote = score(voted_before, node_utility, norm, winner_densities,
                          lost_cap);
      state_.v[id_][n] = vote;
      state_.r[id_][n] = demand;
      has_voted_[n] = 1;

      VoteAudit audit;
      audit.node = n;
      audit.first_vote = !voted_before;
      audit.density = norm > 0.0 ? vote / norm
                                 : std::numeric_limits<double>::infinity();
      double cap = std::numeric_limits<double>::infinity();
      for (double d : winner_densities) cap = std::min(cap, d);
      if (lost_cap) cap = std::min(cap, *lost_cap);
      audit.cap = cap;
      if (voted_before && std::isfinite(cap))
        assert(audit.density <= cap + kValueTol);
      audits_.push_back(audit);

      new_claims.insert(n);
    }
    claimed_nodes_ = std::move(new_claims);
  }

  void concede() {
    ++vote_counter_;
    Timestamp now{vote_counter_, static_cast<std::uint32_t>(id_)};
    for (std::size_t n : claimed_nodes_) {
      state_.v[id_][n] = 0.0;
      state_.r[id_][n].assign(inst_->n_resources, 0);
      state_.t[id_][n] = now;
    }
    claimed_nodes_.clear();
    placements_.clear();
    conceded_ = true;
  }

  std::size_t id_;
  const ProblemInstance* inst_;
  EmbeddingPolicy policy_;
  ElectMode mode_;
  std::size_t depth_;
  VoteState state_;
  EmbeddingContext ctx_;
  std::vector<Placement> placements_;
  std::set<std::size_t> claimed_nodes_;
  std::vector<std::uint8_t> has_voted_;
  std::vector<std::size_t> loss_count_;
  std::vector<VoteAudit> audits_;
  ElectionOutcome last_outcome_;
  VoteState last_scratch_;
  std::uint64_t vote_counter_ = 0;
  bool initialized_ = false;
  bool conceded_ = false;
};

}  // namespace dora

#endif  // DORA_PROTOCOL_HPP_
