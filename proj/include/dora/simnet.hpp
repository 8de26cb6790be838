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

#ifndef DORA_SIMNET_HPP_
#define DORA_SIMNET_HPP_

#include <bit>
#include <cstdint>
#include <deque>
#include <queue>
#include <random>
#include <stdexcept>
#include <vector>

#include "dora/protocol.hpp"

namespace dora {

struct Topology {
  enum class Kind { kLine, kRing, kStar, kComplete, kRandomConnected };

  Kind kind = Kind::kComplete;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::uint8_t>> adj;

  std::vector<std::size_t> neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j)
      if (adj[i][j]) out.push_back(j);
    return out;
  }

  static Topology make(Kind kind, std::size_t n, std::uint64_t seed = 0) {
    Topology t;
    t.kind = kind;
    t.n = n;
    t.seed = seed;
    t.adj.assign(n, std::vector<std::uint8_t>(n, 0));
    auto link = [&](std::size_t a, std::size_t b) {
      if (a == b) return;
      t.adj[a][b] = t.adj[b][a] = 1;
    };
    switch (kind) {
      case Kind::kLine:
        for (std::size_t i = 0; i + 1 < n; ++i) link(i, i + 1);
        break;
      case Kind::kRing:
        for (std::size_t i = 0; i + 1 < n; ++i) link(i, i + 1);
        if (n > 2) link(n - 1, 0);
        break;
      case Kind::kStar:
        for (std::size_t i = 1; i < n; ++i) link(0, i);
        break;
      case Kind::kComplete:
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j) link(i, j);
        break;
      case Kind::kRandomConnected: {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        double p = n > 1 ? std::min(1.0, 3.0 / static_cast<double>(n)) : 1.0;
        do {
          for (auto& row : t.adj) std::fill(row.begin(), row.end(), 0);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
              if (coin(rng) < p) link(i, j);
        } while (!t.connected());
        break;
      }
    }
    return t;
  }

  bool connected() const {
    if (n == 0) return false;
    std::vector<std::uint8_t> seen(n, 0);
    std::deque<std::size_t> q{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop_front();
      for (std::size_t v = 0; v < n; ++v)
        if (adj[u][v] && !seen[v]) {
          seen[v] = 1;
          ++count;
          q.push_back(v);
        }
    }
    return count == n;
  }
};

struct GraphMetrics {
  std::size_t diameter = 0;
  std::size_t mst_edge_count = 0;
};

// Diameter by BFS from every vertex; a connected graph's spanning tree has
// n - 1 edges.
inline GraphMetrics graph_metrics(const Topology& topo) {
  if (!topo.connected()) throw std::invalid_argument("disconnected topology");
  GraphMetrics gm;
  gm.mst_edge_count = topo.n - 1;
  for (std::size_t s = 0; s < topo.n; ++s) {
    std::vector<std::size_t> dist(topo.n, topo.n + 1);
    std::deque<std::size_t> q{s};
    dist[s] = 0;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop_front();
      for (std::size_t v = 0; v < topo.n; ++v)
        if (topo.adj[u][v] && dist[v] > topo.n) {
          dist[v] = dist[u] + 1;
          q.push_back(v);
        }
      gm.diameter = std::max(gm.diameter, dist[u]);
    }
  }
  return gm;
}

// Async-mode channel parameters. Sync mode uses an idealized zero-delay
// reliable channel regardless of these settings.
struct ChannelModel {
  double base_delay = 1.0;
  double jitter = 0.0;
  double drop_probability = 0.0;  // must be < 1; drops trigger retransmission
  double retransmit_timeout = 5.0;
};

struct FailurePlan {
  // (orchestrator id, event time). Crash = permanent silent stop.
  std::vector<std::pair<std::size_t, double>> crashes;

  bool crashed(std::size_t id, double time) const {
    for (const auto& [who, when] : crashes)
      if (who == id && time >= when) return true;
    return false;
  }
};

enum class SimMode { kSync, kAsync };

struct IterationRecord {
  std::size_t iteration = 0;
  std::vector<std::uint64_t> agent_digests;
  std::uint64_t messages_sent_total = 0;
  std::uint64_t messages_delivered_total = 0;
  bool quiescent = false;
};

struct SimTrace {
  std::vector<IterationRecord> records;
  bool converged = false;
  std::size_t iterations = 0;
  std::uint64_t messages_raw = 0;
  std::uint64_t messages_mst = 0;
  double virtual_time = 0.0;
  std::vector<std::size_t> live_agents;
};

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, std::uint64_t x) {
  for (int b = 0; b < 8; ++b) {
    h ^= (x >> (8 * b)) & 0xff;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t digest(const VoteState& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t o = 0; o < s.v.size(); ++o)
    for (std::size_t n = 0; n < s.v[o].size(); ++n) {
      h = fnv1a(h, std::bit_cast<std::uint64_t>(s.v[o][n]));
      h = fnv1a(h, s.t[o][n].counter);
      h = fnv1a(h, s.t[o][n].owner);
      for (ResourceAmount a : s.r[o][n])
        h = fnv1a(h, static_cast<std::uint64_t>(a));
    }
  return h;
}

// Deterministic BFS spanning tree rooted at vertex 0.
inline std::vector<std::pair<std::size_t, std::size_t>> spanning_tree(
    const Topology& topo) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::uint8_t> seen(topo.n, 0);
  std::deque<std::size_t> q{0};
  seen[0] = 1;
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop_front();
    for (std::size_t v = 0; v < topo.n; ++v)
      if (topo.adj[u][v] && !seen[v]) {
        seen[v] = 1;
        edges.emplace_back(u, v);
        q.push_back(v);
      }
  }
  return edges;
}

struct AsyncEvent {
  double time = 0.0;
  std::uint64_t seq = 0;
  std::size_t to = 0;
  Message msg;
  bool operator>(const AsyncEvent& other) const {
    if (time != other.time) return time > other.time;
    return seq > other.seq;
  }
};

}  // namespace detail

// Runs the protocol over the simulated network. Fully deterministic for a
// given (agents, topology, channel, failures, mode, seed).
inline SimTrace run(std::vector<OrchestratorAgent>& agents,
                    const Topology& topo, const ChannelModel& channel,
                    const FailurePlan& failures, SimMode mode,
                    std::size_t max_iterations, std::uint64_t seed) {
  if (agents.size() != topo.n)
    throw std::invalid_argument("agents do not match topology vertices");
  if (channel.drop_probability < 0.0 || channel.drop_probability >= 1.0)
    throw std::invalid_argument("drop probability must be in [0, 1)");

  SimTrace trace;
  const auto mst = detail::spanning_tree(topo);

  auto snapshot_record = [&](std::size_t iter, bool quiescent) {
    IterationRecord rec;
    rec.iteration = iter;
    for (const auto& a : agents)
      rec.agent_digests.push_back(detail::digest(a.state()));
    rec.messages_sent_total = trace.messages_raw;
    rec.quiescent = quiescent;
    return rec;
  };

  if (mode == SimMode::kSync) {
    std::vector<VoteState> last_broadcast(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i)
      last_broadcast[i] = agents[i].state();
    std::vector<std::vector<Message>> inbox(agents.size());
    std::uint64_t delivered = 0;

    std::size_t round = 0;
    for (round = 1; round <= max_iterations; ++round) {
      double now = static_cast<double>(round);
      bool any_activity = false;
      std::vector<std::uint8_t> broadcast(agents.size(), 0);

      for (std::size_t i = 0; i < agents.size(); ++i) {
        if (failures.crashed(i, now)) continue;
        bool changed = agents[i].orchestrate();
        if (changed) any_activity = true;
        if (!(agents[i].state() == last_broadcast[i])) {
          broadcast[i] = 1;
          last_broadcast[i] = agents[i].state();
          any_activity = true;
        }
      }
      for (std::size_t i = 0; i < agents.size(); ++i) {
        if (!broadcast[i]) continue;
        Message msg = agents[i].make_message();
        for (std::size_t j : topo.neighbors(i)) {
          ++trace.messages_raw;
          if (failures.crashed(j, now)) continue;
          inbox[j].push_back(msg);
        }
      }
      for (const auto& [u, vtx] : mst)
        if (broadcast[u] || broadcast[vtx]) ++trace.messages_mst;
      for (std::size_t i = 0; i < agents.size(); ++i) {
        if (failures.crashed(i, now)) {
          inbox[i].clear();
          continue;
        }
        for (const Message& m : inbox[i]) {
          ++delivered;
          if (agents[i].agree(m)) any_activity = true;
        }
        inbox[i].clear();
      }

      IterationRecord rec = snapshot_record(round, !any_activity);
      rec.messages_delivered_total = delivered;
      trace.records.push_back(rec);
      if (!any_activity) {
        trace.converged = true;
        trace.iterations = round - 1;
        break;
      }
    }
    if (!trace.converged) trace.iterations = max_iterations;
    trace.virtual_time = static_cast<double>(trace.iterations);
  } else {
    std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dull);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::priority_queue<detail::AsyncEvent, std::vector<detail::AsyncEvent>,
                        std::greater<detail::AsyncEvent>>
        queue;
    std::uint64_t seq = 0;
    std::uint64_t delivered = 0;
    std::vector<VoteState> last_broadcast(agents.size());
    std::vector<std::size_t> orchestrations(agents.size(), 0);

    auto send_all = [&](std::size_t from, double now) {
      Message msg = agents[from].make_message();
      for (std::size_t j : topo.neighbors(from)) {
        ++trace.messages_raw;
        double when = now;
        // Retransmit until the delivery attempt is not dropped.
        int attempts = 0;
        while (uni(rng) < channel.drop_probability && attempts < 1000) {
          when += channel.retransmit_timeout;
          ++attempts;
        }
        when += channel.base_delay + channel.jitter * uni(rng);
        queue.push({when, seq++, j, msg});
      }
      for (const auto& [u, vtx] : mst)
        if (u == from || vtx == from) ++trace.messages_mst;
      last_broadcast[from] = agents[from].state();
    };

    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (failures.crashed(i, 0.0)) continue;
      if (agents[i].orchestrate()) ++orchestrations[i];
      last_broadcast[i] = agents[i].state();
      send_all(i, 0.0);
    }

    bool aborted = false;
    double now = 0.0;
    while (!queue.empty()) {
      detail::AsyncEvent ev = queue.top();
      queue.pop();
      now = ev.time;
      std::size_t i = ev.to;
      if (failures.crashed(i, now)) continue;
      ++delivered;
      bool changed = agents[i].agree(ev.msg);
      if (orchestrations[i] >= max_iterations) {
        aborted = true;
        continue;
      }
      if (agents[i].orchestrate()) {
        changed = true;
        ++orchestrations[i];
      }
      if (changed && !(agents[i].state() == last_broadcast[i]))
        send_all(i, now);

      IterationRecord rec = snapshot_record(delivered, false);
      rec.messages_delivered_total = delivered;
      trace.records.push_back(rec);
    }
    trace.converged = !aborted;
    std::size_t max_orch = 0;
    for (std::size_t c : orchestrations) max_orch = std::max(max_orch, c);
    trace.iterations = max_orch;
    trace.virtual_time = now;
    if (!trace.records.empty()) trace.records.back().quiescent = !aborted;
  }

  for (std::size_t i = 0; i < agents.size(); ++i)
    if (!failures.crashed(i, std::numeric_limits<double>::infinity()))
      trace.live_agents.push_back(i);
  return trace;
}

// Post-quiescence consistency view: the election every live agent computes
// from its local state.
struct ConsensusView {
  bool consistent = true;
  ElectionOutcome outcome;  // from the first live agent
};

inline ConsensusView consensus_view(const std::vector<OrchestratorAgent>& agents,
                                    const std::vector<std::size_t>& live,
                                    const ProblemInstance& inst, ElectMode mode,
                                    std::size_t depth) {
  ConsensusView view;
  bool first = true;
  for (std::size_t i : live) {
    VoteState scratch = agents[i].state();
    ElectionOutcome outcome = run_election(scratch, inst.capacity, mode, depth);
    if (first) {
      view.outcome = outcome;
      first = false;
    } else if (outcome.winners_per_node != view.outcome.winners_per_node) {
      view.consistent = false;
    }
  }
  return view;
}

}  // namespace dora

#endif  // DORA_SIMNET_HPP_
