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

#ifndef DORA_TESTS_FIXTURES_HPP_
#define DORA_TESTS_FIXTURES_HPP_

#include <random>

#include "dora/model.hpp"

namespace dora_test {

// Three orchestrators with single-service bundles competing for one node:
// utilities 8/5/3, cpu costs 4/5/3, capacity 10.
inline dora::ProblemInstance t1_instance() {
  dora::ProblemInstance inst;
  inst.n_orchestrators = 3;
  inst.n_services = 3;
  inst.n_functions = 3;
  inst.n_nodes = 1;
  inst.n_resources = 1;
  inst.cost = {{4}, {5}, {3}};
  inst.capacity = {{10}};
  inst.implements = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  inst.bundle = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  inst.base_utility = {{{8.0}, {0.0}, {0.0}},
                       {{0.0}, {5.0}, {0.0}},
                       {{0.0}, {0.0}, {3.0}}};
  return inst;
}

// Random desk-scale instance: every service implementable, every bundle
// non-empty, utilities positive where relevant.
inline dora::ProblemInstance random_instance(std::mt19937_64& rng,
                                             std::size_t n_orch,
                                             std::size_t n_nodes,
                                             std::size_t n_resources = 2,
                                             std::size_t n_services = 4,
                                             std::size_t n_functions = 6) {
  dora::ProblemInstance inst;
  inst.n_orchestrators = n_orch;
  inst.n_services = n_services;
  inst.n_functions = n_functions;
  inst.n_nodes = n_nodes;
  inst.n_resources = n_resources;

  std::uniform_int_distribution<dora::ResourceAmount> cost_dist(1, 6);
  std::uniform_int_distribution<dora::ResourceAmount> cap_dist(10, 24);
  std::uniform_real_distribution<double> util_dist(1.0, 10.0);
  std::uniform_int_distribution<std::size_t> svc_dist(0, n_services - 1);
  std::uniform_int_distribution<std::size_t> fn_dist(0, n_functions - 1);
  std::uniform_int_distribution<std::size_t> len_dist(
      1, std::min<std::size_t>(3, n_services));

  inst.cost.assign(n_functions, dora::ResourceVector(n_resources, 0));
  for (auto& row : inst.cost)
    for (auto& c : row) c = cost_dist(rng);
  inst.capacity.assign(n_nodes, dora::ResourceVector(n_resources, 0));
  for (auto& row : inst.capacity)
    for (auto& c : row) c = cap_dist(rng);

  inst.implements.assign(n_services,
                         std::vector<std::uint8_t>(n_functions, 0));
  for (std::size_t m = 0; m < n_services; ++m) {
    inst.implements[m][fn_dist(rng)] = 1;
    if (rng() % 2) inst.implements[m][fn_dist(rng)] = 1;
  }
  // Every function implements something so utilities are never dead weight.
  for (std::size_t j = 0; j < n_functions; ++j) {
    bool used = false;
    for (std::size_t m = 0; m < n_services; ++m) used |= inst.implements[m][j];
    if (!used) inst.implements[svc_dist(rng)][j] = 1;
  }

  inst.bundle.assign(n_orch, std::vector<std::uint8_t>(n_services, 0));
  for (std::size_t i = 0; i < n_orch; ++i) {
    std::size_t len = len_dist(rng);
    for (std::size_t c = 0; c < len; ++c) inst.bundle[i][svc_dist(rng)] = 1;
  }

  inst.base_utility.assign(
      n_orch, std::vector<std::vector<double>>(
                  n_functions, std::vector<double>(n_nodes, 0.0)));
  for (auto& per_orch : inst.base_utility)
    for (auto& per_fn : per_orch)
      for (auto& u : per_fn) u = util_dist(rng);
  return inst;
}

}  // namespace dora_test

#endif  // DORA_TESTS_FIXTURES_HPP_
