// Copyright 2026 The nc Authors
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

#ifndef NC_TESTS_SUPPORT_H_
#define NC_TESTS_SUPPORT_H_

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nc/ast.h"
#include "nc/hfc.h"
#include "nc/network.h"
#include "nc/parser.h"

namespace nctest {

using nc::DeviceId;

// Symmetric weighted adjacency; self-loops are implicit.
using Graph = std::map<DeviceId, std::map<DeviceId, double>>;

nc::Program program(const std::string& source, bool stdlib = true);

Graph add_nodes(Graph g, int n);
void add_edge(Graph* g, DeviceId a, DeviceId b, double w = 1);
Graph line(int n);
// Erdos-Renyi style; when `connected`, a random spanning tree is added first.
Graph random_graph(std::mt19937_64& rng, int n, double p, bool unit_weights,
                   bool connected);
// Unit-square positions; edge when closer than `radius`; unit weights.
Graph geometric_graph(std::mt19937_64& rng, int n, double radius);

// Devices of g with nbrRange reading the edge weights.
nc::Environment environment_of(const Graph& g);
void set_sensor(nc::Environment* env, DeviceId d, const std::string& name,
                nc::Value v);

// Dijkstra from `sources`; unreachable devices get infinity.
std::map<DeviceId, double> shortest_paths(const Graph& g,
                                          const std::set<DeviceId>& sources);
bool connected(const Graph& g);

// Parent of d along `potential`: the neighbour with the least
// (potential, id) pair when it is below d's potential.
std::optional<DeviceId> descent_parent(const Graph& g,
                                       const std::map<DeviceId, double>& potential,
                                       DeviceId d);
// Sink reached by following descent parents.
DeviceId sink_of(const Graph& g, const std::map<DeviceId, double>& potential,
                 DeviceId d);
// Sum of `local` over each sink's basin.
std::map<DeviceId, double> basin_sums(const Graph& g,
                                      const std::map<DeviceId, double>& potential,
                                      const std::map<DeviceId, double>& local);

struct Outcome {
  std::map<DeviceId, nc::Value> roots;
  bool converged = false;
  std::uint64_t rounds = 0;
  std::uint64_t steps = 0;
};

// Runs `p` under the device semantics with a uniform random scheduler until
// roots are unchanged for `window` full rounds.
Outcome run_until_stable(const nc::Program& p, const nc::Environment& env,
                         std::uint64_t seed, std::uint64_t max_rounds = 300,
                         int window = 5);

std::map<DeviceId, double> numbers(const std::map<DeviceId, nc::Value>& roots);

nc::Program with_main(const nc::Program& p, const nc::ExprPtr& main);
nc::FiringFn hfc_firing(const nc::Program& p);
nc::FiringFn nc_firing(const nc::Program& p);
// First subterm of e whose pretty-printed form is `text`.
nc::ExprPtr find_subterm(const nc::ExprPtr& e, const std::string& text);

// Random redexes ((x) => e1)(e2[e']) with x outside branches and e' local.
struct RedexCase {
  std::string source;
  std::string local;
};
RedexCase random_redex(std::mt19937_64& rng);

}  // namespace nctest

#endif  // NC_TESTS_SUPPORT_H_
