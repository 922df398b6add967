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

#include "support.h"

#include <cmath>
#include <limits>
#include <memory>
#include <queue>

#include "nc/device.h"
#include "nc/stdlib.h"

namespace nctest {

nc::Program program(const std::string& source, bool stdlib) {
  return stdlib ? nc::parse_with_stdlib(source)
                : nc::parse_program(source);
}

Graph add_nodes(Graph g, int n) {
  for (int i = 0; i < n; ++i) g[static_cast<DeviceId>(i)];
  return g;
}

void add_edge(Graph* g, DeviceId a, DeviceId b, double w) {
  if (a == b) return;
  (*g)[a][b] = w;
  (*g)[b][a] = w;
}

Graph line(int n) {
  Graph g = add_nodes({}, n);
  for (int i = 0; i + 1 < n; ++i) add_edge(&g, i, i + 1);
  return g;
}

Graph random_graph(std::mt19937_64& rng, int n, double p, bool unit_weights,
                   bool connected) {
  Graph g = add_nodes({}, n);
  std::uniform_real_distribution<double> weight(0.5, 3.0);
  auto w = [&]() { return unit_weights ? 1.0 : weight(rng); };
  if (connected) {
    for (int i = 1; i < n; ++i) {
      int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
      add_edge(&g, i, j, w());
    }
  }
  std::bernoulli_distribution edge(p);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (g[i].count(j) == 0 && edge(rng)) add_edge(&g, i, j, w());
    }
  }
  return g;
}

Graph geometric_graph(std::mt19937_64& rng, int n, double radius) {
  std::uniform_real_distribution<double> unit(0, 1);
  std::vector<std::pair<double, double>> pos;
  for (int i = 0; i < n; ++i) {
    double x = unit(rng);
    double y = unit(rng);
    pos.emplace_back(x, y);
  }
  Graph g = add_nodes({}, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::hypot(pos[i].first - pos[j].first,
                     pos[i].second - pos[j].second) <= radius) {
        add_edge(&g, i, j);
      }
    }
  }
  return g;
}

nc::Environment environment_of(const Graph& g) {
  nc::Environment env;
  for (const auto& [d, nbrs] : g) {
    nc::SensorState s;
    std::map<DeviceId, double> row = nbrs;
    DeviceId self = d;
    s.relational[nc::Symbol("nbrRange")] = [row, self](DeviceId n) {
      if (n == self) return nc::Value::number(0);
      auto it = row.find(n);
      return nc::Value::number(it == row.end() ? 1.0 : it->second);
    };
    env.add_device(d, std::move(s));
  }
  for (const auto& [d, nbrs] : g) {
    for (const auto& [n, w] : nbrs) env.connect(d, n);
  }
  return env;
}

void set_sensor(nc::Environment* env, DeviceId d, const std::string& name,
                nc::Value v) {
  env->sensors.at(d).values[nc::Symbol(name)] = std::move(v);
}

std::map<DeviceId, double> shortest_paths(const Graph& g,
                                          const std::set<DeviceId>& sources) {
  std::map<DeviceId, double> dist;
  for (const auto& [d, nbrs] : g) {
    dist[d] = std::numeric_limits<double>::infinity();
  }
  using Item = std::pair<double, DeviceId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (DeviceId s : sources) {
    dist[s] = 0;
    queue.emplace(0, s);
  }
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : g.at(u)) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        queue.emplace(dist[v], v);
      }
    }
  }
  return dist;
}

bool connected(const Graph& g) {
  if (g.empty()) return true;
  auto dist = shortest_paths(g, {g.begin()->first});
  for (const auto& [d, x] : dist) {
    if (std::isinf(x)) return false;
  }
  return true;
}

std::optional<DeviceId> descent_parent(
    const Graph& g, const std::map<DeviceId, double>& potential, DeviceId d) {
  std::optional<std::pair<double, DeviceId>> best;
  for (const auto& [n, w] : g.at(d)) {
    std::pair<double, DeviceId> key{potential.at(n), n};
    if (!best || key < *best) best = key;
  }
  if (best && best->first < potential.at(d)) return best->second;
  return std::nullopt;
}

DeviceId sink_of(const Graph& g, const std::map<DeviceId, double>& potential,
                 DeviceId d) {
  while (auto p = descent_parent(g, potential, d)) d = *p;
  return d;
}

std::map<DeviceId, double> basin_sums(const Graph& g,
                                      const std::map<DeviceId, double>& potential,
                                      const std::map<DeviceId, double>& local) {
  std::map<DeviceId, double> out;
  for (const auto& [d, nbrs] : g) out[sink_of(g, potential, d)] += local.at(d);
  return out;
}

Outcome run_until_stable(const nc::Program& p, const nc::Environment& env,
                         std::uint64_t seed, std::uint64_t max_rounds,
                         int window) {
  auto evaluator = std::make_shared<nc::DeviceEvaluator>(p);
  nc::Network net(env, [evaluator](DeviceId d, const nc::TreeEnv& theta,
                                   const nc::SensorState& s) {
    return evaluator->fire(d, theta, s);
  });
  nc::UniformRandomScheduler scheduler(seed);
  nc::StopCondition stop;
  stop.max_rounds = max_rounds;
  stop.stop_when_stable = true;
  stop.stability_window = window;
  nc::RunResult r = nc::run(net, scheduler, stop);
  Outcome out;
  out.converged = r.converged;
  out.rounds = r.rounds;
  out.steps = r.steps;
  for (DeviceId d : net.config().env.devices()) {
    if (nc::TreePtr t = net.own_tree(d)) out.roots[d] = t->root;
  }
  return out;
}

std::map<DeviceId, double> numbers(const std::map<DeviceId, nc::Value>& roots) {
  std::map<DeviceId, double> out;
  for (const auto& [d, v] : roots) out[d] = v.as_number();
  return out;
}


nc::Program with_main(const nc::Program& p, const nc::ExprPtr& main) {
  nc::Program out = p;
  out.main = main;
  return out;
}

nc::FiringFn hfc_firing(const nc::Program& p) {
  auto eval = std::make_shared<nc::HfcEvaluator>(p);
  return [eval](DeviceId d, const nc::TreeEnv& env, const nc::SensorState& s) {
    return eval->fire(d, env, s);
  };
}

nc::FiringFn nc_firing(const nc::Program& p) {
  auto eval = std::make_shared<nc::DeviceEvaluator>(p);
  return [eval](DeviceId d, const nc::TreeEnv& env, const nc::SensorState& s) {
    return eval->fire(d, env, s);
  };
}

nc::ExprPtr find_subterm(const nc::ExprPtr& e, const std::string& text) {
  if (nc::pretty_print(e) == text) return e;
  for (const nc::ExprPtr& c : e->children()) {
    if (nc::ExprPtr r = find_subterm(c, text)) return r;
  }
  return nullptr;
}

RedexCase random_redex(std::mt19937_64& rng) {
  auto pick = [&](const std::vector<std::string>& xs) {
    return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
  };
  std::string k = std::to_string(std::uniform_int_distribution<int>(0, 9)(rng));
  std::string local = pick({"counthood()", "temperature()", "mid()",
                            "rep (0) { (r) => r + 1 }",
                            "foldhood(0, max, nbr{temperature()})"});
  std::string arg = pick({"nbr{Y}", "nbr{Y} + nbrRange()",
                          "min(nbr{Y}, nbr{temperature()})",
                          "nbr{Y * 2} - nbr{mid()}",
                          "mux(nbr{isSource()}, nbr{Y}, nbrRange())"});
  std::string body = pick({"foldhood(K, +, x)", "foldhood(K, min, x + nbrRange())",
                           "foldhood(K, max, x) + counthood()",
                           "foldhood(0, +, mux(nbr{isSource()}, x, nbr{K}))",
                           "let z = foldhood(K, min, x) in z * 2"});
  auto fill = [](std::string s, const std::string& from, const std::string& to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos;
         pos = s.find(from, pos + to.size())) {
      s.replace(pos, from.size(), to);
    }
    return s;
  };
  arg = fill(arg, "Y", local);
  body = fill(body, "K", k);
  return {"((x) => " + body + ")(" + arg + ")", local};
}

}  // namespace nctest
