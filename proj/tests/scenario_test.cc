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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nc/scenario.h"
#include "support.h"

namespace {

using nc::ConfigError;
using nc::DeviceId;
using nc::Value;

const std::string kDir = NC_SCENARIO_DIR;

nc::ScenarioConfig config(const std::string& text) {
  return nc::parse_config(text, kDir);
}

nctest::Graph graph_of(const nc::Environment& env) {
  nctest::Graph g;
  for (const auto& [d, ns] : env.topology) {
    g[d];
    for (DeviceId n : ns) {
      if (n != d) g[d][n] = 1;
    }
  }
  return g;
}

double hop_diameter(const nctest::Graph& g) {
  double out = 0;
  for (const auto& [d, n] : g) {
    for (const auto& [e, x] : nctest::shortest_paths(g, {d})) {
      if (!std::isinf(x)) out = std::max(out, x);
    }
  }
  return out;
}

const char* kMinimal = R"(schema_version = 1
[program]
source = "1"
)";

TEST(Config, MinimalDefaults) {
  nc::ScenarioConfig cfg = config(kMinimal);
  EXPECT_EQ(cfg.topology.kind, "line");
  EXPECT_EQ(cfg.scheduler, "round-robin");
  EXPECT_EQ(cfg.outputs, std::vector<std::string>{"value"});
}

TEST(Config, InlineCommentsOutsideQuotes) {
  nc::ScenarioConfig cfg = config(
      "schema_version = 1 ; current\n[program]\n"
      "source = \"foldhood(0, +, nbr{1}) ; kept\" ; dropped\n"
      "[topology]\nn = 3   ; three devices\n");
  EXPECT_EQ(cfg.topology.n, 3);
  EXPECT_EQ(cfg.program_text, "foldhood(0, +, nbr{1}) ; kept");
}

TEST(Config, RejectsMalformedFiles) {
  const std::vector<std::string> bad = {
      "[program]\nsource = \"1\"\n",
      "schema_version = 2\n[program]\nsource = \"1\"\n",
      "schema_version = 1\n",
      "schema_version = 1\n[program]\nsource = \"1\"\nfile = a.nc\n",
      "schema_version = 1\n[program]\nsource = \"1\"\n[colours]\nred = 1\n",
      "schema_version = 1\n[program]\nsource = \"1\"\n[run]\nspeed = 3\n",
      "schema_version = 1\n[program]\nsource = \"1\"\n[topology]\nkind = ring\n",
      "schema_version = 1\n[program]\nsource = \"1\"\n[topology]\nn = many\n",
      "schema_version = 1\n[program]\nsource = \"1\"\n[sensors]\nhumidity = 3\n",
      "schema_version = 1\n[program]\nsource = \"1\"\n[sensors]\n"
      "temperature = warm\n",
      "schema_version = 1\n[program]\nsource = \"1\"\n[scheduler]\n"
      "kind = explicit\n",
      "schema_version = 1\n[program]\nsource = \"1\"\n[scheduler]\n"
      "kind = explicit\ntrace = 1*\n",
      "schema_version = 1\n[program]\nsource = \"1\"\n[script]\n"
      "event.0 = \"round 3 explode 1\"\n",
      "schema_version = 1\n[program]\nsource = \"1\"\n[script]\n"
      "event.0 = \"round 3 set 1 humidity 2\"\n",
      "schema_version = 1\n[program]\nsource = \"1\"\n[relational]\n"
      "nbrRange = manhattan\n",
  };
  for (const std::string& text : bad) {
    EXPECT_THROW(config(text), ConfigError) << text;
  }
}

TEST(Config, MissingFileIsConfigError) {
  EXPECT_THROW(nc::load_config(kDir + "/absent.cfg"), ConfigError);
  nc::ScenarioConfig cfg = config(
      "schema_version = 1\n[program]\nfile = programs/absent.nc\n");
  EXPECT_THROW(nc::load_program(cfg), ConfigError);
}

TEST(BuildNetwork, Line) {
  nc::ScenarioConfig cfg = config(std::string(kMinimal) +
                                  "[topology]\nkind = line\nn = 5\n");
  nc::Environment env = nc::build_network(cfg).env;
  ASSERT_EQ(env.devices().size(), 5u);
  for (DeviceId d = 0; d < 5; ++d) {
    std::set<DeviceId> expected = {d};
    if (d > 0) expected.insert(d - 1);
    if (d < 4) expected.insert(d + 1);
    EXPECT_EQ(env.topology.at(d), expected) << d;
  }
}

TEST(BuildNetwork, Grid) {
  nc::ScenarioConfig cfg = config(
      std::string(kMinimal) + "[topology]\nkind = grid\nwidth = 2\nheight = 2\n");
  nc::Environment env = nc::build_network(cfg).env;
  ASSERT_EQ(env.devices().size(), 4u);
  EXPECT_EQ(env.topology.at(0), (std::set<DeviceId>{0, 1, 2}));
  EXPECT_EQ(env.topology.at(1), (std::set<DeviceId>{0, 1, 3}));
  EXPECT_EQ(env.topology.at(2), (std::set<DeviceId>{0, 2, 3}));
  EXPECT_EQ(env.topology.at(3), (std::set<DeviceId>{1, 2, 3}));
}

TEST(BuildNetwork, RandomGeometricMatchesPositions) {
  nc::ScenarioConfig cfg = config(
      std::string(kMinimal) +
      "[topology]\nkind = random-geometric\nn = 30\nradius = 0.25\nseed = 7\n");
  nc::BuiltNetwork a = nc::build_network(cfg);
  nc::BuiltNetwork b = nc::build_network(cfg);
  EXPECT_EQ(a.env.topology, b.env.topology);
  ASSERT_EQ(a.positions.size(), 30u);
  for (const auto& [d, p] : a.positions) {
    EXPECT_GE(p.first, 0);
    EXPECT_LT(p.first, 1);
    for (const auto& [e, q] : a.positions) {
      bool near = std::hypot(p.first - q.first, p.second - q.second) <= 0.25;
      EXPECT_EQ(a.env.topology.at(d).count(e) == 1, near || d == e)
          << d << "-" << e;
    }
  }
}

TEST(BuildNetwork, EuclideanRange) {
  nc::ScenarioConfig cfg = config(std::string(kMinimal) +
                                  "[topology]\nkind = grid\nwidth = 2\n"
                                  "height = 1\n[relational]\n"
                                  "nbrRange = euclidean\n");
  nc::Environment env = nc::build_network(cfg).env;
  const nc::SensorState& s = env.sensors.at(0);
  EXPECT_EQ(s.relational.at(nc::Symbol("nbrRange"))(1), Value::number(1));
  EXPECT_EQ(s.relational.at(nc::Symbol("nbrRange"))(0), Value::number(0));
}

TEST(BuildNetwork, RejectsBadReferences) {
  EXPECT_THROW(nc::build_network(config(std::string(kMinimal) +
                                        "[topology]\nkind = explicit\nn = 2\n"
                                        "edges = 0-5\n")),
               ConfigError);
  EXPECT_THROW(nc::build_network(config(std::string(kMinimal) +
                                        "[topology]\nn = 2\n[sensors]\n"
                                        "temperature.9 = 1\n")),
               ConfigError);
}

TEST(BuildNetwork, SensorTables) {
  nc::ScenarioConfig cfg = config(std::string(kMinimal) +
                                  "[topology]\nn = 3\n[sensors]\n"
                                  "temperature = 4\ntemperature.1 = 7\n"
                                  "randint.cpuLoad = 2 2\n");
  nc::Environment env = nc::build_network(cfg).env;
  nc::Symbol t("temperature");
  EXPECT_EQ(env.sensors.at(0).values.at(t), Value::number(4));
  EXPECT_EQ(env.sensors.at(1).values.at(t), Value::number(7));
  EXPECT_EQ(env.sensors.at(2).values.at(nc::Symbol("cpuLoad")), Value::number(2));
}

TEST(RunScenario, NetworkExampleTrace) {
  nc::ScenarioResult r =
      nc::run_scenario(nc::load_config(kDir + "/example_network.cfg"));
  EXPECT_EQ(r.run.steps, 7u);
  EXPECT_EQ(r.final_roots.at(1), Value::number(17));
  EXPECT_EQ(r.final_roots.at(3), Value::number(7));
  EXPECT_EQ(r.final_roots.count(2), 0u);
  EXPECT_EQ(r.final_env.devices(), (std::set<DeviceId>{1, 3, 4}));
  EXPECT_EQ(r.final_env.topology.at(1), (std::set<DeviceId>{1, 4}));
  EXPECT_EQ(r.final_env.topology.at(3), (std::set<DeviceId>{3, 4}));
  EXPECT_EQ(r.final_env.topology.at(4), (std::set<DeviceId>{1, 3, 4}));
  EXPECT_EQ(r.final_env.sensors.at(1).values.at(nc::Symbol("temperature")),
            Value::number(9));
}

TEST(RunScenario, ObstacleGridRoutesAround) {
  nc::ScenarioConfig cfg = nc::load_config(kDir + "/obstacle_grid.cfg");
  nc::ScenarioResult r = nc::run_scenario(cfg);
  ASSERT_TRUE(r.run.converged);
  nctest::Graph g = graph_of(nc::build_network(cfg).env);
  for (auto& [d, ns] : g) ns.erase(7);
  g.erase(7);
  std::map<DeviceId, double> dist = nctest::shortest_paths(g, {5});
  EXPECT_TRUE(std::isinf(r.final_roots.at(7).as_number()));
  for (const auto& [d, x] : dist) {
    EXPECT_EQ(r.final_roots.at(d).as_number(), x) << d;
  }
  EXPECT_EQ(dist.at(9), 6);
}

TEST(RunScenario, GradientLineConverges) {
  nc::ScenarioResult r =
      nc::run_scenario(nc::load_config(kDir + "/gradient_line.cfg"));
  ASSERT_TRUE(r.run.converged);
  for (DeviceId d = 0; d < 10; ++d) {
    EXPECT_EQ(r.final_outputs.at(d).at("distance"), Value::number(d));
  }
  ASSERT_FALSE(r.rows.empty());
  EXPECT_FALSE(r.rows.front().converged);
  EXPECT_TRUE(r.rows.back().converged);
  for (const nc::MetricsRow& row : r.rows) {
    EXPECT_EQ(row.converged, row.step >= *r.run.convergence_step);
  }
}

TEST(RunScenario, StdlibProgramsStabilise) {
  for (const char* program :
       {"S(2, nbrRange)", "C(gradient(isSource(), nbrRange), +, 1, 0)",
        "broadcast(isSource(), temperature())", "T(6, 0, (x) => x - 1)"}) {
    nc::ScenarioConfig cfg = config(
        std::string("schema_version = 1\n[program]\nsource = \"") + program +
        "\"\n[topology]\nkind = random-geometric\nn = 20\nradius = 0.35\n"
        "[sensors]\nisSource.0 = True\nrandom.temperature = 0 10\n"
        "[scheduler]\nkind = uniform-random\n[run]\nmax_rounds = 200\n"
        "stop_when_stable = true\n");
    nc::ScenarioResult r = nc::run_scenario(cfg);
    EXPECT_TRUE(r.run.converged) << program;
    EXPECT_LT(r.run.rounds, 200u) << program;
  }
}

TEST(RunScenario, HorizonDropsStaleNeighbours) {
  nc::ScenarioConfig cfg = config(
      "schema_version = 1\n[program]\nsource = \"counthood()\"\n"
      "[topology]\nn = 3\n[run]\nmax_rounds = 3\nhorizon = 0\n");
  nc::ScenarioResult r = nc::run_scenario(cfg);
  for (const auto& [d, v] : r.final_roots) EXPECT_EQ(v, Value::number(0)) << d;
}

TEST(RunScenario, RoundScriptChangesSensors) {
  nc::ScenarioConfig cfg = config(
      "schema_version = 1\n[program]\nsource = \"gradient(isSource(), "
      "nbrRange)\"\n[topology]\nn = 5\n[sensors]\nisSource.0 = True\n"
      "[script]\nevent.0 = \"round 10 set 0 isSource False\"\n"
      "event.1 = \"round 10 set 4 isSource True\"\n[run]\nmax_rounds = 30\n");
  nc::ScenarioResult r = nc::run_scenario(cfg);
  for (DeviceId d = 0; d < 5; ++d) {
    EXPECT_EQ(r.final_roots.at(d), Value::number(4 - static_cast<double>(d)));
  }
}

TEST(Export, EmptyRunIsHeaderOnly) {
  EXPECT_EQ(nc::csv_text({}), "step,device,key,value\n");
  EXPECT_EQ(nc::aggregate_text({}), "step,key,mean,count,converged\n");
}

TEST(Export, TwoSnapshotsOfTwoDevices) {
  nc::ScenarioConfig cfg = config(
      "schema_version = 1\n[program]\nsource = \"rep(0) { (x) => x + 1 }\"\n"
      "outputs = count\n[topology]\nn = 2\n[run]\nmax_rounds = 2\n");
  nc::ScenarioResult r = nc::run_scenario(cfg);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(nc::csv_text(r.rows),
            "step,device,key,value\n"
            "4,0,count,1\n4,1,count,1\n8,0,count,2\n8,1,count,2\n");
  EXPECT_EQ(nc::aggregate_text(r.rows),
            "step,key,mean,count,converged\n4,count,1,2,0\n8,count,2,2,0\n");
}

TEST(Export, WritesFilesAndReportsBadPaths) {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "nc_scenario_test";
  std::filesystem::create_directories(dir);
  std::vector<nc::MetricsRow> rows = {{1, 0, "value", "3", false}};
  nc::export_csv(rows, (dir / "m.csv").string());
  std::ifstream in(dir / "m.csv");
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), nc::csv_text(rows));
  try {
    nc::export_csv(rows, "/nonexistent/dir/m.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/m.csv"),
              std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST(Export, SplitOutputsOfNestedPairs) {
  Value v = Value::pair(Value::number(1),
                        Value::pair(Value::boolean(true), Value::number(3)));
  auto out = nc::split_outputs(v, {"a", "b", "c"});
  EXPECT_EQ(out.at("a"), Value::number(1));
  EXPECT_EQ(out.at("b"), Value::boolean(true));
  EXPECT_EQ(out.at("c"), Value::number(3));
  EXPECT_THROW(nc::split_outputs(Value::number(1), {"a", "b"}), nc::EvalError);
}

TEST(Reproducibility, SameSeedSameCsv) {
  nc::ScenarioConfig cfg = nc::load_config(kDir + "/obstacle_grid.cfg");
  std::string a = nc::csv_text(nc::run_scenario(cfg).rows);
  std::string b = nc::csv_text(nc::run_scenario(cfg).rows);
  EXPECT_EQ(a, b);
  cfg.seed = 99;
  EXPECT_NE(nc::csv_text(nc::run_scenario(cfg).rows), a);
}

std::string case_study_text(const std::string& extra) {
  return "schema_version = 1\n[program]\nfile = programs/case_study.nc\n"
         "outputs = leader, potential, cpu_estimate, area, load\n"
         "[topology]\nkind = random-geometric\nn = 40\nradius = 0.28\n"
         "seed = 5\n[sensors]\nrandint.cpuLoad = 1 10\nupgraded = False\n"
         "[scheduler]\nkind = uniform-random\nseed = 2\n" +
         extra;
}

TEST(CaseStudy, AreasCollectTheirBasins) {
  nc::ScenarioConfig cfg = config(case_study_text(
      "[run]\nmax_rounds = 150\nstop_when_stable = true\ngroup_by = area\n"));
  nc::ScenarioResult r = nc::run_scenario(cfg);
  ASSERT_TRUE(r.run.converged);
  nctest::Graph g = graph_of(r.final_env);
  std::map<DeviceId, double> potential;
  std::map<DeviceId, double> load;
  double total = 0;
  std::set<DeviceId> leaders;
  for (const auto& [d, out] : r.final_outputs) {
    potential[d] = out.at("potential").as_number();
    load[d] = out.at("load").as_number();
    total += load[d];
    if (out.at("leader").as_bool()) leaders.insert(d);
  }
  ASSERT_GE(leaders.size(), 2u);
  std::map<DeviceId, double> sums = nctest::basin_sums(g, potential, load);
  double collected = 0;
  for (DeviceId l : leaders) {
    EXPECT_EQ(r.final_outputs.at(l).at("cpu_estimate").as_number(), sums.at(l));
    collected += sums.at(l);
  }
  EXPECT_EQ(collected, total);
  for (const auto& [d, out] : r.final_outputs) {
    DeviceId area = static_cast<DeviceId>(out.at("area").as_number());
    ASSERT_EQ(leaders.count(area), 1u) << d;
    EXPECT_EQ(out.at("cpu_estimate").as_number(), sums.at(area)) << d;
  }

  std::istringstream series(nc::series_text(r.rows, "area"));
  std::string line;
  std::getline(series, line);
  EXPECT_EQ(line, "step,area,key,mean");
  std::uint64_t last = r.rows.back().step;
  std::set<DeviceId> series_areas;
  while (std::getline(series, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    ASSERT_EQ(f.size(), 4u);
    if (std::stoull(f[0]) == last && f[2] == "cpu_estimate") {
      DeviceId area = std::stoull(f[1]);
      series_areas.insert(area);
      EXPECT_EQ(std::stod(f[3]), sums.at(area));
    }
  }
  EXPECT_EQ(series_areas, leaders);
}

TEST(CaseStudy, SpikeReachesAggregateWithinDiameterBound) {
  const std::uint64_t spike_round = 40;
  nc::ScenarioConfig cfg = config(case_study_text(
      "[run]\nmax_rounds = 120\n[case_study]\nenabled = true\n"
      "spike.1 = 40 200 20 0.3\n"));
  nc::ScenarioResult r = nc::run_case_study(cfg);
  double diameter = hop_diameter(graph_of(r.final_env));
  // step -> (sum of estimates at leaders, sum of loads)
  std::map<std::uint64_t, std::pair<double, double>> totals;
  std::map<std::uint64_t, std::map<DeviceId, std::map<std::string, std::string>>>
      snap;
  for (const nc::MetricsRow& row : r.rows) snap[row.step][row.device][row.key] = row.value;
  std::vector<std::pair<double, double>> by_round;
  for (const auto& [step, devices] : snap) {
    double est = 0;
    double load = 0;
    for (const auto& [d, kv] : devices) {
      if (kv.at("leader") == "True") est += std::stod(kv.at("cpu_estimate"));
      load += std::stod(kv.at("load"));
    }
    by_round.emplace_back(est, load);
  }
  ASSERT_GE(by_round.size(), 100u);
  double before = by_round[spike_round - 2].first;
  EXPECT_EQ(before, by_round[spike_round - 2].second);
  double after_load = by_round.back().second;
  EXPECT_EQ(after_load, before + 20 * 12);
  std::optional<std::uint64_t> reached;
  for (std::uint64_t i = spike_round; i < by_round.size(); ++i) {
    if (by_round[i].first == after_load) {
      reached = i + 1 - spike_round;
      break;
    }
  }
  ASSERT_TRUE(reached.has_value());
  EXPECT_LE(*reached, 4 * diameter + 4) << "diameter " << diameter;
  EXPECT_EQ(by_round.back().first, after_load);
}

TEST(CaseStudy, RequiresEnabledSection) {
  EXPECT_THROW(nc::run_case_study(config(case_study_text(""))), ConfigError);
}

}  // namespace
