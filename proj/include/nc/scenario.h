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

#ifndef NC_SCENARIO_H_
#define NC_SCENARIO_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nc/network.h"
#include "nc/parser.h"

namespace nc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TopologySpec {
  std::string kind = "line";  // line, grid, random-geometric, explicit
  int n = 1;
  int width = 1;
  int height = 1;
  double radius = 0.25;
  std::uint64_t seed = 1;
  std::vector<std::pair<DeviceId, DeviceId>> edges;  // explicit
};

// A timed environment change: add, remove, cut, link or set.
struct ScriptEvent {
  bool by_step = false;  // otherwise by full round
  std::uint64_t at = 0;
  std::string action;
  std::vector<std::string> args;
};

struct FailureSpec {
  double probability = 0;  // per leader per full round
  std::uint64_t outage = 10;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> windows;  // rounds
  std::string leader_key = "leader";
};

struct Spike {
  std::uint64_t round = 0;
  std::uint64_t duration = 0;
  double amount = 0;
  double fraction = 0;
};

struct CaseStudySpec {
  bool enabled = false;
  std::vector<Spike> spikes;
  std::optional<std::uint64_t> upgrade_round;
  DeviceId upgrade_device = 0;
};

struct ScenarioConfig {
  int schema_version = 1;
  std::string program_file;
  std::string program_text;
  std::string base_dir;
  bool use_stdlib = true;
  TopologySpec topology;
  std::map<std::string, std::string> sensor_defaults;
  std::map<DeviceId, std::map<std::string, std::string>> sensors;
  // name -> (lo, hi), uniform per device from `sensor_seed`.
  std::map<std::string, std::pair<double, double>> random_sensors;
  std::map<std::string, std::pair<int, int>> random_int_sensors;
  std::uint64_t sensor_seed = 1;
  std::string range = "unit";  // or euclidean
  std::string scheduler = "round-robin";
  std::uint64_t seed = 1;
  std::vector<std::pair<char, DeviceId>> trace;  // explicit: ('+'|'-', d)
  std::optional<std::uint64_t> horizon;
  std::uint64_t max_steps = 100000;
  std::uint64_t max_rounds = 100;
  bool stop_when_stable = false;
  int stability_window = 5;
  std::uint64_t snapshot_every = 1;  // full rounds; 0 = final only
  std::vector<std::string> outputs = {"value"};
  std::string group_by;
  std::vector<ScriptEvent> script;
  FailureSpec failures;
  CaseStudySpec case_study;
};

ScenarioConfig parse_config(const std::string& text,
                            const std::string& base_dir = ".");
ScenarioConfig load_config(const std::string& path);

struct BuiltNetwork {
  Environment env;
  std::map<DeviceId, std::pair<double, double>> positions;
};

BuiltNetwork build_network(const ScenarioConfig& cfg);

Program load_program(const ScenarioConfig& cfg);

struct MetricsRow {
  std::uint64_t step = 0;
  DeviceId device = 0;
  std::string key;
  std::string value;
  bool converged = false;
};

struct ScenarioResult {
  Program program;
  std::vector<MetricsRow> rows;
  RunResult run;
  std::map<DeviceId, Value> final_roots;
  std::map<DeviceId, std::map<std::string, Value>> final_outputs;
  Environment final_env;
  std::map<DeviceId, std::pair<double, double>> positions;
  std::vector<std::string> failures;  // "round device" of injected failures
};

// Splits a right-nested pair into `names.size()` components.
std::map<std::string, Value> split_outputs(const Value& v,
                                           const std::vector<std::string>& names);

ScenarioResult run_scenario(const ScenarioConfig& cfg);
// run_scenario with load spikes, leader failures and the metric upgrade.
ScenarioResult run_case_study(const ScenarioConfig& cfg);

void export_csv(const std::vector<MetricsRow>& rows, const std::string& path);
std::string csv_text(const std::vector<MetricsRow>& rows);
// Per-step means of numeric outputs (True = 1).
std::string aggregate_text(const std::vector<MetricsRow>& rows);
void export_plot_data(const std::vector<MetricsRow>& rows,
                      const std::string& path);
// Per-step mean of every key grouped by the value of `group_key`.
std::string series_text(const std::vector<MetricsRow>& rows,
                        const std::string& group_key);

}  // namespace nc

#endif  // NC_SCENARIO_H_
