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

#ifndef NC_NETWORK_H_
#define NC_NETWORK_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nc/device.h"
#include "nc/value_tree.h"

namespace nc {

// Env: topology (delta >-> delta', reflexive) and sensors Sigma.
struct Environment {
  std::map<DeviceId, std::set<DeviceId>> topology;
  std::map<DeviceId, SensorState> sensors;

  std::set<DeviceId> devices() const;
  void add_device(DeviceId d, SensorState sigma = {});
  void remove_device(DeviceId d);
  // Symmetric edge.
  void connect(DeviceId a, DeviceId b);
  void disconnect(DeviceId a, DeviceId b);
};

// Checks WFN; returns an empty string when well formed.
std::string check_well_formed(const Environment& env);

struct StoredTree {
  TreePtr tree;
  std::uint64_t received = 0;  // step index of delivery
};

// Psi(delta): the trees a device holds, by sender.
using StoredEnv = std::map<DeviceId, StoredTree>;

struct NetworkConfig {
  Environment env;
  std::map<DeviceId, StoredEnv> field;  // Psi
  std::map<DeviceId, bool> active;      // alpha
};

struct FilterPolicy {
  // Entries received more than `horizon` steps ago are dropped before a
  // firing. The device's own entry is kept. Unset means never.
  std::optional<std::uint64_t> horizon;
};

using FiringFn =
    std::function<TreePtr(DeviceId, const TreeEnv&, const SensorState&)>;

class Network {
 public:
  Network(Environment env, FiringFn fire, FilterPolicy filter = {});

  // [N-COMP]; requires alpha(delta) = false.
  void step_comp(DeviceId d);
  // [N-SEND]; requires alpha(delta) = true.
  void step_send(DeviceId d);
  // [N-ENV]; requires WFN(env).
  void step_env(Environment env);

  const NetworkConfig& config() const { return config_; }
  std::uint64_t steps() const { return steps_; }
  const FilterPolicy& filter() const { return filter_; }
  void set_filter(FilterPolicy f) { filter_ = f; }

  TreeEnv trees(DeviceId d) const;
  // Psi(delta)(delta), or null before the first firing.
  TreePtr own_tree(DeviceId d) const;
  TreeEnv filtered(DeviceId d) const;

 private:
  NetworkConfig config_;
  FiringFn fire_;
  FilterPolicy filter_;
  std::uint64_t steps_ = 0;
};

struct Action {
  enum class Kind { kComp, kSend, kEnv };
  Kind kind = Kind::kComp;
  DeviceId device = 0;
  std::shared_ptr<const Environment> env;  // kEnv in explicit traces

  static Action comp(DeviceId d) { return {Kind::kComp, d, nullptr}; }
  static Action send(DeviceId d) { return {Kind::kSend, d, nullptr}; }
  static Action change(Environment e) {
    return {Kind::kEnv, 0, std::make_shared<const Environment>(std::move(e))};
  }
};

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  // Null when the schedule is exhausted.
  virtual std::optional<Action> next(const NetworkConfig& n) = 0;
  virtual std::string describe() const = 0;
};

// Devices in id order; each performs its comp then its send.
class RoundRobinScheduler : public Scheduler {
 public:
  std::optional<Action> next(const NetworkConfig& n) override;
  std::string describe() const override { return "round-robin"; }

 private:
  std::optional<DeviceId> cursor_;
};

// Picks a device uniformly and performs its single enabled action.
class UniformRandomScheduler : public Scheduler {
 public:
  explicit UniformRandomScheduler(std::uint64_t seed)
      : seed_(seed), rng_(seed) {}
  std::optional<Action> next(const NetworkConfig& n) override;
  std::string describe() const override {
    return "uniform-random seed=" + std::to_string(seed_);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

class ExplicitTraceScheduler : public Scheduler {
 public:
  explicit ExplicitTraceScheduler(std::vector<Action> trace)
      : trace_(std::move(trace)) {}
  std::optional<Action> next(const NetworkConfig& n) override;
  std::string describe() const override { return "explicit"; }

 private:
  std::vector<Action> trace_;
  std::size_t pos_ = 0;
};

struct Event {
  std::uint64_t step = 0;
  Action::Kind action = Action::Kind::kComp;
  DeviceId device = 0;
  std::optional<std::size_t> snapshot;
};

struct EventLog {
  std::string scheduler;
  std::vector<Event> events;
  std::string to_text() const;
};

struct StopCondition {
  std::uint64_t max_steps = UINT64_MAX;
  std::uint64_t max_rounds = UINT64_MAX;
  bool stop_when_stable = false;
  int stability_window = 5;
};

struct RunHooks {
  // Called after each completed full round (1-based). May return an
  // environment change, applied as an [N-ENV] step.
  std::function<std::optional<Environment>(const Network&, std::uint64_t)>
      on_round;
  // Called after every transition.
  std::function<void(const Network&, const Event&)> on_step;
  // Called after every scheduled transition. May return an environment
  // change, applied as an [N-ENV] step.
  std::function<std::optional<Environment>(const Network&, const Event&)>
      after_step;
};

struct RunResult {
  EventLog log;
  std::uint64_t steps = 0;
  std::uint64_t rounds = 0;
  bool converged = false;
  // First step of the stability window that held at the end of the run.
  std::optional<std::uint64_t> convergence_step;
};

// Tracks full rounds and root stability for a running network.
class RoundTracker {
 public:
  // Returns true when the transition completed a full round.
  bool observe(const Network& n, const Event& e);
  // Compares roots against the previous round.
  void close_round(const Network& n);
  std::uint64_t rounds() const { return rounds_; }
  int stable_rounds() const { return stable_; }
  std::optional<std::uint64_t> stable_since() const { return stable_since_; }

 private:
  std::set<DeviceId> pending_;
  bool started_ = false;
  std::uint64_t rounds_ = 0;
  int stable_ = 0;
  std::optional<std::uint64_t> stable_since_;
  std::uint64_t last_close_ = 0;
  std::map<DeviceId, Value> previous_;
};

RunResult run(Network& network, Scheduler& scheduler, const StopCondition& stop,
              const RunHooks& hooks = {});

}  // namespace nc

#endif  // NC_NETWORK_H_
