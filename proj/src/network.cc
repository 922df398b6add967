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

#include "nc/network.h"

#include <stdexcept>

namespace nc {

std::set<DeviceId> Environment::devices() const {
  std::set<DeviceId> out;
  for (const auto& entry : sensors) out.insert(entry.first);
  return out;
}

void Environment::add_device(DeviceId d, SensorState sigma) {
  sensors[d] = std::move(sigma);
  topology[d].insert(d);
}

void Environment::remove_device(DeviceId d) {
  sensors.erase(d);
  topology.erase(d);
  for (auto& [from, to] : topology) to.erase(d);
}

void Environment::connect(DeviceId a, DeviceId b) {
  topology[a].insert(b);
  topology[b].insert(a);
}

void Environment::disconnect(DeviceId a, DeviceId b) {
  if (a == b) return;
  topology[a].erase(b);
  topology[b].erase(a);
}

std::string check_well_formed(const Environment& env) {
  for (const auto& [d, sigma] : env.sensors) {
    auto it = env.topology.find(d);
    if (it == env.topology.end() || it->second.count(d) == 0) {
      return "device " + std::to_string(d) + " lacks its self-loop";
    }
  }
  for (const auto& [from, to] : env.topology) {
    if (env.sensors.count(from) == 0) {
      return "edge from unknown device " + std::to_string(from);
    }
    for (DeviceId d : to) {
      if (env.sensors.count(d) == 0) {
        return "edge to unknown device " + std::to_string(d);
      }
    }
  }
  return "";
}

Network::Network(Environment env, FiringFn fire, FilterPolicy filter)
    : fire_(std::move(fire)), filter_(filter) {
  std::string bad = check_well_formed(env);
  if (!bad.empty()) throw std::invalid_argument("ill-formed network: " + bad);
  for (DeviceId d : env.devices()) {
    config_.field[d] = {};
    config_.active[d] = false;
  }
  config_.env = std::move(env);
}

TreeEnv Network::trees(DeviceId d) const {
  std::vector<TreeEnv::Entry> entries;
  for (const auto& [from, stored] : config_.field.at(d)) {
    entries.emplace_back(from, stored.tree);
  }
  return TreeEnv(std::move(entries));
}

TreePtr Network::own_tree(DeviceId d) const {
  auto it = config_.field.find(d);
  if (it == config_.field.end()) return nullptr;
  auto own = it->second.find(d);
  return own == it->second.end() ? nullptr : own->second.tree;
}

TreeEnv Network::filtered(DeviceId d) const {
  std::vector<TreeEnv::Entry> entries;
  for (const auto& [from, stored] : config_.field.at(d)) {
    if (from != d && filter_.horizon &&
        steps_ - stored.received > *filter_.horizon) {
      continue;
    }
    entries.emplace_back(from, stored.tree);
  }
  return TreeEnv(std::move(entries));
}

void Network::step_comp(DeviceId d) {
  auto act = config_.active.find(d);
  if (act == config_.active.end()) {
    throw std::logic_error("comp on unknown device " + std::to_string(d));
  }
  if (act->second) {
    throw std::logic_error("comp on active device " + std::to_string(d));
  }
  TreeEnv theta = filtered(d);
  TreePtr t = fire_(d, theta, config_.env.sensors.at(d));
  StoredEnv& psi = config_.field[d];
  StoredEnv kept;
  for (const auto& [from, tree] : theta) kept[from] = psi.at(from);
  kept[d] = StoredTree{std::move(t), steps_};
  psi = std::move(kept);
  act->second = true;
  ++steps_;
}

void Network::step_send(DeviceId d) {
  auto act = config_.active.find(d);
  if (act == config_.active.end()) {
    throw std::logic_error("send on unknown device " + std::to_string(d));
  }
  if (!act->second) {
    throw std::logic_error("send on inactive device " + std::to_string(d));
  }
  TreePtr t = own_tree(d);
  for (DeviceId to : config_.env.topology.at(d)) {
    config_.field[to][d] = StoredTree{t, steps_};
  }
  act->second = false;
  ++steps_;
}

void Network::step_env(Environment env) {
  std::string bad = check_well_formed(env);
  if (!bad.empty()) throw std::invalid_argument("ill-formed network: " + bad);
  std::set<DeviceId> now = env.devices();
  for (auto it = config_.field.begin(); it != config_.field.end();) {
    if (now.count(it->first) == 0) {
      config_.active.erase(it->first);
      it = config_.field.erase(it);
    } else {
      ++it;
    }
  }
  for (DeviceId d : now) {
    if (config_.field.count(d) == 0) {
      config_.field[d] = {};
      config_.active[d] = false;
    }
  }
  config_.env = std::move(env);
  ++steps_;
}

std::optional<Action> RoundRobinScheduler::next(const NetworkConfig& n) {
  if (n.active.empty()) return std::nullopt;
  if (cursor_) {
    auto it = n.active.find(*cursor_);
    if (it != n.active.end() && it->second) return Action::send(*cursor_);
  }
  auto it = cursor_ ? n.active.upper_bound(*cursor_) : n.active.begin();
  if (it == n.active.end()) it = n.active.begin();
  cursor_ = it->first;
  return it->second ? Action::send(it->first) : Action::comp(it->first);
}

std::optional<Action> UniformRandomScheduler::next(const NetworkConfig& n) {
  if (n.active.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, n.active.size() - 1);
  auto it = n.active.begin();
  std::advance(it, static_cast<long>(pick(rng_)));
  return it->second ? Action::send(it->first) : Action::comp(it->first);
}

std::optional<Action> ExplicitTraceScheduler::next(const NetworkConfig&) {
  if (pos_ >= trace_.size()) return std::nullopt;
  return trace_[pos_++];
}

std::string EventLog::to_text() const {
  std::string out;
  for (const Event& e : events) {
    out += std::to_string(e.step);
    switch (e.action) {
      case Action::Kind::kComp:
        out += " + " + std::to_string(e.device);
        break;
      case Action::Kind::kSend:
        out += " - " + std::to_string(e.device);
        break;
      case Action::Kind::kEnv:
        out += " env -";
        break;
    }
    if (e.snapshot) out += " " + std::to_string(*e.snapshot);
    out += "\n";
  }
  return out;
}

bool RoundTracker::observe(const Network& n, const Event& e) {
  if (!started_) {
    pending_ = n.config().env.devices();
    started_ = true;
  }
  if (e.action == Action::Kind::kSend) pending_.erase(e.device);
  if (e.action == Action::Kind::kEnv) {
    std::set<DeviceId> now = n.config().env.devices();
    for (auto it = pending_.begin(); it != pending_.end();) {
      it = now.count(*it) == 0 ? pending_.erase(it) : std::next(it);
    }
  }
  if (!pending_.empty()) return false;
  ++rounds_;
  pending_ = n.config().env.devices();
  return true;
}

void RoundTracker::close_round(const Network& n) {
  std::map<DeviceId, Value> roots;
  for (DeviceId d : n.config().env.devices()) {
    if (TreePtr t = n.own_tree(d)) roots.emplace(d, t->root);
  }
  if (roots == previous_ && !roots.empty()) {
    if (stable_ == 0) stable_since_ = last_close_;
    ++stable_;
  } else {
    stable_ = 0;
    stable_since_.reset();
  }
  previous_ = std::move(roots);
  last_close_ = n.steps();
}

RunResult run(Network& network, Scheduler& scheduler, const StopCondition& stop,
              const RunHooks& hooks) {
  RunResult result;
  result.log.scheduler = scheduler.describe();
  RoundTracker tracker;
  auto record = [&](Action::Kind kind, DeviceId d) {
    Event ev{network.steps() - 1, kind, d, std::nullopt};
    result.log.events.push_back(ev);
    if (hooks.on_step) hooks.on_step(network, ev);
    return ev;
  };
  while (network.steps() < stop.max_steps &&
         tracker.rounds() < stop.max_rounds) {
    std::optional<Action> a = scheduler.next(network.config());
    if (!a) break;
    switch (a->kind) {
      case Action::Kind::kComp:
        network.step_comp(a->device);
        break;
      case Action::Kind::kSend:
        network.step_send(a->device);
        break;
      case Action::Kind::kEnv:
        network.step_env(*a->env);
        break;
    }
    Event ev = record(a->kind, a->device);
    bool round_done = tracker.observe(network, ev);
    if (hooks.after_step) {
      if (std::optional<Environment> env = hooks.after_step(network, ev)) {
        network.step_env(std::move(*env));
        round_done = tracker.observe(network, record(Action::Kind::kEnv, 0)) ||
                     round_done;
      }
    }
    if (!round_done) continue;
    tracker.close_round(network);
    if (hooks.on_round) {
      if (std::optional<Environment> env = hooks.on_round(network, tracker.rounds())) {
        network.step_env(std::move(*env));
        tracker.observe(network, record(Action::Kind::kEnv, 0));
      }
    }
    if (stop.stop_when_stable &&
        tracker.stable_rounds() >= stop.stability_window) {
      break;
    }
  }
  result.steps = network.steps();
  result.rounds = tracker.rounds();
  result.converged = tracker.stable_rounds() >= stop.stability_window;
  if (result.converged) result.convergence_step = tracker.stable_since();
  return result;
}

}  // namespace nc
