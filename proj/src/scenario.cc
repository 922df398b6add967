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

#include "nc/scenario.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "nc/stdlib.h"
#include "nc/types.h"

namespace nc {

namespace {

namespace pt = boost::property_tree;

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

template <typename T>
T to_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_floating_point_v<T>) {
      out = static_cast<T>(std::stod(s, &used));
    } else {
      out = static_cast<T>(std::stoull(s, &used));
    }
    if (used != s.size()) throw std::invalid_argument(s);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + what + ": '" + s + "'");
  }
}

bool to_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "True" || s == "1") return true;
  if (s == "false" || s == "False" || s == "0") return false;
  throw ConfigError("bad boolean for " + what + ": '" + s + "'");
}

void check_sensor_name(const std::string& name) {
  const BuiltinInfo* b = Builtins::standard().find(name);
  if (b == nullptr || b->kind != BuiltinKind::kSensor) {
    throw ConfigError("unknown sensor '" + name + "'");
  }
}

Value parse_value(const std::string& s, const std::string& what) {
  if (s == "True") return Value::boolean(true);
  if (s == "False") return Value::boolean(false);
  if (s == "PositiveInfinity") return Value::number(INFINITY);
  return Value::number(to_number<double>(s, what));
}

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s = {
      "program", "topology", "sensors",  "relational", "scheduler",
      "run",     "script",   "failures", "case_study"};
  return s;
}

void check_keys(const pt::ptree& section, const std::string& name,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : section) {
    if (allowed.count(key) == 0) {
      throw ConfigError("unknown key '" + key + "' in [" + name + "]");
    }
  }
}

// Drops `;` comments that follow a value, outside double quotes.
std::string strip_inline_comments(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == ';' && !quoted && i > 0 &&
          std::isspace(static_cast<unsigned char>(line[i - 1]))) {
        line.erase(i);
        break;
      }
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text,
                            const std::string& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(strip_inline_comments(text));
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  ScenarioConfig cfg;
  cfg.base_dir = base_dir;
  for (const auto& [key, value] : tree) {
    if (value.empty()) {
      if (key != "schema_version") {
        throw ConfigError("unknown top-level key '" + key + "'");
      }
      continue;
    }
    if (known_sections().count(key) == 0) {
      throw ConfigError("unknown section [" + key + "]");
    }
  }
  auto version = tree.get_optional<std::string>("schema_version");
  if (!version) throw ConfigError("missing schema_version");
  cfg.schema_version = to_number<int>(*version, "schema_version");
  if (cfg.schema_version != 1) {
    throw ConfigError("unsupported schema_version " + *version);
  }

  pt::ptree empty;
  auto section = [&](const char* name) -> const pt::ptree& {
    auto s = tree.get_child_optional(name);
    return s ? *s : empty;
  };
  auto get = [](const pt::ptree& s, const char* key) {
    auto v = s.get_optional<std::string>(key);
    return v ? std::optional<std::string>(unquote(*v)) : std::nullopt;
  };

  const pt::ptree& program = section("program");
  check_keys(program, "program", {"file", "source", "stdlib", "outputs"});
  if (auto v = get(program, "file")) cfg.program_file = *v;
  if (auto v = get(program, "source")) cfg.program_text = *v;
  if (cfg.program_file.empty() == cfg.program_text.empty()) {
    throw ConfigError("[program] needs exactly one of file and source");
  }
  if (auto v = get(program, "stdlib")) cfg.use_stdlib = to_bool(*v, "stdlib");
  if (auto v = get(program, "outputs")) {
    cfg.outputs.clear();
    std::string list = *v;
    std::replace(list.begin(), list.end(), ',', ' ');
    cfg.outputs = words(list);
    if (cfg.outputs.empty()) throw ConfigError("empty [program] outputs");
  }

  const pt::ptree& topo = section("topology");
  check_keys(topo, "topology",
             {"kind", "n", "width", "height", "radius", "seed", "edges"});
  if (auto v = get(topo, "kind")) cfg.topology.kind = *v;
  if (auto v = get(topo, "n")) cfg.topology.n = to_number<int>(*v, "n");
  if (auto v = get(topo, "width")) {
    cfg.topology.width = to_number<int>(*v, "width");
  }
  if (auto v = get(topo, "height")) {
    cfg.topology.height = to_number<int>(*v, "height");
  }
  if (auto v = get(topo, "radius")) {
    cfg.topology.radius = to_number<double>(*v, "radius");
  }
  if (auto v = get(topo, "seed")) {
    cfg.topology.seed = to_number<std::uint64_t>(*v, "topology seed");
  }
  if (auto v = get(topo, "edges")) {
    for (const std::string& e : words(*v)) {
      auto dash = e.find('-');
      if (dash == std::string::npos) throw ConfigError("bad edge '" + e + "'");
      cfg.topology.edges.emplace_back(
          to_number<DeviceId>(e.substr(0, dash), "edge"),
          to_number<DeviceId>(e.substr(dash + 1), "edge"));
    }
  }
  static const std::set<std::string> kinds = {"line", "grid",
                                              "random-geometric", "explicit"};
  if (kinds.count(cfg.topology.kind) == 0) {
    throw ConfigError("unknown topology kind '" + cfg.topology.kind + "'");
  }
  if (cfg.topology.kind == "grid") {
    cfg.topology.n = cfg.topology.width * cfg.topology.height;
  }
  if (cfg.topology.n < 0) throw ConfigError("negative device count");

  for (const auto& [key, raw] : section("sensors")) {
    std::string value = unquote(raw.data());
    if (key == "seed") {
      cfg.sensor_seed = to_number<std::uint64_t>(value, "sensor seed");
      continue;
    }
    if (key.rfind("random.", 0) == 0 || key.rfind("randint.", 0) == 0) {
      bool integer = key[4] == 'i';
      std::string name = key.substr(key.find('.') + 1);
      check_sensor_name(name);
      std::vector<std::string> range = words(value);
      if (range.size() != 2) throw ConfigError("range needs two bounds: " + key);
      if (integer) {
        cfg.random_int_sensors[name] = {to_number<int>(range[0], key),
                                        to_number<int>(range[1], key)};
      } else {
        cfg.random_sensors[name] = {to_number<double>(range[0], key),
                                    to_number<double>(range[1], key)};
      }
      continue;
    }
    auto dot = key.find('.');
    check_sensor_name(key.substr(0, dot));
    if (dot == std::string::npos) {
      parse_value(value, key);
      cfg.sensor_defaults[key] = value;
    } else {
      parse_value(value, key);
      DeviceId d = to_number<DeviceId>(key.substr(dot + 1), key);
      cfg.sensors[d][key.substr(0, dot)] = value;
    }
  }

  const pt::ptree& rel = section("relational");
  check_keys(rel, "relational", {"nbrRange"});
  if (auto v = get(rel, "nbrRange")) {
    if (*v != "unit" && *v != "euclidean") {
      throw ConfigError("nbrRange must be unit or euclidean");
    }
    cfg.range = *v;
  }

  const pt::ptree& sched = section("scheduler");
  check_keys(sched, "scheduler", {"kind", "seed", "trace"});
  if (auto v = get(sched, "kind")) cfg.scheduler = *v;
  if (cfg.scheduler != "round-robin" && cfg.scheduler != "uniform-random" &&
      cfg.scheduler != "explicit") {
    throw ConfigError("unknown scheduler '" + cfg.scheduler + "'");
  }
  if (auto v = get(sched, "seed")) {
    cfg.seed = to_number<std::uint64_t>(*v, "scheduler seed");
  }
  if (auto v = get(sched, "trace")) {
    for (const std::string& a : words(*v)) {
      char op = a.back();
      if (op != '+' && op != '-') throw ConfigError("bad trace action " + a);
      cfg.trace.emplace_back(
          op, to_number<DeviceId>(a.substr(0, a.size() - 1), "trace"));
    }
  }
  if (cfg.scheduler == "explicit" && cfg.trace.empty()) {
    throw ConfigError("explicit scheduler needs a trace");
  }

  const pt::ptree& runs = section("run");
  check_keys(runs, "run",
             {"max_steps", "max_rounds", "stop_when_stable", "stability_window",
              "horizon", "snapshot_every", "group_by"});
  if (auto v = get(runs, "max_steps")) {
    cfg.max_steps = to_number<std::uint64_t>(*v, "max_steps");
  }
  if (auto v = get(runs, "max_rounds")) {
    cfg.max_rounds = to_number<std::uint64_t>(*v, "max_rounds");
  }
  if (auto v = get(runs, "stop_when_stable")) {
    cfg.stop_when_stable = to_bool(*v, "stop_when_stable");
  }
  if (auto v = get(runs, "stability_window")) {
    cfg.stability_window = to_number<int>(*v, "stability_window");
  }
  if (auto v = get(runs, "horizon")) {
    if (*v != "inf") cfg.horizon = to_number<std::uint64_t>(*v, "horizon");
  }
  if (auto v = get(runs, "snapshot_every")) {
    cfg.snapshot_every = to_number<std::uint64_t>(*v, "snapshot_every");
  }
  if (auto v = get(runs, "group_by")) cfg.group_by = *v;

  for (const auto& [key, raw] : section("script")) {
    std::vector<std::string> w = words(unquote(raw.data()));
    if (w.size() < 3 || (w[0] != "round" && w[0] != "step")) {
      throw ConfigError("script entry " + key +
                        " must read 'round|step N action args'");
    }
    ScriptEvent e;
    e.by_step = w[0] == "step";
    e.at = to_number<std::uint64_t>(w[1], key);
    e.action = w[2];
    e.args.assign(w.begin() + 3, w.end());
    static const std::map<std::string, std::size_t> arity = {
        {"add", 1}, {"remove", 1}, {"cut", 2}, {"link", 2}, {"set", 3}};
    auto it = arity.find(e.action);
    if (it == arity.end()) throw ConfigError("unknown action " + e.action);
    if (e.args.size() < it->second) {
      throw ConfigError("too few arguments for " + e.action + " in " + key);
    }
    if (e.action == "set") check_sensor_name(e.args[1]);
    cfg.script.push_back(std::move(e));
  }
  std::stable_sort(cfg.script.begin(), cfg.script.end(),
                   [](const ScriptEvent& a, const ScriptEvent& b) {
                     return a.at < b.at;
                   });

  const pt::ptree& fail = section("failures");
  check_keys(fail, "failures",
             {"probability", "outage", "windows", "leader_key"});
  if (auto v = get(fail, "probability")) {
    cfg.failures.probability = to_number<double>(*v, "probability");
  }
  if (auto v = get(fail, "outage")) {
    cfg.failures.outage = to_number<std::uint64_t>(*v, "outage");
  }
  if (auto v = get(fail, "windows")) {
    for (const std::string& w : words(*v)) {
      auto dash = w.find('-');
      if (dash == std::string::npos) throw ConfigError("bad window " + w);
      cfg.failures.windows.emplace_back(
          to_number<std::uint64_t>(w.substr(0, dash), "window"),
          to_number<std::uint64_t>(w.substr(dash + 1), "window"));
    }
  }
  if (auto v = get(fail, "leader_key")) cfg.failures.leader_key = *v;

  for (const auto& [key, raw] : section("case_study")) {
    std::string value = unquote(raw.data());
    CaseStudySpec& cs = cfg.case_study;
    if (key == "enabled") {
      cs.enabled = to_bool(value, key);
    } else if (key.rfind("spike.", 0) == 0) {
      std::vector<std::string> w = words(value);
      if (w.size() != 4) {
        throw ConfigError(key + " must read 'round duration amount fraction'");
      }
      cs.spikes.push_back({to_number<std::uint64_t>(w[0], key),
                           to_number<std::uint64_t>(w[1], key),
                           to_number<double>(w[2], key),
                           to_number<double>(w[3], key)});
    } else if (key == "upgrade_round") {
      cs.upgrade_round = to_number<std::uint64_t>(value, key);
    } else if (key == "upgrade_device") {
      cs.upgrade_device = to_number<DeviceId>(value, key);
    } else {
      throw ConfigError("unknown key '" + key + "' in [case_study]");
    }
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_config(buf.str(), dir.empty() ? "." : dir);
}

namespace {

// Sensor state of a device as configured, before any script changes.
class SensorFactory {
 public:
  SensorFactory(const ScenarioConfig& cfg,
                const std::map<DeviceId, std::pair<double, double>>& positions)
      : cfg_(cfg), positions_(positions) {
    std::mt19937_64 rng(cfg.sensor_seed);
    for (int i = 0; i < cfg.topology.n; ++i) draw(static_cast<DeviceId>(i), rng);
    extra_rng_.seed(cfg.sensor_seed ^ 0x9e3779b97f4a7c15ULL);
  }

  SensorState make(DeviceId d) {
    auto drawn = drawn_.find(d);
    if (drawn == drawn_.end()) {
      draw(d, extra_rng_);
      drawn = drawn_.find(d);
    }
    SensorState s;
    for (const auto& [name, v] : drawn->second) s.values[Symbol(name)] = v;
    for (const auto& [name, v] : cfg_.sensor_defaults) {
      s.values[Symbol(name)] = parse_value(v, name);
    }
    auto it = cfg_.sensors.find(d);
    if (it != cfg_.sensors.end()) {
      for (const auto& [name, v] : it->second) {
        s.values[Symbol(name)] = parse_value(v, name);
      }
    }
    if (cfg_.range == "euclidean") {
      auto positions = positions_;
      s.relational[Symbol("nbrRange")] = [positions, d](DeviceId n) {
        auto a = positions.find(d);
        auto b = positions.find(n);
        if (a == positions.end() || b == positions.end()) {
          return Value::number(n == d ? 0 : 1);
        }
        return Value::number(std::hypot(a->second.first - b->second.first,
                                        a->second.second - b->second.second));
      };
    }
    return s;
  }

 private:
  void draw(DeviceId d, std::mt19937_64& rng) {
    auto& out = drawn_[d];
    if (cfg_.random_sensors.count("randomKey") == 0) {
      out["randomKey"] = Value::number(
          std::uniform_real_distribution<double>(0, 1)(rng));
    }
    for (const auto& [name, range] : cfg_.random_sensors) {
      out[name] = Value::number(std::uniform_real_distribution<double>(
          range.first, range.second)(rng));
    }
    for (const auto& [name, range] : cfg_.random_int_sensors) {
      out[name] = Value::number(std::uniform_int_distribution<int>(
          range.first, range.second)(rng));
    }
  }

  const ScenarioConfig& cfg_;
  std::map<DeviceId, std::pair<double, double>> positions_;
  std::map<DeviceId, std::map<std::string, Value>> drawn_;
  std::mt19937_64 extra_rng_;
};

void apply_event(const ScriptEvent& e, Environment* env, SensorFactory* sensors) {
  auto id = [&](std::size_t i) {
    return to_number<DeviceId>(e.args.at(i), e.action + " argument");
  };
  if (e.action == "add") {
    DeviceId d = id(0);
    env->add_device(d, sensors->make(d));
    for (std::size_t i = 1; i < e.args.size(); ++i) {
      DeviceId n = id(i);
      if (env->sensors.count(n) != 0) env->connect(d, n);
    }
  } else if (e.action == "remove") {
    env->remove_device(id(0));
  } else if (e.action == "cut") {
    env->disconnect(id(0), id(1));
  } else if (e.action == "link") {
    if (env->sensors.count(id(0)) == 0 || env->sensors.count(id(1)) == 0) {
      throw ConfigError("link between absent devices");
    }
    env->connect(id(0), id(1));
  } else if (e.action == "set") {
    auto it = env->sensors.find(id(0));
    if (it == env->sensors.end()) throw ConfigError("set on absent device");
    it->second.values[Symbol(e.args[1])] = parse_value(e.args[2], e.args[1]);
  }
}

}  // namespace

BuiltNetwork build_network(const ScenarioConfig& cfg) {
  BuiltNetwork out;
  const TopologySpec& t = cfg.topology;
  std::vector<std::pair<DeviceId, DeviceId>> edges;
  if (t.kind == "line") {
    for (int i = 0; i < t.n; ++i) out.positions[i] = {i, 0};
    for (int i = 0; i + 1 < t.n; ++i) edges.emplace_back(i, i + 1);
  } else if (t.kind == "grid") {
    for (int y = 0; y < t.height; ++y) {
      for (int x = 0; x < t.width; ++x) {
        DeviceId d = static_cast<DeviceId>(y * t.width + x);
        out.positions[d] = {x, y};
        if (x + 1 < t.width) edges.emplace_back(d, d + 1);
        if (y + 1 < t.height) edges.emplace_back(d, d + t.width);
      }
    }
  } else if (t.kind == "random-geometric") {
    std::mt19937_64 rng(t.seed);
    std::uniform_real_distribution<double> unit(0, 1);
    for (int i = 0; i < t.n; ++i) {
      double x = unit(rng);
      double y = unit(rng);
      out.positions[i] = {x, y};
    }
    for (int i = 0; i < t.n; ++i) {
      for (int j = i + 1; j < t.n; ++j) {
        const auto& a = out.positions[i];
        const auto& b = out.positions[j];
        if (std::hypot(a.first - b.first, a.second - b.second) <= t.radius) {
          edges.emplace_back(i, j);
        }
      }
    }
  } else {
    for (int i = 0; i < t.n; ++i) out.positions[i] = {i, 0};
    for (const auto& e : t.edges) {
      if (e.first >= static_cast<DeviceId>(t.n) ||
          e.second >= static_cast<DeviceId>(t.n)) {
        throw ConfigError("edge " + std::to_string(e.first) + "-" +
                          std::to_string(e.second) + " names an absent device");
      }
      edges.push_back(e);
    }
  }
  SensorFactory sensors(cfg, out.positions);
  for (int i = 0; i < t.n; ++i) {
    out.env.add_device(i, sensors.make(i));
  }
  for (const auto& [a, b] : edges) out.env.connect(a, b);
  for (const auto& [d, values] : cfg.sensors) {
    if (d >= static_cast<DeviceId>(t.n)) {
      throw ConfigError("sensor for absent device " + std::to_string(d));
    }
  }
  std::string bad = check_well_formed(out.env);
  if (!bad.empty()) throw ConfigError(bad);
  return out;
}

Program load_program(const ScenarioConfig& cfg) {
  std::string text = cfg.program_text;
  std::string file = "<config>";
  if (!cfg.program_file.empty()) {
    std::filesystem::path p(cfg.program_file);
    if (p.is_relative()) p = std::filesystem::path(cfg.base_dir) / p;
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot read program " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    file = p.string();
  }
  if (cfg.use_stdlib) return parse_with_stdlib(text, file);
  return parse_program(text, {}, file);
}

std::map<std::string, Value> split_outputs(
    const Value& v, const std::vector<std::string>& names) {
  std::map<std::string, Value> out;
  Value rest = v;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i + 1 == names.size()) {
      out[names[i]] = rest;
    } else {
      if (rest.kind() != Value::Kind::kPair) {
        throw EvalError("main result has fewer components than outputs");
      }
      out[names[i]] = rest.first();
      rest = rest.second();
    }
  }
  return out;
}

namespace {

struct Runner {
  const ScenarioConfig& cfg;
  ScenarioResult result;
  std::unique_ptr<SensorFactory> sensors;
  std::map<DeviceId, Value> last_roots;
  int stable = 0;
  std::uint64_t last_snapshot = UINT64_MAX;
  std::size_t next_event = 0;
  std::mt19937_64 fail_rng;
  struct Outage {
    std::uint64_t until;
    SensorState sigma;
    std::set<DeviceId> links;
  };
  std::map<DeviceId, Outage> outages;
  struct ActiveSpike {
    std::uint64_t until;
    double amount;
    std::vector<DeviceId> devices;
  };
  std::vector<ActiveSpike> spikes;

  explicit Runner(const ScenarioConfig& c)
      : cfg(c), fail_rng(c.seed * 0x2545f4914f6cdd1dULL + 17) {}

  void snapshot(const Network& n) {
    if (n.steps() == last_snapshot) return;
    last_snapshot = n.steps();
    bool converged = stable >= cfg.stability_window;
    for (DeviceId d : n.config().env.devices()) {
      TreePtr t = n.own_tree(d);
      if (!t) continue;
      for (const auto& [key, v] : split_outputs(t->root, cfg.outputs)) {
        result.rows.push_back({n.steps(), d, key, to_string(v), converged});
      }
    }
  }

  void observe_round(const Network& n) {
    std::map<DeviceId, Value> roots;
    for (DeviceId d : n.config().env.devices()) {
      if (TreePtr t = n.own_tree(d)) roots.emplace(d, t->root);
    }
    stable = (roots == last_roots && !roots.empty()) ? stable + 1 : 0;
    last_roots = std::move(roots);
  }

  std::optional<Environment> due_events(const Network& n, bool by_step,
                                        std::uint64_t now) {
    std::optional<Environment> env;
    while (next_event < cfg.script.size()) {
      const ScriptEvent& e = cfg.script[next_event];
      if (e.by_step != by_step) {
        // Events of the other clock are handled by the other hook.
        bool later = true;
        for (std::size_t i = next_event; i < cfg.script.size(); ++i) {
          const ScriptEvent& o = cfg.script[i];
          if (o.by_step == by_step && o.at <= now) later = false;
        }
        if (later) break;
      }
      if (e.by_step != by_step || e.at > now) break;
      if (!env) env = n.config().env;
      apply_event(e, &*env, sensors.get());
      ++next_event;
    }
    return env;
  }

  std::optional<Environment> perturb(const Network& n, std::uint64_t round) {
    std::optional<Environment> env;
    auto touch = [&]() -> Environment& {
      if (!env) env = n.config().env;
      return *env;
    };
    // Restore devices whose outage ended.
    for (auto it = outages.begin(); it != outages.end();) {
      if (it->second.until > round) {
        ++it;
        continue;
      }
      Environment& e = touch();
      e.add_device(it->first, it->second.sigma);
      for (DeviceId l : it->second.links) {
        if (e.sensors.count(l) != 0) e.connect(it->first, l);
      }
      it = outages.erase(it);
    }
    const FailureSpec& f = cfg.failures;
    bool in_window = false;
    for (const auto& [lo, hi] : f.windows) {
      in_window = in_window || (round >= lo && round <= hi);
    }
    if (in_window && f.probability > 0) {
      std::bernoulli_distribution fails(f.probability);
      for (DeviceId d : n.config().env.devices()) {
        TreePtr t = n.own_tree(d);
        if (!t) continue;
        std::map<std::string, Value> out = split_outputs(t->root, cfg.outputs);
        auto lead = out.find(f.leader_key);
        if (lead == out.end() || !lead->second.is_bool() ||
            !lead->second.as_bool()) {
          continue;
        }
        if (!fails(fail_rng)) continue;
        Environment& e = touch();
        if (e.sensors.count(d) == 0) continue;
        Outage o{round + f.outage, e.sensors.at(d), e.topology.at(d)};
        o.links.erase(d);
        e.remove_device(d);
        outages[d] = std::move(o);
        result.failures.push_back(std::to_string(round) + " " +
                                  std::to_string(d));
      }
    }
    const CaseStudySpec& cs = cfg.case_study;
    if (cs.enabled) {
      Symbol cpu("cpuLoad");
      auto adjust = [&](const std::vector<DeviceId>& ds, double delta) {
        Environment& e = touch();
        for (DeviceId d : ds) {
          auto s = e.sensors.find(d);
          if (s != e.sensors.end()) {
            double now = s->second.read(*Builtins::standard().find(cpu), d)
                             .as_number();
            s->second.values[cpu] = Value::number(now + delta);
          }
          auto o = outages.find(d);
          if (o != outages.end()) {
            double now = o->second.sigma
                             .read(*Builtins::standard().find(cpu), d)
                             .as_number();
            o->second.sigma.values[cpu] = Value::number(now + delta);
          }
        }
      };
      for (auto it = spikes.begin(); it != spikes.end();) {
        if (it->until > round) {
          ++it;
          continue;
        }
        adjust(it->devices, -it->amount);
        it = spikes.erase(it);
      }
      for (const Spike& s : cs.spikes) {
        if (s.round != round) continue;
        std::vector<DeviceId> all;
        for (DeviceId d : n.config().env.devices()) all.push_back(d);
        std::vector<DeviceId> chosen;
        std::size_t k = static_cast<std::size_t>(
            std::llround(s.fraction * static_cast<double>(all.size())));
        std::sample(all.begin(), all.end(), std::back_inserter(chosen), k,
                    fail_rng);
        adjust(chosen, s.amount);
        spikes.push_back({round + s.duration, s.amount, chosen});
      }
      if (cs.upgrade_round && *cs.upgrade_round == round) {
        Environment& e = touch();
        auto s = e.sensors.find(cs.upgrade_device);
        if (s == e.sensors.end()) {
          throw ConfigError("upgrade device is absent");
        }
        s->second.values[Symbol("upgraded")] = Value::boolean(true);
      }
    }
    return env;
  }
};

ScenarioResult run_impl(const ScenarioConfig& cfg, bool case_study) {
  Runner r(cfg);
  r.result.program = load_program(cfg);
  infer_program(r.result.program);
  BuiltNetwork built = build_network(cfg);
  r.result.positions = built.positions;
  r.sensors = std::make_unique<SensorFactory>(cfg, built.positions);
  Environment env = built.env;
  while (r.next_event < cfg.script.size() && cfg.script[r.next_event].at == 0) {
    apply_event(cfg.script[r.next_event], &env, r.sensors.get());
    ++r.next_event;
  }
  auto evaluator = std::make_shared<DeviceEvaluator>(r.result.program);
  FilterPolicy filter{cfg.horizon};
  Network network(
      env,
      [evaluator](DeviceId d, const TreeEnv& theta, const SensorState& s) {
        return evaluator->fire(d, theta, s);
      },
      filter);

  std::unique_ptr<Scheduler> scheduler;
  if (cfg.scheduler == "round-robin") {
    scheduler = std::make_unique<RoundRobinScheduler>();
  } else if (cfg.scheduler == "uniform-random") {
    scheduler = std::make_unique<UniformRandomScheduler>(cfg.seed);
  } else {
    std::vector<Action> trace;
    for (const auto& [op, d] : cfg.trace) {
      trace.push_back(op == '+' ? Action::comp(d) : Action::send(d));
    }
    scheduler = std::make_unique<ExplicitTraceScheduler>(std::move(trace));
  }

  StopCondition stop;
  stop.max_steps = cfg.max_steps;
  stop.max_rounds = cfg.max_rounds;
  stop.stop_when_stable = cfg.stop_when_stable;
  stop.stability_window = cfg.stability_window;

  RunHooks hooks;
  hooks.after_step = [&](const Network& n, const Event&) {
    return r.due_events(n, true, n.steps());
  };
  hooks.on_round = [&](const Network& n,
                       std::uint64_t round) -> std::optional<Environment> {
    r.observe_round(n);
    if (cfg.snapshot_every > 0 && round % cfg.snapshot_every == 0) {
      r.snapshot(n);
    }
    std::optional<Environment> env = r.due_events(n, false, round);
    if (case_study || !cfg.failures.windows.empty()) {
      Network view = n;
      if (env) view.step_env(*env);
      std::optional<Environment> more = r.perturb(view, round);
      if (more) env = std::move(more);
    }
    return env;
  };
  r.result.run = run(network, *scheduler, stop, hooks);
  r.snapshot(network);
  // Step-timed events left after the trace ended.
  if (std::optional<Environment> env = r.due_events(network, true, UINT64_MAX)) {
    network.step_env(std::move(*env));
  }
  if (r.result.run.converged) {
    for (MetricsRow& row : r.result.rows) {
      if (row.step >= *r.result.run.convergence_step) row.converged = true;
    }
  }
  r.result.final_env = network.config().env;
  for (DeviceId d : network.config().env.devices()) {
    if (TreePtr t = network.own_tree(d)) {
      r.result.final_roots[d] = t->root;
      r.result.final_outputs[d] = split_outputs(t->root, cfg.outputs);
    }
  }
  return std::move(r.result);
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  return run_impl(cfg, cfg.case_study.enabled);
}

ScenarioResult run_case_study(const ScenarioConfig& cfg) {
  if (!cfg.case_study.enabled) {
    throw ConfigError("[case_study] enabled = true is required");
  }
  return run_impl(cfg, true);
}

std::string csv_text(const std::vector<MetricsRow>& rows) {
  std::string out = "step,device,key,value\n";
  for (const MetricsRow& r : rows) {
    out += std::to_string(r.step) + "," + std::to_string(r.device) + "," +
           r.key + "," + r.value + "\n";
  }
  return out;
}

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::optional<double> numeric(const std::string& v) {
  if (v == "True") return 1.0;
  if (v == "False") return 0.0;
  if (v == "PositiveInfinity") return INFINITY;
  if (v == "-PositiveInfinity") return -INFINITY;
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

}  // namespace

void export_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  write_file(path, csv_text(rows));
}

std::string aggregate_text(const std::vector<MetricsRow>& rows) {
  // (step, key) -> (sum, count, converged)
  std::map<std::pair<std::uint64_t, std::string>,
           std::tuple<double, std::size_t, bool>>
      acc;
  for (const MetricsRow& r : rows) {
    std::optional<double> v = numeric(r.value);
    if (!v) continue;
    auto& [sum, count, converged] = acc[{r.step, r.key}];
    sum += *v;
    ++count;
    converged = r.converged;
  }
  std::string out = "step,key,mean,count,converged\n";
  for (const auto& [k, v] : acc) {
    const auto& [sum, count, converged] = v;
    out += std::to_string(k.first) + "," + k.second + "," +
           format_number(sum / static_cast<double>(count)) + "," +
           std::to_string(count) + "," + (converged ? "1" : "0") + "\n";
  }
  return out;
}

void export_plot_data(const std::vector<MetricsRow>& rows,
                      const std::string& path) {
  write_file(path, aggregate_text(rows));
}

std::string series_text(const std::vector<MetricsRow>& rows,
                        const std::string& group_key) {
  std::map<std::pair<std::uint64_t, DeviceId>, std::string> group;
  for (const MetricsRow& r : rows) {
    if (r.key == group_key) group[{r.step, r.device}] = r.value;
  }
  std::map<std::tuple<std::uint64_t, std::string, std::string>,
           std::pair<double, std::size_t>>
      acc;
  for (const MetricsRow& r : rows) {
    if (r.key == group_key) continue;
    auto g = group.find({r.step, r.device});
    std::optional<double> v = numeric(r.value);
    if (g == group.end() || !v) continue;
    auto& [sum, count] = acc[{r.step, g->second, r.key}];
    sum += *v;
    ++count;
  }
  std::string out = "step," + group_key + ",key,mean\n";
  for (const auto& [k, v] : acc) {
    out += std::to_string(std::get<0>(k)) + "," + std::get<1>(k) + "," +
           std::get<2>(k) + "," +
           format_number(v.first / static_cast<double>(v.second)) + "\n";
  }
  return out;
}

}  // namespace nc
