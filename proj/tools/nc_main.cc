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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "nc/hfc.h"
#include "nc/parser.h"
#include "nc/restricted.h"
#include "nc/scenario.h"
#include "nc/stdlib.h"
#include "nc/types.h"

namespace {

constexpr int kOk = 0;
constexpr int kTypeError = 1;
constexpr int kRuntimeError = 2;
constexpr int kConfigError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nc::ConfigError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::set<std::string> stdlib_names() {
  std::set<std::string> out;
  for (const nc::StdlibEntry& e : nc::stdlib_catalog()) out.insert(e.name);
  return out;
}

nc::Program load_source(const std::string& path, bool stdlib) {
  std::string text = read_file(path);
  return stdlib ? nc::parse_with_stdlib(text, path)
                : nc::parse_program(text, {}, path);
}

int cmd_check(const std::string& file, bool fragment, bool stdlib) {
  nc::Program p = load_source(file, stdlib);
  std::set<std::string> hidden = stdlib ? stdlib_names() : std::set<std::string>{};
  if (!fragment) {
    nc::ProgramTypes types = nc::infer_program(p);
    for (const auto& [name, scheme] : types.functions) {
      if (hidden.count(name.str()) == 0) {
        std::cout << name.str() << " : " << nc::to_string(scheme) << "\n";
      }
    }
    std::cout << "main : " << nc::to_string(types.main) << "\n";
    return kOk;
  }
  nc::HfcCheckResult r = nc::check_hfc_prime(p);
  if (!r.ok) {
    const char* which = r.restriction == nc::HfcRestriction::kR1   ? "R1"
                        : r.restriction == nc::HfcRestriction::kR2 ? "R2"
                                                                   : "type";
    std::cout << "outside fragment (" << which << "): " << r.message << "\n";
    return kTypeError;
  }
  for (const auto& [name, scheme] : r.types.functions) {
    if (hidden.count(name.str()) == 0) {
      std::cout << name.str() << " : " << nc::to_string(scheme) << "\n";
    }
  }
  std::cout << "main : " << r.types.main_text << "\n";
  return kOk;
}

int cmd_diff(const std::string& file, const std::string& scenario,
             std::uint64_t seed, std::uint64_t rounds) {
  nc::ScenarioConfig cfg = nc::load_config(scenario);
  nc::Program p = load_source(file, cfg.use_stdlib);
  nc::HfcCheckResult r = nc::check_hfc_prime(p);
  if (!r.ok) {
    std::cout << "outside fragment: " << r.message << "\n";
    return kTypeError;
  }
  nc::BuiltNetwork built = nc::build_network(cfg);
  nc::TraceScenario trace = nc::make_trace(built.env, seed, rounds);
  nc::BehaviourVerdict v = nc::check_same_behaviour(p, trace);
  if (v.same) {
    std::cout << "PASS " << v.firings << " firings\n";
    return kOk;
  }
  std::cout << "DIVERGE " << v.divergence->describe() << "\n";
  return kRuntimeError;
}

int cmd_stdlib() {
  for (const nc::StdlibEntry& e : nc::stdlib_catalog()) {
    std::cout << e.name << " : " << e.scheme << "\n"
              << "  file: " << e.file << "\n"
              << "  restricted: " << e.restricted << "\n"
              << "  fragment: " << (e.in_fragment ? "yes" : "no") << "\n";
  }
  return kOk;
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed,
            std::optional<std::uint64_t> snapshots, const std::string& out) {
  nc::ScenarioConfig cfg = nc::load_config(path);
  if (seed) cfg.seed = *seed;
  if (snapshots) cfg.snapshot_every = *snapshots;
  nc::ScenarioResult r = nc::run_scenario(cfg);
  std::filesystem::create_directories(out);
  std::filesystem::path dir(out);
  nc::export_csv(r.rows, (dir / "metrics.csv").string());
  nc::export_plot_data(r.rows, (dir / "aggregate.csv").string());
  if (!cfg.group_by.empty()) {
    std::ofstream series(dir / "series.csv", std::ios::binary);
    series << nc::series_text(r.rows, cfg.group_by);
  }
  {
    std::ofstream log(dir / "events.log", std::ios::binary);
    log << r.run.log.to_text();
    for (const std::string& f : r.failures) log << "# failure " << f << "\n";
  }
  std::cout << "steps " << r.run.steps << " rounds " << r.run.rounds;
  if (r.run.converged) {
    std::cout << " converged at step " << *r.run.convergence_step;
  } else {
    std::cout << " not converged";
  }
  std::cout << "\n";
  for (const auto& [d, outputs] : r.final_outputs) {
    std::cout << d;
    for (const auto& [key, v] : outputs) {
      std::cout << " " << key << "=" << nc::to_string(v);
    }
    std::cout << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neighbours calculus interpreter and simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario");
  std::string run_cfg;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::uint64_t> run_snapshots;
  std::string run_out = "out";
  run->add_option("config", run_cfg, "Scenario file")->required();
  run->add_option("--seed", run_seed, "Scheduler seed");
  run->add_option("--snapshots", run_snapshots, "Snapshot every K rounds");
  run->add_option("--out", run_out, "Output directory");

  auto* check = app.add_subcommand("check", "Type-check a program");
  std::string check_file;
  bool check_fragment = false;
  bool no_stdlib = false;
  check->add_option("file", check_file, "Program file")->required();
  check->add_flag("--fragment", check_fragment,
                  "Check membership in the shared fragment");
  check->add_flag("--no-stdlib", no_stdlib, "Do not load the library");

  auto* diff = app.add_subcommand("diff", "Compare both semantics");
  std::string diff_file;
  std::string diff_scenario;
  std::uint64_t diff_seed = 1;
  std::uint64_t diff_rounds = 30;
  diff->add_option("file", diff_file, "Program file")->required();
  diff->add_option("--scenario", diff_scenario, "Scenario file")->required();
  diff->add_option("--seed", diff_seed, "Schedule seed");
  diff->add_option("--rounds", diff_rounds, "Rounds to compare");

  app.add_subcommand("stdlib", "List the library");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_cfg, run_seed, run_snapshots, run_out);
    if (*check) return cmd_check(check_file, check_fragment, !no_stdlib);
    if (*diff) return cmd_diff(diff_file, diff_scenario, diff_seed, diff_rounds);
    return cmd_stdlib();
  } catch (const nc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const nc::SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << "\n";
    return kTypeError;
  } catch (const nc::TypeError& e) {
    std::cerr << "type error: " << e.what() << "\n";
    return kTypeError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
