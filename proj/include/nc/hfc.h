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

#ifndef NC_HFC_H_
#define NC_HFC_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nc/device.h"
#include "nc/network.h"
#include "nc/restricted.h"

namespace nc {

// Field-calculus evaluator: nbr yields a neighbouring field value, liftable
// built-ins apply pointwise, foldhood collapses a field. Field roots are
// Values of kind kField.
class HfcEvaluator {
 public:
  explicit HfcEvaluator(const Program& program, EvalOptions options = {});

  TreePtr evaluate(DeviceId self, const TreeEnv& env, const SensorState& sigma,
                   const ExprPtr& e);
  TreePtr fire(DeviceId self, const TreeEnv& env, const SensorState& sigma);

  const Program& program() const { return program_; }

 private:
  Program program_;
  EvalOptions options_;
  std::unordered_map<Symbol, const FunctionDecl*> functions_;
};

// phi restricted to `domain`.
Value restrict_field(const Value& phi, const std::vector<DeviceId>& domain);

enum class HfcRestriction { kNone, kR1, kR2, kOther };

struct HfcCheckResult {
  bool ok = true;
  HfcRestriction restriction = HfcRestriction::kNone;
  SourceSpan span;
  std::string message;
  RestrictedProgramTypes types;
};

// Membership in the fragment both semantics agree on. R1 covers field
// arguments of non-liftable built-ins and fields of fields; R2 covers field
// captures by lambdas and foldhood bodies.
HfcCheckResult check_hfc_prime(const Program& p,
                               const Builtins* builtins = nullptr);

class RefactorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RefactorContext {
  SchemeEnv D;  // restricted schemes of the enclosing program's functions
  TypeEnv A;
};

RefactorContext refactor_context(const Program& p);

// ((x) => e1)(e2) -> ((x) => e1[x := x()])(() => e2)
ExprPtr refactor_abstract(const ExprPtr& e, const RefactorContext& ctx = {});
// ((x) => e1)(e2[e']) -> ((x, y) => e1[x := x(y)])((y) => e2[y], e'), where
// `locals` are subterms of e2 (by identity) of local type.
ExprPtr refactor_abstract_params(const ExprPtr& e,
                                 const std::vector<ExprPtr>& locals,
                                 const RefactorContext& ctx = {});
// ((x) => e1)(nbr{e2}) -> ((x) => e1[x := nbr{x}])(e2)
ExprPtr refactor_defer(const ExprPtr& e);

// Whether x occurs inside a lambda that is an argument of mux, which is how
// branches appear after desugaring.
bool occurs_in_branch(const ExprPtr& e, Symbol x);

struct TraceScenario {
  Environment env;
  std::vector<Action> actions;
};

// A uniform-random schedule of `rounds` fair rounds.
TraceScenario make_trace(Environment env, std::uint64_t seed,
                         std::uint64_t rounds);

struct Divergence {
  std::uint64_t step = 0;
  DeviceId device = 0;
  Value left;
  Value right;
  std::string describe() const;
};

struct BehaviourVerdict {
  bool same = true;
  std::uint64_t firings = 0;
  std::optional<Divergence> divergence;
};

// Runs both firing functions over the same trace and compares the root of
// every firing. Numbers compare with relative tolerance 1e-12.
BehaviourVerdict compare_firings(const FiringFn& left, const FiringFn& right,
                                 const TraceScenario& scenario);

// The program under the device semantics and the field semantics.
BehaviourVerdict check_same_behaviour(const Program& p,
                                      const TraceScenario& scenario);

bool values_close(const Value& a, const Value& b, double rel_tol = 1e-12);

struct GeneratorOptions {
  int max_depth = 4;
  int max_functions = 2;
};

// Random programs over the shared built-ins, shaped to be typable in the
// restricted system most of the time. Callers filter with check_hfc_prime.
std::string generate_program_source(std::mt19937_64& rng,
                                    const GeneratorOptions& options = {});

// Random connected-or-not graph with up to `max_devices` devices and random
// temperature, isSource, isObstacle and nbrRange readings.
Environment random_environment(std::mt19937_64& rng, int max_devices);

}  // namespace nc

#endif  // NC_HFC_H_
