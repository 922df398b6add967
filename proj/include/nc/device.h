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

#ifndef NC_DEVICE_H_
#define NC_DEVICE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>

#include "nc/ast.h"
#include "nc/builtins.h"
#include "nc/value_tree.h"

namespace nc {

// sigma. Missing sensors read 0 or False; `mid` defaults to the device id.
struct SensorState {
  std::map<Symbol, Value> values;
  // Relational sensors: value towards a neighbour (or the device itself).
  std::map<Symbol, std::function<Value(DeviceId)>> relational;

  Value read(const BuiltinInfo& b, DeviceId self) const;
  Value read_relational(const BuiltinInfo& b, DeviceId self,
                        DeviceId neighbour) const;
};

struct EvalOptions {
  std::uint64_t step_budget = 1'000'000;
  // Reuses rep and foldhood results across the neighbour iterations of an
  // enclosing foldhood. These do not depend on the neighbour.
  bool memoize = true;
};

class StepBudgetExceeded : public EvalError {
 public:
  using EvalError::EvalError;
};

// Fail is represented by nullptr.
using EvalOutcome = TreePtr;

class DeviceEvaluator {
 public:
  explicit DeviceEvaluator(const Program& program, EvalOptions options = {});

  EvalOutcome evaluate(DeviceId self, DeviceId neighbour, const TreeEnv& env,
                       const SensorState& sigma, const ExprPtr& e);
  // evaluate(self, self, env, sigma, main); never Fail.
  TreePtr fire(DeviceId self, const TreeEnv& env, const SensorState& sigma);

  const Program& program() const { return program_; }
  std::uint64_t last_steps() const { return last_steps_; }

 private:
  Program program_;
  EvalOptions options_;
  std::unordered_map<Symbol, const FunctionDecl*> functions_;
  std::uint64_t last_steps_ = 0;
};

// Shape check of a fired tree against its expression: child counts per
// construct, application roots equal to the body's root, built-in
// applications ending with a leaf of the result, lambdas yielding closures
// of their tag.
bool well_formed(const Program& program, const ExprPtr& e, const TreePtr& t,
                 std::string* why = nullptr);

}  // namespace nc

#endif  // NC_DEVICE_H_
