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

#ifndef NC_BUILTINS_H_
#define NC_BUILTINS_H_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nc/ast.h"

namespace nc {

enum class BuiltinKind { kPure, kSensor, kRelational };

// Built-ins whose interpretation needs the evaluator.
enum class BuiltinSpecial { kNone, kConsthood, kMap };

struct BuiltinInfo {
  Symbol name;
  BuiltinKind kind = BuiltinKind::kPure;
  BuiltinSpecial special = BuiltinSpecial::kNone;
  int arity = 0;
  // Infix spelling and binding strength (higher binds tighter), or empty.
  std::string infix;
  int precedence = 0;
  // Type schemes in the syntax accepted by parse_scheme (types.h). The
  // restricted scheme uses kinded variables.
  std::string scheme;
  std::string restricted_scheme;
  // Applies pointwise to neighbouring field arguments.
  bool liftable = false;
  std::function<Value(std::span<const Value>)> apply;
};

class Builtins {
 public:
  // The default catalogue, including the standard sensor set.
  static const Builtins& standard();

  const BuiltinInfo* find(Symbol name) const;
  const BuiltinInfo* find(std::string_view name) const {
    return find(Symbol(name));
  }
  const BuiltinInfo* find_infix(std::string_view token) const;
  const std::vector<std::shared_ptr<const BuiltinInfo>>& all() const {
    return entries_;
  }

  // Adds a nullary sensor returning `type` (`num` or `bool`).
  void add_sensor(std::string_view name, std::string_view type);
  void add(BuiltinInfo info);

 private:
  std::vector<std::shared_ptr<const BuiltinInfo>> entries_;
};

// Raised on built-in misuse such as head(Null).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nc

#endif  // NC_BUILTINS_H_
