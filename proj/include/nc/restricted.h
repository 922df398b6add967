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

#ifndef NC_RESTRICTED_H_
#define NC_RESTRICTED_H_

#include <string>
#include <vector>

#include "nc/ast.h"
#include "nc/types.h"

namespace nc {

// Kinded type system of the fragment on which the two semantics coincide.
// A liftable built-in applied to field arguments is typed as its pointwise
// lifting.

enum class Diagnostic {
  kMismatch,
  kFieldCaptureInLambda,
  kFieldCaptureInFoldhood,
  kRepNotLocalReturn,
  kRepUpdateNotLambda,
  kFieldOfField,
  kFieldArgument,
};

const char* diagnostic_name(Diagnostic d);

class RestrictionError : public TypeError {
 public:
  RestrictionError(const SourceSpan& span, Diagnostic d,
                   const std::string& message)
      : TypeError(span, std::string(diagnostic_name(d)) + ": " + message),
        diagnostic_(d) {}
  Diagnostic diagnostic() const { return diagnostic_; }

 private:
  Diagnostic diagnostic_;
};

// Which alternative of the foldhood rule typed a body.
enum class FoldBody { kUnresolved, kLocal, kField, kBoth };

struct FoldRecord {
  SourceSpan span;
  FoldBody body = FoldBody::kUnresolved;
};

struct RestrictedType {
  TypePtr type;
  std::string text;  // rendering with kinded variables
  std::vector<FoldRecord> folds;
};

// D holds restricted schemes of user functions; built-ins come from
// D.builtins.
RestrictedType check_restricted(const SchemeEnv& D, const TypeEnv& A,
                                const ExprPtr& e);

struct RestrictedProgramTypes {
  std::vector<std::pair<Symbol, TypeScheme>> functions;
  TypePtr main;
  std::string main_text;
  std::vector<FoldRecord> folds;
};

RestrictedProgramTypes check_restricted_program(
    const Program& p, const Builtins* builtins = nullptr);

// Replaces field<S> by S; variable kinds are dropped.
TypePtr erase(const TypePtr& t);
TypeScheme erase(const TypeScheme& s);
SchemeEnv erase_env(const SchemeEnv& D);
TypeEnv erase_env(const TypeEnv& A);

}  // namespace nc

#endif  // NC_RESTRICTED_H_
