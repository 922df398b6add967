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

#ifndef NC_TYPES_H_
#define NC_TYPES_H_

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nc/ast.h"
#include "nc/builtins.h"

namespace nc {

// t (general), l (local), r (return), s (local return = l and r).
enum class VarKind : std::uint8_t { kGeneral, kLocal, kReturn, kLocalReturn };

VarKind meet(VarKind a, VarKind b);
char kind_letter(VarKind k);

class Type;
using TypePtr = std::shared_ptr<const Type>;

class Type {
 public:
  enum class Kind { kVar, kNum, kBool, kPair, kList, kArrow, kField };

  static TypePtr var(int id);
  static TypePtr num();
  static TypePtr boolean();
  static TypePtr pair(TypePtr a, TypePtr b);
  static TypePtr list(TypePtr a);
  static TypePtr arrow(std::vector<TypePtr> params, TypePtr result);
  static TypePtr field(TypePtr a);

  Kind kind() const { return kind_; }
  int var_id() const { return var_; }
  // Pair: [a, b]; list and field: [a]; arrow: [params..., result].
  const std::vector<TypePtr>& args() const { return args_; }
  const TypePtr& result() const { return args_.back(); }
  std::size_t arity() const { return args_.size() - 1; }

  Type(Kind kind, int var, std::vector<TypePtr> args)
      : kind_(kind), var_(var), args_(std::move(args)) {}

 private:
  Kind kind_;
  int var_;
  std::vector<TypePtr> args_;
};

// Reason attached to a kind restriction, used for diagnostics.
enum class Restriction {
  kNone,
  kLambdaCapture,
  kFoldhoodCapture,
  kRepLocalReturn,
  kNbrLocalReturn,
  kFieldElement,
  kLocalArgument,
};

// Deferred obligation of the restricted system. A lift constraint types an
// application of a liftable built-in whose arguments may be fields; a member
// constraint types a foldhood body, which may be local or a field.
struct Constraint {
  enum class Kind { kLift, kMember };
  Kind kind = Kind::kLift;
  std::vector<TypePtr> params;  // lift: the built-in's parameter types
  TypePtr local_result;         // lift: its result type; member: the element
  std::vector<TypePtr> args;    // lift: argument types; member: [body type]
  TypePtr result;               // lift: type of the application
  int record = -1;              // member: index of the fold record
  SourceSpan span;
  std::string what;
};

struct TypeScheme {
  std::vector<std::pair<int, VarKind>> quantified;
  // Parallel to `quantified` when non-empty.
  std::vector<Restriction> reasons;
  TypePtr body;
  // Deferred lifting/membership obligations (restricted system only).
  std::vector<std::shared_ptr<const Constraint>> constraints;
};

using TypeEnv = std::map<Symbol, TypePtr>;

struct SchemeEnv {
  const Builtins* builtins = nullptr;  // defaults to Builtins::standard()
  std::map<Symbol, TypeScheme> functions;
};

class TypeError : public std::runtime_error {
 public:
  TypeError(const SourceSpan& span, const std::string& message)
      : std::runtime_error(span.file.empty()
                               ? message
                               : span.file.str() + ":" +
                                     std::to_string(span.line) + ":" +
                                     std::to_string(span.col) + ": " + message),
        span_(span) {}
  const SourceSpan& span() const { return span_; }

 private:
  SourceSpan span_;
};

// Raised by TypeState on failure; callers attach a span.
struct UnifyFailure {
  std::string message;
  Restriction reason = Restriction::kNone;
};

// Mutable substitution shared by both type systems.
class TypeState {
 public:
  TypePtr fresh(VarKind k = VarKind::kGeneral,
                Restriction reason = Restriction::kNone);
  VarKind kind(int var) const { return vars_[var].kind; }
  Restriction reason(int var) const { return vars_[var].reason; }

  TypePtr prune(const TypePtr& t) const;
  TypePtr zonk(const TypePtr& t) const;
  bool occurs(int var, const TypePtr& t) const;

  void unify(const TypePtr& a, const TypePtr& b);
  void restrict(const TypePtr& t, VarKind k, Restriction reason);

  // Builds arrow/field/pair/list types and enforces the kind invariants of
  // the restricted system on their components.
  TypePtr make_arrow(std::vector<TypePtr> params, TypePtr result);
  TypePtr make_field(TypePtr a);

  // Scheme variables are numbered locally; each call renames them to fresh
  // variables, copying any constraints into `constraints` when non-null.
  TypePtr instantiate(
      const TypeScheme& s,
      std::vector<std::shared_ptr<const Constraint>>* constraints);
  TypePtr fresh_rigid();
  void free_vars(const TypePtr& t, std::vector<int>* out) const;

  // Quantifies every variable of `t` and of `constraints`.
  TypeScheme generalize(
      const TypePtr& t,
      const std::vector<std::shared_ptr<const Constraint>>& constraints) const;

  std::string to_string(const TypePtr& t, bool show_kinds) const;

 private:
  struct VarInfo {
    TypePtr binding;
    VarKind kind;
    Restriction reason;
    bool rigid;
  };
  void bind(int var, const TypePtr& t);
  std::vector<VarInfo> vars_;
};

// Syntax: `forall a b. (a, list<b>) -> pair<a, field<num>>`. In restricted
// schemes a variable's kind comes from its first letter (l, r, s, else t).
TypeScheme parse_scheme(const std::string& text, bool kinded);
const TypeScheme& builtin_scheme(const BuiltinInfo& b, bool restricted);
TypePtr parse_type(const std::string& text, bool kinded);

// Canonical rendering with variables renamed by first appearance.
std::string to_string(const TypePtr& t);
std::string to_string(const TypeScheme& s);
// Equal up to a bijective renaming of variables (kinds ignored).
bool alpha_equivalent(const TypePtr& a, const TypePtr& b);

TypePtr infer_expr(const SchemeEnv& D, const TypeEnv& A, const ExprPtr& e);

struct ProgramTypes {
  std::vector<std::pair<Symbol, TypeScheme>> functions;
  TypePtr main;
  const TypeScheme* find(Symbol name) const;
};

ProgramTypes infer_program(const Program& p,
                           const Builtins* builtins = nullptr);

// Whether a runtime value can be given type `t` (variables of `t` rigid).
bool value_has_type(const ProgramTypes& env, const Value& v, const TypePtr& t,
                    const Builtins* builtins = nullptr);

}  // namespace nc

#endif  // NC_TYPES_H_
