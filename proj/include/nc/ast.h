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

#ifndef NC_AST_H_
#define NC_AST_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nc/symbol.h"

namespace nc {

using DeviceId = std::uint64_t;

class Expression;
using ExprPtr = std::shared_ptr<const Expression>;

struct BuiltinInfo;
struct PairCell;
struct ConsCell;
struct Closure;
struct NeighbourField;

struct SourceSpan {
  Symbol file;
  std::size_t start = 0;
  std::size_t end = 0;
  int line = 0;
  int col = 0;
};

// Data values, function values and (at runtime only, under the field
// evaluator) neighbouring field values.
class Value {
 public:
  enum class Kind : std::uint8_t {
    kNumber,
    kBool,
    kNull,
    kPair,
    kCons,
    kBuiltin,
    kDefined,
    kClosure,
    kField,
  };

  Value() : rep_(0.0) {}

  static Value number(double d) { return Value(Rep(std::in_place_index<0>, d)); }
  static Value boolean(bool b) { return Value(Rep(std::in_place_index<1>, b)); }
  static Value null() { return Value(Rep(std::in_place_index<2>)); }
  static Value pair(Value first, Value second);
  static Value cons(Value head, Value tail);
  static Value builtin(const BuiltinInfo* b) {
    return Value(Rep(std::in_place_index<5>, b));
  }
  static Value defined(Symbol d) { return Value(Rep(std::in_place_index<6>, d)); }
  static Value closure(std::shared_ptr<const Closure> c) {
    return Value(Rep(std::in_place_index<7>, std::move(c)));
  }
  static Value field(std::shared_ptr<const NeighbourField> f) {
    return Value(Rep(std::in_place_index<8>, std::move(f)));
  }

  Kind kind() const { return static_cast<Kind>(rep_.index()); }
  bool is_number() const { return kind() == Kind::kNumber; }
  bool is_bool() const { return kind() == Kind::kBool; }
  bool is_field() const { return kind() == Kind::kField; }
  bool is_function() const {
    Kind k = kind();
    return k == Kind::kBuiltin || k == Kind::kDefined || k == Kind::kClosure;
  }

  double as_number() const;
  bool as_bool() const;
  const Value& first() const;
  const Value& second() const;
  const Value& head() const;
  const Value& tail() const;
  const BuiltinInfo& as_builtin() const;
  Symbol as_defined() const;
  const Closure& as_closure() const;
  const std::shared_ptr<const Closure>& closure_ptr() const;
  const NeighbourField& as_field() const;

  // name(f): the tag for closures, d for defined functions, b for built-ins.
  Symbol function_name() const;

  // Structural on data, by name on functions, pointwise on fields.
  bool operator==(const Value& other) const;
  bool operator!=(const Value& other) const { return !(*this == other); }

 private:
  using Rep = std::variant<double, bool, std::monostate,
                           std::shared_ptr<const PairCell>,
                           std::shared_ptr<const ConsCell>, const BuiltinInfo*,
                           Symbol, std::shared_ptr<const Closure>,
                           std::shared_ptr<const NeighbourField>>;
  explicit Value(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

struct PairCell {
  Value first;
  Value second;
};

struct ConsCell {
  Value head;
  Value tail;
};

// A lambda together with the values of its free variables. Equivalent to the
// lambda with those values substituted in.
struct Closure {
  ExprPtr lambda;
  std::vector<std::pair<Symbol, Value>> captured;
};

// phi: entries sorted by device id.
struct NeighbourField {
  std::vector<std::pair<DeviceId, Value>> entries;
  const Value* find(DeviceId d) const;
};

// Total order used by min/max: numbers, False < True, pairs and lists
// lexicographically, all function values equal. Values of different kinds
// compare by kind.
int compare_values(const Value& a, const Value& b);

std::string format_number(double d);
// Canonical rendering; closures render as `#tag`.
std::string to_string(const Value& v);

class Expression {
 public:
  enum class Kind {
    kVariable,
    kValue,
    kLambda,
    kApply,
    kRep,
    kNbr,
    kFoldhood,
    // Sugar, removed by desugar().
    kIf,
    kLet,
  };

  static ExprPtr variable(Symbol x, SourceSpan span = {});
  static ExprPtr value(Value v, SourceSpan span = {});
  static ExprPtr lambda(std::vector<Symbol> params, ExprPtr body,
                        Symbol tag = {}, SourceSpan span = {});
  static ExprPtr apply(ExprPtr callee, std::vector<ExprPtr> args,
                       SourceSpan span = {});
  static ExprPtr rep(ExprPtr init, ExprPtr update, SourceSpan span = {});
  static ExprPtr nbr(ExprPtr body, SourceSpan span = {});
  static ExprPtr foldhood(ExprPtr init, ExprPtr aggregator, ExprPtr body,
                          SourceSpan span = {});
  static ExprPtr if_then_else(ExprPtr cond, ExprPtr then_branch,
                              ExprPtr else_branch, SourceSpan span = {});
  static ExprPtr let(Symbol x, ExprPtr init, ExprPtr body,
                     SourceSpan span = {});

  Kind kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }

  // Variable name, or the bound name of a let.
  Symbol name() const { return name_; }
  const Value& value() const { return value_; }
  const std::vector<Symbol>& params() const { return params_; }
  Symbol tag() const { return name_; }

  // Lambda: [body]. Apply: [callee, args...]. Rep: [init, update].
  // Nbr: [body]. Foldhood: [init, aggregator, body]. If: [c, t, e].
  // Let: [init, body].
  const std::vector<ExprPtr>& children() const { return children_; }
  const ExprPtr& child(std::size_t i) const { return children_[i]; }
  const ExprPtr& body() const { return children_.back(); }
  const ExprPtr& callee() const { return children_[0]; }
  std::size_t arg_count() const { return children_.size() - 1; }
  const ExprPtr& arg(std::size_t i) const { return children_[i + 1]; }

  // Sorted by name.
  const std::vector<Symbol>& free_vars() const { return free_vars_; }
  bool has_free_var(Symbol x) const;

  Expression(Kind kind, Symbol name, Value value, std::vector<Symbol> params,
             std::vector<ExprPtr> children, SourceSpan span);

 private:
  Kind kind_;
  Symbol name_;
  Value value_;
  std::vector<Symbol> params_;
  std::vector<ExprPtr> children_;
  std::vector<Symbol> free_vars_;
  SourceSpan span_;
};

struct FunctionDecl {
  Symbol name;
  std::vector<Symbol> params;
  ExprPtr body;
  SourceSpan span;
};

struct Program {
  std::string id = "main";
  std::vector<FunctionDecl> functions;
  ExprPtr main;

  const FunctionDecl* find(Symbol name) const;
};

std::vector<Symbol> free_vars(const ExprPtr& e);

// Simultaneous substitution of closed values for free variables.
ExprPtr substitute(const ExprPtr& e, const std::map<Symbol, Value>& bindings);

// e[x := r] for an arbitrary expression r. Throws std::invalid_argument if a
// binder inside e would capture a free variable of r.
ExprPtr substitute_expr(const ExprPtr& e, Symbol x, const ExprPtr& r);

// Closure value with captured bindings substituted into its lambda.
ExprPtr materialize(const Closure& c);

// Tags every lambda (main:1, main:2, ...) in declaration order then main,
// pre-order, left to right.
Program tag_anonymous_functions(const Program& program);
ExprPtr tag_expression(const ExprPtr& e, const std::string& program_id,
                       int* counter);
Symbol make_tag(const std::string& program_id, int index);

Symbol function_name(const Value& f);
const std::vector<Symbol>& function_params(const Value& f,
                                           const Program& program);
ExprPtr function_body(const Value& f, const Program& program);

// Structural equality up to renaming of bound variables. Tags are compared
// when compare_tags is set.
bool alpha_equal(const ExprPtr& a, const ExprPtr& b, bool compare_tags);

}  // namespace nc

#endif  // NC_AST_H_
