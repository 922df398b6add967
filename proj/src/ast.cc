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

#include "nc/ast.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "nc/builtins.h"

namespace nc {

Value Value::pair(Value first, Value second) {
  return Value(Rep(std::in_place_index<3>,
                   std::make_shared<const PairCell>(
                       PairCell{std::move(first), std::move(second)})));
}

Value Value::cons(Value head, Value tail) {
  return Value(Rep(std::in_place_index<4>,
                   std::make_shared<const ConsCell>(
                       ConsCell{std::move(head), std::move(tail)})));
}

namespace {

[[noreturn]] void bad_access(const char* what) {
  throw EvalError(std::string("value is not ") + what);
}

}  // namespace

double Value::as_number() const {
  if (kind() != Kind::kNumber) bad_access("a number");
  return std::get<0>(rep_);
}

bool Value::as_bool() const {
  if (kind() != Kind::kBool) bad_access("a boolean");
  return std::get<1>(rep_);
}

const Value& Value::first() const {
  if (kind() != Kind::kPair) bad_access("a pair");
  return std::get<3>(rep_)->first;
}

const Value& Value::second() const {
  if (kind() != Kind::kPair) bad_access("a pair");
  return std::get<3>(rep_)->second;
}

const Value& Value::head() const {
  if (kind() != Kind::kCons) bad_access("a non-empty list");
  return std::get<4>(rep_)->head;
}

const Value& Value::tail() const {
  if (kind() != Kind::kCons) bad_access("a non-empty list");
  return std::get<4>(rep_)->tail;
}

const BuiltinInfo& Value::as_builtin() const {
  if (kind() != Kind::kBuiltin) bad_access("a built-in");
  return *std::get<5>(rep_);
}

Symbol Value::as_defined() const {
  if (kind() != Kind::kDefined) bad_access("a defined function");
  return std::get<6>(rep_);
}

const Closure& Value::as_closure() const { return *closure_ptr(); }

const std::shared_ptr<const Closure>& Value::closure_ptr() const {
  if (kind() != Kind::kClosure) bad_access("a closure");
  return std::get<7>(rep_);
}

const NeighbourField& Value::as_field() const {
  if (kind() != Kind::kField) bad_access("a neighbouring field");
  return *std::get<8>(rep_);
}

Symbol Value::function_name() const {
  switch (kind()) {
    case Kind::kBuiltin:
      return std::get<5>(rep_)->name;
    case Kind::kDefined:
      return std::get<6>(rep_);
    case Kind::kClosure:
      return std::get<7>(rep_)->lambda->tag();
    default:
      bad_access("a function");
  }
}

bool Value::operator==(const Value& other) const {
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case Kind::kNumber:
      return std::get<0>(rep_) == std::get<0>(other.rep_);
    case Kind::kBool:
      return std::get<1>(rep_) == std::get<1>(other.rep_);
    case Kind::kNull:
      return true;
    case Kind::kPair:
      return first() == other.first() && second() == other.second();
    case Kind::kCons:
      return head() == other.head() && tail() == other.tail();
    case Kind::kBuiltin:
    case Kind::kDefined:
    case Kind::kClosure:
      return function_name() == other.function_name();
    case Kind::kField:
      return as_field().entries == other.as_field().entries;
  }
  return false;
}

const Value* NeighbourField::find(DeviceId d) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), d,
      [](const std::pair<DeviceId, Value>& e, DeviceId id) {
        return e.first < id;
      });
  if (it == entries.end() || it->first != d) return nullptr;
  return &it->second;
}

namespace {

int category(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::kNumber:
      return 0;
    case Value::Kind::kBool:
      return 1;
    case Value::Kind::kNull:
    case Value::Kind::kCons:
      return 2;
    case Value::Kind::kPair:
      return 3;
    case Value::Kind::kBuiltin:
    case Value::Kind::kDefined:
    case Value::Kind::kClosure:
      return 4;
    case Value::Kind::kField:
      return 5;
  }
  return 6;
}

int sign(bool less, bool greater) { return less ? -1 : (greater ? 1 : 0); }

}  // namespace

int compare_values(const Value& a, const Value& b) {
  int ca = category(a);
  int cb = category(b);
  if (ca != cb) return sign(ca < cb, ca > cb);
  switch (ca) {
    case 0:
      return sign(a.as_number() < b.as_number(),
                  a.as_number() > b.as_number());
    case 1:
      return sign(!a.as_bool() && b.as_bool(), a.as_bool() && !b.as_bool());
    case 2: {
      bool an = a.kind() == Value::Kind::kNull;
      bool bn = b.kind() == Value::Kind::kNull;
      if (an || bn) return sign(an && !bn, !an && bn);
      int c = compare_values(a.head(), b.head());
      return c != 0 ? c : compare_values(a.tail(), b.tail());
    }
    case 3: {
      int c = compare_values(a.first(), b.first());
      return c != 0 ? c : compare_values(a.second(), b.second());
    }
    case 4:
      return 0;
    default:
      throw EvalError("neighbouring fields are not ordered");
  }
}

std::string format_number(double d) {
  if (std::isnan(d)) return "NaN";
  if (std::isinf(d)) return d > 0 ? "PositiveInfinity" : "-PositiveInfinity";
  if (d == 0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), d);
  return std::string(buf, res.ptr);
}

std::string to_string(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::kNumber:
      return format_number(v.as_number());
    case Value::Kind::kBool:
      return v.as_bool() ? "True" : "False";
    case Value::Kind::kNull:
      return "Null";
    case Value::Kind::kPair:
      return "Pair(" + to_string(v.first()) + ", " + to_string(v.second()) +
             ")";
    case Value::Kind::kCons:
      return "Cons(" + to_string(v.head()) + ", " + to_string(v.tail()) + ")";
    case Value::Kind::kBuiltin:
    case Value::Kind::kDefined:
      return v.function_name().str();
    case Value::Kind::kClosure:
      return "#" + v.function_name().str();
    case Value::Kind::kField: {
      std::string out = "{";
      bool first = true;
      for (const auto& [d, x] : v.as_field().entries) {
        if (!first) out += ", ";
        first = false;
        out += std::to_string(d) + ":" + to_string(x);
      }
      return out + "}";
    }
  }
  return "?";
}

namespace {

void insert_sorted(std::vector<Symbol>* set, Symbol x) {
  auto it = std::lower_bound(set->begin(), set->end(), x);
  if (it == set->end() || *it != x) set->insert(it, x);
}

void erase_sorted(std::vector<Symbol>* set, Symbol x) {
  auto it = std::lower_bound(set->begin(), set->end(), x);
  if (it != set->end() && *it == x) set->erase(it);
}

}  // namespace

Expression::Expression(Kind kind, Symbol name, Value value,
                       std::vector<Symbol> params,
                       std::vector<ExprPtr> children, SourceSpan span)
    : kind_(kind),
      name_(name),
      value_(std::move(value)),
      params_(std::move(params)),
      children_(std::move(children)),
      span_(span) {
  switch (kind_) {
    case Kind::kVariable:
      free_vars_.push_back(name_);
      break;
    case Kind::kValue:
      break;
    case Kind::kLambda:
      free_vars_ = children_[0]->free_vars();
      for (Symbol p : params_) erase_sorted(&free_vars_, p);
      break;
    case Kind::kLet:
      free_vars_ = children_[1]->free_vars();
      erase_sorted(&free_vars_, name_);
      for (Symbol x : children_[0]->free_vars()) insert_sorted(&free_vars_, x);
      break;
    default:
      for (const ExprPtr& c : children_) {
        for (Symbol x : c->free_vars()) insert_sorted(&free_vars_, x);
      }
  }
}

bool Expression::has_free_var(Symbol x) const {
  return std::binary_search(free_vars_.begin(), free_vars_.end(), x);
}

ExprPtr Expression::variable(Symbol x, SourceSpan span) {
  return std::make_shared<const Expression>(Kind::kVariable, x, Value(),
                                            std::vector<Symbol>{},
                                            std::vector<ExprPtr>{}, span);
}

ExprPtr Expression::value(Value v, SourceSpan span) {
  return std::make_shared<const Expression>(Kind::kValue, Symbol(),
                                            std::move(v), std::vector<Symbol>{},
                                            std::vector<ExprPtr>{}, span);
}

ExprPtr Expression::lambda(std::vector<Symbol> params, ExprPtr body,
                           Symbol tag, SourceSpan span) {
  return std::make_shared<const Expression>(Kind::kLambda, tag, Value(),
                                            std::move(params),
                                            std::vector<ExprPtr>{body}, span);
}

ExprPtr Expression::apply(ExprPtr callee, std::vector<ExprPtr> args,
                          SourceSpan span) {
  args.insert(args.begin(), std::move(callee));
  return std::make_shared<const Expression>(
      Kind::kApply, Symbol(), Value(), std::vector<Symbol>{}, std::move(args),
      span);
}

ExprPtr Expression::rep(ExprPtr init, ExprPtr update, SourceSpan span) {
  return std::make_shared<const Expression>(
      Kind::kRep, Symbol(), Value(), std::vector<Symbol>{},
      std::vector<ExprPtr>{std::move(init), std::move(update)}, span);
}

ExprPtr Expression::nbr(ExprPtr body, SourceSpan span) {
  return std::make_shared<const Expression>(Kind::kNbr, Symbol(), Value(),
                                            std::vector<Symbol>{},
                                            std::vector<ExprPtr>{body}, span);
}

ExprPtr Expression::foldhood(ExprPtr init, ExprPtr aggregator, ExprPtr body,
                             SourceSpan span) {
  return std::make_shared<const Expression>(
      Kind::kFoldhood, Symbol(), Value(), std::vector<Symbol>{},
      std::vector<ExprPtr>{std::move(init), std::move(aggregator),
                           std::move(body)},
      span);
}

ExprPtr Expression::if_then_else(ExprPtr cond, ExprPtr then_branch,
                                 ExprPtr else_branch, SourceSpan span) {
  return std::make_shared<const Expression>(
      Kind::kIf, Symbol(), Value(), std::vector<Symbol>{},
      std::vector<ExprPtr>{std::move(cond), std::move(then_branch),
                           std::move(else_branch)},
      span);
}

ExprPtr Expression::let(Symbol x, ExprPtr init, ExprPtr body,
                        SourceSpan span) {
  return std::make_shared<const Expression>(
      Kind::kLet, x, Value(), std::vector<Symbol>{},
      std::vector<ExprPtr>{std::move(init), std::move(body)}, span);
}

const FunctionDecl* Program::find(Symbol name) const {
  for (const FunctionDecl& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

std::vector<Symbol> free_vars(const ExprPtr& e) { return e->free_vars(); }

namespace {

ExprPtr with_children(const Expression& e, std::vector<ExprPtr> children) {
  return std::make_shared<const Expression>(e.kind(), e.name(), e.value(),
                                            e.params(), std::move(children),
                                            e.span());
}

}  // namespace

ExprPtr substitute(const ExprPtr& e, const std::map<Symbol, Value>& bindings) {
  bool touched = false;
  for (Symbol x : e->free_vars()) {
    if (bindings.count(x) != 0) {
      touched = true;
      break;
    }
  }
  if (!touched) return e;
  switch (e->kind()) {
    case Expression::Kind::kVariable:
      return Expression::value(bindings.at(e->name()), e->span());
    case Expression::Kind::kLambda: {
      std::map<Symbol, Value> inner = bindings;
      for (Symbol p : e->params()) inner.erase(p);
      return with_children(*e, {substitute(e->body(), inner)});
    }
    case Expression::Kind::kLet: {
      std::map<Symbol, Value> inner = bindings;
      inner.erase(e->name());
      return with_children(
          *e, {substitute(e->child(0), bindings), substitute(e->child(1), inner)});
    }
    default: {
      std::vector<ExprPtr> children;
      children.reserve(e->children().size());
      for (const ExprPtr& c : e->children()) {
        children.push_back(substitute(c, bindings));
      }
      return with_children(*e, std::move(children));
    }
  }
}

ExprPtr substitute_expr(const ExprPtr& e, Symbol x, const ExprPtr& r) {
  if (!e->has_free_var(x)) return e;
  switch (e->kind()) {
    case Expression::Kind::kVariable:
      return r;
    case Expression::Kind::kLambda:
      for (Symbol p : e->params()) {
        if (r->has_free_var(p)) {
          throw std::invalid_argument("substitution would capture " + p.str());
        }
      }
      return with_children(*e, {substitute_expr(e->body(), x, r)});
    case Expression::Kind::kLet: {
      ExprPtr init = substitute_expr(e->child(0), x, r);
      ExprPtr body = e->child(1);
      if (e->name() != x) {
        if (r->has_free_var(e->name()) && body->has_free_var(x)) {
          throw std::invalid_argument("substitution would capture " +
                                      e->name().str());
        }
        body = substitute_expr(body, x, r);
      }
      return with_children(*e, {init, body});
    }
    default: {
      std::vector<ExprPtr> children;
      for (const ExprPtr& c : e->children()) {
        children.push_back(substitute_expr(c, x, r));
      }
      return with_children(*e, std::move(children));
    }
  }
}

ExprPtr materialize(const Closure& c) {
  std::map<Symbol, Value> bindings(c.captured.begin(), c.captured.end());
  return substitute(c.lambda, bindings);
}

Symbol make_tag(const std::string& program_id, int index) {
  return Symbol(program_id + ":" + std::to_string(index));
}

ExprPtr tag_expression(const ExprPtr& e, const std::string& program_id,
                       int* counter) {
  if (e->kind() == Expression::Kind::kVariable ||
      e->kind() == Expression::Kind::kValue) {
    return e;
  }
  if (e->kind() == Expression::Kind::kLambda) {
    Symbol tag = make_tag(program_id, ++*counter);
    return Expression::lambda(e->params(),
                              tag_expression(e->body(), program_id, counter),
                              tag, e->span());
  }
  std::vector<ExprPtr> children;
  for (const ExprPtr& c : e->children()) {
    children.push_back(tag_expression(c, program_id, counter));
  }
  return with_children(*e, std::move(children));
}

Program tag_anonymous_functions(const Program& program) {
  Program out = program;
  int counter = 0;
  for (FunctionDecl& f : out.functions) {
    f.body = tag_expression(f.body, out.id, &counter);
  }
  if (out.main) out.main = tag_expression(out.main, out.id, &counter);
  return out;
}

Symbol function_name(const Value& f) { return f.function_name(); }

const std::vector<Symbol>& function_params(const Value& f,
                                           const Program& program) {
  switch (f.kind()) {
    case Value::Kind::kClosure:
      return f.as_closure().lambda->params();
    case Value::Kind::kDefined: {
      const FunctionDecl* d = program.find(f.as_defined());
      if (d == nullptr) {
        throw std::logic_error("unknown function " + f.as_defined().str());
      }
      return d->params;
    }
    default:
      throw std::logic_error("args() is undefined for " + to_string(f));
  }
}

ExprPtr function_body(const Value& f, const Program& program) {
  switch (f.kind()) {
    case Value::Kind::kClosure:
      return materialize(f.as_closure())->body();
    case Value::Kind::kDefined: {
      const FunctionDecl* d = program.find(f.as_defined());
      if (d == nullptr) {
        throw std::logic_error("unknown function " + f.as_defined().str());
      }
      return d->body;
    }
    default:
      throw std::logic_error("body() is undefined for " + to_string(f));
  }
}

namespace {

using Renaming = std::vector<std::pair<Symbol, Symbol>>;

bool same_var(const Renaming& env, Symbol a, Symbol b) {
  for (auto it = env.rbegin(); it != env.rend(); ++it) {
    if (it->first == a || it->second == b) {
      return it->first == a && it->second == b;
    }
  }
  return a == b;
}

bool alpha_equal_in(const ExprPtr& a, const ExprPtr& b, bool tags,
                    Renaming* env) {
  if (a->kind() != b->kind()) return false;
  if (a->children().size() != b->children().size()) return false;
  switch (a->kind()) {
    case Expression::Kind::kVariable:
      return same_var(*env, a->name(), b->name());
    case Expression::Kind::kValue:
      return a->value() == b->value();
    case Expression::Kind::kLambda: {
      if (a->params().size() != b->params().size()) return false;
      if (tags && a->tag() != b->tag()) return false;
      std::size_t mark = env->size();
      for (std::size_t i = 0; i < a->params().size(); ++i) {
        env->emplace_back(a->params()[i], b->params()[i]);
      }
      bool ok = alpha_equal_in(a->body(), b->body(), tags, env);
      env->resize(mark);
      return ok;
    }
    case Expression::Kind::kLet: {
      if (!alpha_equal_in(a->child(0), b->child(0), tags, env)) return false;
      env->emplace_back(a->name(), b->name());
      bool ok = alpha_equal_in(a->child(1), b->child(1), tags, env);
      env->pop_back();
      return ok;
    }
    default:
      for (std::size_t i = 0; i < a->children().size(); ++i) {
        if (!alpha_equal_in(a->child(i), b->child(i), tags, env)) return false;
      }
      return true;
  }
}

}  // namespace

bool alpha_equal(const ExprPtr& a, const ExprPtr& b, bool compare_tags) {
  Renaming env;
  return alpha_equal_in(a, b, compare_tags, &env);
}

}  // namespace nc
