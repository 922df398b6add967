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

#include "nc/builtins.h"

#include <cmath>
#include <stdexcept>

namespace nc {
namespace {

using Args = std::span<const Value>;

BuiltinInfo pure(std::string_view name, int arity, std::string scheme,
                 std::string restricted, std::function<Value(Args)> fn) {
  BuiltinInfo b;
  b.name = Symbol(name);
  b.arity = arity;
  b.scheme = std::move(scheme);
  b.restricted_scheme = std::move(restricted);
  b.liftable = true;
  b.apply = std::move(fn);
  return b;
}

BuiltinInfo infix(BuiltinInfo b, std::string token, int precedence) {
  b.infix = std::move(token);
  b.precedence = precedence;
  return b;
}

BuiltinInfo arith(std::string_view name, double (*op)(double, double)) {
  return pure(name, 2, "(num, num) -> num", "(num, num) -> num",
              [op](Args a) {
                return Value::number(op(a[0].as_number(), a[1].as_number()));
              });
}

BuiltinInfo unary(std::string_view name, double (*op)(double)) {
  return pure(name, 1, "(num) -> num", "(num) -> num", [op](Args a) {
    return Value::number(op(a[0].as_number()));
  });
}

BuiltinInfo comparison(std::string_view name, bool (*op)(double, double)) {
  return pure(name, 2, "(num, num) -> bool", "(num, num) -> bool",
              [op](Args a) {
                return Value::boolean(op(a[0].as_number(), a[1].as_number()));
              });
}

BuiltinInfo sensor(std::string_view name, std::string_view type) {
  BuiltinInfo b;
  b.name = Symbol(name);
  b.kind = BuiltinKind::kSensor;
  b.scheme = "() -> " + std::string(type);
  b.restricted_scheme = b.scheme;
  return b;
}

Builtins make_standard() {
  Builtins out;
  out.add(infix(arith("+", [](double x, double y) { return x + y; }), "+", 5));
  out.add(infix(arith("-", [](double x, double y) { return x - y; }), "-", 5));
  out.add(infix(arith("*", [](double x, double y) { return x * y; }), "*", 6));
  out.add(infix(arith("/", [](double x, double y) { return x / y; }), "/", 6));
  out.add(infix(arith("%", [](double x, double y) { return std::fmod(x, y); }),
                "%", 6));
  out.add(unary("neg", [](double x) { return -x; }));
  out.add(unary("abs", [](double x) { return std::fabs(x); }));
  out.add(unary("floor", [](double x) { return std::floor(x); }));
  out.add(unary("sqrt", [](double x) { return std::sqrt(x); }));
  out.add(infix(comparison("<", [](double x, double y) { return x < y; }), "<",
                4));
  out.add(infix(comparison("<=", [](double x, double y) { return x <= y; }),
                "<=", 4));
  out.add(infix(comparison(">", [](double x, double y) { return x > y; }), ">",
                4));
  out.add(infix(comparison(">=", [](double x, double y) { return x >= y; }),
                ">=", 4));
  out.add(infix(pure("=", 2, "forall t. (t, t) -> bool",
                     "forall s. (s, s) -> bool",
                     [](Args a) { return Value::boolean(a[0] == a[1]); }),
                "==", 3));
  out.add(infix(pure("!=", 2, "forall t. (t, t) -> bool",
                     "forall s. (s, s) -> bool",
                     [](Args a) { return Value::boolean(a[0] != a[1]); }),
                "!=", 3));
  out.add(infix(pure("and", 2, "(bool, bool) -> bool", "(bool, bool) -> bool",
                     [](Args a) {
                       return Value::boolean(a[0].as_bool() && a[1].as_bool());
                     }),
                "&&", 2));
  out.add(infix(pure("or", 2, "(bool, bool) -> bool", "(bool, bool) -> bool",
                     [](Args a) {
                       return Value::boolean(a[0].as_bool() || a[1].as_bool());
                     }),
                "||", 1));
  out.add(pure("not", 1, "(bool) -> bool", "(bool) -> bool",
               [](Args a) { return Value::boolean(!a[0].as_bool()); }));
  out.add(pure("mux", 3, "forall t. (bool, t, t) -> t",
               "forall s. (bool, s, s) -> s",
               [](Args a) { return a[0].as_bool() ? a[1] : a[2]; }));
  // Ties keep the first argument, which is the accumulator in a fold.
  out.add(pure("min", 2, "forall t. (t, t) -> t", "forall s. (s, s) -> s",
               [](Args a) { return compare_values(a[1], a[0]) < 0 ? a[1] : a[0]; }));
  out.add(pure("max", 2, "forall t. (t, t) -> t", "forall s. (s, s) -> s",
               [](Args a) { return compare_values(a[1], a[0]) > 0 ? a[1] : a[0]; }));
  out.add(pure("pair", 2, "forall a b. (a, b) -> pair<a, b>",
               "forall s1 s2. (s1, s2) -> pair<s1, s2>",
               [](Args a) { return Value::pair(a[0], a[1]); }));
  out.add(pure("fst", 1, "forall a b. (pair<a, b>) -> a",
               "forall s1 s2. (pair<s1, s2>) -> s1",
               [](Args a) { return a[0].first(); }));
  out.add(pure("snd", 1, "forall a b. (pair<a, b>) -> b",
               "forall s1 s2. (pair<s1, s2>) -> s2",
               [](Args a) { return a[0].second(); }));
  out.add(pure("cons", 2, "forall t. (t, list<t>) -> list<t>",
               "forall s. (s, list<s>) -> list<s>",
               [](Args a) { return Value::cons(a[0], a[1]); }));
  out.add(pure("head", 1, "forall t. (list<t>) -> t",
               "forall s. (list<s>) -> s", [](Args a) {
                 if (a[0].kind() == Value::Kind::kNull) {
                   throw EvalError("head of Null");
                 }
                 return a[0].head();
               }));
  out.add(pure("tail", 1, "forall t. (list<t>) -> list<t>",
               "forall s. (list<s>) -> list<s>", [](Args a) {
                 if (a[0].kind() == Value::Kind::kNull) {
                   throw EvalError("tail of Null");
                 }
                 return a[0].tail();
               }));
  out.add(pure("isNull", 1, "forall t. (list<t>) -> bool",
               "forall s. (list<s>) -> bool", [](Args a) {
                 return Value::boolean(a[0].kind() == Value::Kind::kNull);
               }));

  BuiltinInfo consthood;
  consthood.name = Symbol("consthood");
  consthood.special = BuiltinSpecial::kConsthood;
  consthood.arity = 1;
  consthood.scheme = "forall t. (t) -> t";
  consthood.restricted_scheme = "forall s. (s) -> field<s>";
  out.add(consthood);

  BuiltinInfo map;
  map.name = Symbol("map");
  map.special = BuiltinSpecial::kMap;
  map.arity = 2;
  map.scheme = "forall a b. ((a) -> b, a) -> b";
  map.restricted_scheme = "forall s1 s2. ((s1) -> s2, s1) -> s2";
  map.liftable = true;
  out.add(map);
  BuiltinInfo map2 = map;
  map2.name = Symbol("map2");
  map2.arity = 3;
  map2.scheme = "forall a b c. ((a, b) -> c, a, b) -> c";
  map2.restricted_scheme =
      "forall s1 s2 s3. ((s1, s2) -> s3, s1, s2) -> s3";
  out.add(map2);

  for (const char* name : {"temperature", "mid", "randomKey", "cpuLoad"}) {
    out.add(sensor(name, "num"));
  }
  for (const char* name : {"isSource", "isObstacle", "source", "upgraded"}) {
    out.add(sensor(name, "bool"));
  }

  BuiltinInfo range;
  range.name = Symbol("nbrRange");
  range.kind = BuiltinKind::kRelational;
  range.scheme = "() -> num";
  range.restricted_scheme = "() -> field<num>";
  out.add(range);
  return out;
}

}  // namespace

const Builtins& Builtins::standard() {
  static const Builtins* instance = new Builtins(make_standard());
  return *instance;
}

const BuiltinInfo* Builtins::find(Symbol name) const {
  for (const auto& b : entries_) {
    if (b->name == name) return b.get();
  }
  return nullptr;
}

const BuiltinInfo* Builtins::find_infix(std::string_view token) const {
  for (const auto& b : entries_) {
    if (b->infix == token) return b.get();
  }
  return nullptr;
}

void Builtins::add_sensor(std::string_view name, std::string_view type) {
  if (type != "num" && type != "bool") {
    throw std::invalid_argument("sensor type must be num or bool: " +
                                std::string(type));
  }
  add(sensor(name, type));
}

void Builtins::add(BuiltinInfo info) {
  if (find(info.name) != nullptr) {
    throw std::invalid_argument("duplicate built-in " + info.name.str());
  }
  entries_.push_back(std::make_shared<const BuiltinInfo>(std::move(info)));
}

}  // namespace nc
