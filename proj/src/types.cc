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

#include "nc/types.h"

#include <algorithm>
#include <cctype>
#include <functional>
#include <mutex>
#include <unordered_map>

namespace nc {

VarKind meet(VarKind a, VarKind b) {
  if (a == b) return a;
  if (a == VarKind::kGeneral) return b;
  if (b == VarKind::kGeneral) return a;
  return VarKind::kLocalReturn;
}

char kind_letter(VarKind k) {
  switch (k) {
    case VarKind::kGeneral:
      return 't';
    case VarKind::kLocal:
      return 'l';
    case VarKind::kReturn:
      return 'r';
    case VarKind::kLocalReturn:
      return 's';
  }
  return '?';
}

TypePtr Type::var(int id) {
  return std::make_shared<const Type>(Kind::kVar, id, std::vector<TypePtr>{});
}

TypePtr Type::num() {
  static const TypePtr t =
      std::make_shared<const Type>(Kind::kNum, -1, std::vector<TypePtr>{});
  return t;
}

TypePtr Type::boolean() {
  static const TypePtr t =
      std::make_shared<const Type>(Kind::kBool, -1, std::vector<TypePtr>{});
  return t;
}

TypePtr Type::pair(TypePtr a, TypePtr b) {
  return std::make_shared<const Type>(Kind::kPair, -1,
                                      std::vector<TypePtr>{a, b});
}

TypePtr Type::list(TypePtr a) {
  return std::make_shared<const Type>(Kind::kList, -1, std::vector<TypePtr>{a});
}

TypePtr Type::arrow(std::vector<TypePtr> params, TypePtr result) {
  params.push_back(std::move(result));
  return std::make_shared<const Type>(Kind::kArrow, -1, std::move(params));
}

TypePtr Type::field(TypePtr a) {
  return std::make_shared<const Type>(Kind::kField, -1,
                                      std::vector<TypePtr>{a});
}

namespace {

TypePtr rebuild(const TypePtr& t, std::vector<TypePtr> args) {
  return std::make_shared<const Type>(t->kind(), t->var_id(), std::move(args));
}

const char* restriction_text(Restriction r) {
  switch (r) {
    case Restriction::kLambdaCapture:
      return "a field-typed variable is captured by a lambda";
    case Restriction::kFoldhoodCapture:
      return "a field-typed variable is captured by a foldhood body";
    case Restriction::kRepLocalReturn:
      return "rep requires a local-return type";
    case Restriction::kNbrLocalReturn:
      return "nbr requires a local-return type";
    case Restriction::kFieldElement:
      return "field of field";
    case Restriction::kLocalArgument:
      return "a field is passed where a local value is required";
    case Restriction::kNone:
      break;
  }
  return "kind mismatch";
}

}  // namespace

TypePtr TypeState::fresh(VarKind k, Restriction reason) {
  vars_.push_back({nullptr, k, reason, false});
  return Type::var(static_cast<int>(vars_.size()) - 1);
}

TypePtr TypeState::fresh_rigid() {
  TypePtr t = fresh();
  vars_.back().rigid = true;
  return t;
}

TypePtr TypeState::prune(const TypePtr& t) const {
  TypePtr cur = t;
  while (cur->kind() == Type::Kind::kVar && vars_[cur->var_id()].binding) {
    cur = vars_[cur->var_id()].binding;
  }
  return cur;
}

TypePtr TypeState::zonk(const TypePtr& t) const {
  TypePtr p = prune(t);
  if (p->args().empty()) return p;
  std::vector<TypePtr> args;
  args.reserve(p->args().size());
  bool changed = false;
  for (const TypePtr& a : p->args()) {
    args.push_back(zonk(a));
    changed = changed || args.back() != a;
  }
  return changed ? rebuild(p, std::move(args)) : p;
}

bool TypeState::occurs(int var, const TypePtr& t) const {
  TypePtr p = prune(t);
  if (p->kind() == Type::Kind::kVar) return p->var_id() == var;
  for (const TypePtr& a : p->args()) {
    if (occurs(var, a)) return true;
  }
  return false;
}

void TypeState::bind(int var, const TypePtr& t) {
  VarInfo& info = vars_[var];
  if (t->kind() == Type::Kind::kVar) {
    VarInfo& other = vars_[t->var_id()];
    if (info.rigid && other.rigid) {
      throw UnifyFailure{"cannot unify rigid " + to_string(Type::var(var), false) +
                         " with rigid " + to_string(t, false)};
    }
    if (info.rigid) {
      bind(t->var_id(), Type::var(var));
      return;
    }
    VarKind k = meet(info.kind, other.kind);
    if (k != other.kind) {
      other.kind = k;
      other.reason = info.reason;
    }
    info.binding = t;
    return;
  }
  if (info.rigid) {
    throw UnifyFailure{"cannot unify rigid " + to_string(Type::var(var), false) +
                       " with " + to_string(t, false)};
  }
  if (occurs(var, t)) {
    throw UnifyFailure{"occurs check: " + to_string(Type::var(var), false) +
                       " occurs in " + to_string(t, false)};
  }
  restrict(t, info.kind, info.reason);
  info.binding = t;
}

void TypeState::unify(const TypePtr& a0, const TypePtr& b0) {
  TypePtr a = prune(a0);
  TypePtr b = prune(b0);
  if (a == b) return;
  if (a->kind() == Type::Kind::kVar) {
    if (b->kind() == Type::Kind::kVar && a->var_id() == b->var_id()) return;
    bind(a->var_id(), b);
    return;
  }
  if (b->kind() == Type::Kind::kVar) {
    bind(b->var_id(), a);
    return;
  }
  if (a->kind() != b->kind() || a->args().size() != b->args().size()) {
    throw UnifyFailure{"cannot unify " + to_string(a, false) + " with " +
                       to_string(b, false)};
  }
  for (std::size_t i = 0; i < a->args().size(); ++i) {
    unify(a->args()[i], b->args()[i]);
  }
}

void TypeState::restrict(const TypePtr& t0, VarKind k, Restriction reason) {
  if (k == VarKind::kGeneral) return;
  TypePtr t = prune(t0);
  switch (t->kind()) {
    case Type::Kind::kVar: {
      VarInfo& info = vars_[t->var_id()];
      VarKind m = meet(info.kind, k);
      if (m != info.kind) {
        info.kind = m;
        if (reason != Restriction::kNone) info.reason = reason;
      }
      return;
    }
    case Type::Kind::kArrow:
      if (k != VarKind::kLocal) {
        restrict(t->result(), VarKind::kLocalReturn, reason);
      }
      return;
    case Type::Kind::kField:
      if (k != VarKind::kReturn) {
        throw UnifyFailure{std::string(restriction_text(reason)) + " (" +
                               to_string(t, false) + ")",
                           reason};
      }
      return;
    default:
      return;
  }
}

TypePtr TypeState::make_arrow(std::vector<TypePtr> params, TypePtr result) {
  restrict(result, VarKind::kReturn, Restriction::kNone);
  return Type::arrow(std::move(params), std::move(result));
}

TypePtr TypeState::make_field(TypePtr a) {
  restrict(a, VarKind::kLocalReturn, Restriction::kFieldElement);
  return Type::field(std::move(a));
}

namespace {

TypePtr rename(const TypePtr& t, const std::unordered_map<int, TypePtr>& m) {
  if (t->kind() == Type::Kind::kVar) {
    auto it = m.find(t->var_id());
    return it == m.end() ? t : it->second;
  }
  if (t->args().empty()) return t;
  std::vector<TypePtr> args;
  for (const TypePtr& a : t->args()) args.push_back(rename(a, m));
  return rebuild(t, std::move(args));
}

}  // namespace

TypePtr TypeState::instantiate(
    const TypeScheme& s,
    std::vector<std::shared_ptr<const Constraint>>* constraints) {
  std::unordered_map<int, TypePtr> m;
  for (std::size_t i = 0; i < s.quantified.size(); ++i) {
    m[s.quantified[i].first] =
        fresh(s.quantified[i].second,
              i < s.reasons.size() ? s.reasons[i] : Restriction::kNone);
  }
  if (constraints != nullptr) {
    for (const auto& c : s.constraints) {
      auto copy = std::make_shared<Constraint>(*c);
      for (TypePtr& p : copy->params) p = rename(p, m);
      for (TypePtr& a : copy->args) a = rename(a, m);
      if (copy->local_result) copy->local_result = rename(copy->local_result, m);
      if (copy->result) copy->result = rename(copy->result, m);
      constraints->push_back(std::move(copy));
    }
  }
  return rename(s.body, m);
}

void TypeState::free_vars(const TypePtr& t, std::vector<int>* out) const {
  TypePtr p = prune(t);
  if (p->kind() == Type::Kind::kVar) {
    if (std::find(out->begin(), out->end(), p->var_id()) == out->end()) {
      out->push_back(p->var_id());
    }
    return;
  }
  for (const TypePtr& a : p->args()) free_vars(a, out);
}

TypeScheme TypeState::generalize(
    const TypePtr& t,
    const std::vector<std::shared_ptr<const Constraint>>& constraints) const {
  std::vector<int> vars;
  TypePtr body = zonk(t);
  free_vars(body, &vars);
  std::vector<std::shared_ptr<Constraint>> cs;
  for (const auto& c : constraints) {
    auto copy = std::make_shared<Constraint>(*c);
    for (TypePtr& p : copy->params) p = zonk(p);
    for (TypePtr& a : copy->args) a = zonk(a);
    if (copy->local_result) copy->local_result = zonk(copy->local_result);
    if (copy->result) copy->result = zonk(copy->result);
    for (const TypePtr& p : copy->params) free_vars(p, &vars);
    for (const TypePtr& a : copy->args) free_vars(a, &vars);
    if (copy->local_result) free_vars(copy->local_result, &vars);
    if (copy->result) free_vars(copy->result, &vars);
    cs.push_back(std::move(copy));
  }
  std::unordered_map<int, TypePtr> m;
  TypeScheme s;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    m[vars[i]] = Type::var(static_cast<int>(i));
    s.quantified.emplace_back(static_cast<int>(i), kind(vars[i]));
    s.reasons.push_back(reason(vars[i]));
  }
  s.body = rename(body, m);
  for (auto& c : cs) {
    for (TypePtr& p : c->params) p = rename(p, m);
    for (TypePtr& a : c->args) a = rename(a, m);
    if (c->local_result) c->local_result = rename(c->local_result, m);
    if (c->result) c->result = rename(c->result, m);
    s.constraints.push_back(std::move(c));
  }
  return s;
}

namespace {

class Renderer {
 public:
  Renderer(const std::function<VarKind(int)>& kinds, bool show_kinds)
      : kinds_(kinds), show_kinds_(show_kinds) {}

  std::string render(const TypePtr& t) {
    switch (t->kind()) {
      case Type::Kind::kVar: {
        auto it = names_.find(t->var_id());
        if (it != names_.end()) return it->second;
        char letter = show_kinds_ ? kind_letter(kinds_(t->var_id())) : 't';
        std::string name = letter + std::to_string(names_.size() + 1);
        names_[t->var_id()] = name;
        return name;
      }
      case Type::Kind::kNum:
        return "num";
      case Type::Kind::kBool:
        return "bool";
      case Type::Kind::kPair:
        return "pair<" + render(t->args()[0]) + ", " + render(t->args()[1]) +
               ">";
      case Type::Kind::kList:
        return "list<" + render(t->args()[0]) + ">";
      case Type::Kind::kField:
        return "field<" + render(t->args()[0]) + ">";
      case Type::Kind::kArrow: {
        std::string out = "(";
        for (std::size_t i = 0; i < t->arity(); ++i) {
          if (i > 0) out += ", ";
          out += render(t->args()[i]);
        }
        return out + ") -> " + render(t->result());
      }
    }
    return "?";
  }

 private:
  const std::function<VarKind(int)>& kinds_;
  bool show_kinds_;
  std::unordered_map<int, std::string> names_;
};

}  // namespace

std::string TypeState::to_string(const TypePtr& t, bool show_kinds) const {
  std::function<VarKind(int)> kinds = [this](int v) { return kind(v); };
  return Renderer(kinds, show_kinds).render(zonk(t));
}

std::string to_string(const TypePtr& t) {
  std::function<VarKind(int)> kinds = [](int) { return VarKind::kGeneral; };
  return Renderer(kinds, false).render(t);
}

std::string to_string(const TypeScheme& s) {
  std::function<VarKind(int)> kinds = [&s](int v) {
    for (const auto& [id, k] : s.quantified) {
      if (id == v) return k;
    }
    return VarKind::kGeneral;
  };
  bool kinded = false;
  for (const auto& q : s.quantified) kinded = kinded || q.second != VarKind::kGeneral;
  Renderer r(kinds, kinded);
  std::string body = r.render(s.body);
  if (s.quantified.empty()) return body;
  std::string out = "forall";
  for (const auto& [id, k] : s.quantified) out += " " + r.render(Type::var(id));
  return out + ". " + body;
}

bool alpha_equivalent(const TypePtr& a, const TypePtr& b) {
  std::unordered_map<int, int> ab;
  std::unordered_map<int, int> ba;
  std::function<bool(const TypePtr&, const TypePtr&)> eq =
      [&](const TypePtr& x, const TypePtr& y) {
        if (x->kind() != y->kind() || x->args().size() != y->args().size()) {
          return false;
        }
        if (x->kind() == Type::Kind::kVar) {
          auto i = ab.find(x->var_id());
          auto j = ba.find(y->var_id());
          if (i == ab.end() && j == ba.end()) {
            ab[x->var_id()] = y->var_id();
            ba[y->var_id()] = x->var_id();
            return true;
          }
          return i != ab.end() && j != ba.end() && i->second == y->var_id();
        }
        for (std::size_t k = 0; k < x->args().size(); ++k) {
          if (!eq(x->args()[k], y->args()[k])) return false;
        }
        return true;
      };
  return eq(a, b);
}

namespace {

class SchemeParser {
 public:
  SchemeParser(const std::string& text, bool kinded)
      : text_(text), kinded_(kinded) {}

  TypeScheme parse() {
    TypeScheme s;
    skip();
    if (text_.compare(pos_, 6, "forall") == 0) {
      pos_ += 6;
      while (true) {
        skip();
        if (peek() == '.') {
          ++pos_;
          break;
        }
        std::string name = ident();
        var_for(name);
      }
    }
    s.body = type();
    skip();
    if (pos_ != text_.size()) error("trailing input");
    for (const auto& [name, id] : vars_) {
      s.quantified.emplace_back(id, kind_of(name));
    }
    std::sort(s.quantified.begin(), s.quantified.end());
    return s;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    throw std::invalid_argument("bad type '" + text_ + "': " + what);
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() {
    skip();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) error(std::string("expected ") + c);
    ++pos_;
  }
  std::string ident() {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) error("expected identifier");
    return text_.substr(start, pos_ - start);
  }
  VarKind kind_of(const std::string& name) const {
    if (!kinded_) return VarKind::kGeneral;
    switch (name[0]) {
      case 'l':
        return VarKind::kLocal;
      case 'r':
        return VarKind::kReturn;
      case 's':
        return VarKind::kLocalReturn;
      default:
        return VarKind::kGeneral;
    }
  }
  TypePtr var_for(const std::string& name) {
    auto it = vars_.find(name);
    if (it == vars_.end()) {
      it = vars_.emplace(name, static_cast<int>(vars_.size())).first;
    }
    return Type::var(it->second);
  }
  TypePtr type() {
    if (peek() == '(') {
      ++pos_;
      std::vector<TypePtr> params;
      if (peek() != ')') {
        params.push_back(type());
        while (peek() == ',') {
          ++pos_;
          params.push_back(type());
        }
      }
      expect(')');
      skip();
      if (text_.compare(pos_, 2, "->") == 0) {
        pos_ += 2;
        return Type::arrow(std::move(params), type());
      }
      if (params.size() != 1) error("expected ->");
      return params[0];
    }
    std::string name = ident();
    if (name == "num") return Type::num();
    if (name == "bool") return Type::boolean();
    if (name == "pair") {
      expect('<');
      TypePtr a = type();
      expect(',');
      TypePtr b = type();
      expect('>');
      return Type::pair(a, b);
    }
    if (name == "list" || name == "field") {
      expect('<');
      TypePtr a = type();
      expect('>');
      return name == "list" ? Type::list(a) : Type::field(a);
    }
    return var_for(name);
  }

  std::string text_;
  bool kinded_;
  std::size_t pos_ = 0;
  std::map<std::string, int> vars_;
};

}  // namespace

TypeScheme parse_scheme(const std::string& text, bool kinded) {
  return SchemeParser(text, kinded).parse();
}

TypePtr parse_type(const std::string& text, bool kinded) {
  return parse_scheme(text, kinded).body;
}

const TypeScheme& builtin_scheme(const BuiltinInfo& b, bool restricted) {
  static std::mutex mu;
  static auto* cache =
      new std::unordered_map<const BuiltinInfo*, std::pair<TypeScheme, TypeScheme>>;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache->find(&b);
  if (it == cache->end()) {
    it = cache
             ->emplace(&b, std::make_pair(parse_scheme(b.scheme, false),
                                          parse_scheme(b.restricted_scheme, true)))
             .first;
  }
  return restricted ? it->second.second : it->second.first;
}

const TypeScheme* ProgramTypes::find(Symbol name) const {
  for (const auto& [n, s] : functions) {
    if (n == name) return &s;
  }
  return nullptr;
}

namespace {

class HmInferer {
 public:
  HmInferer(TypeState* st, const SchemeEnv& D) : st_(*st), D_(D) {}

  Symbol current;
  TypePtr current_type;

  TypePtr infer(const ExprPtr& e, TypeEnv* A) {
    switch (e->kind()) {
      case Expression::Kind::kVariable: {
        auto it = A->find(e->name());
        if (it == A->end()) {
          throw TypeError(e->span(), "unbound variable " + e->name().str());
        }
        return it->second;
      }
      case Expression::Kind::kValue:
        return value_type(e->value(), e->span());
      case Expression::Kind::kLambda: {
        TypeEnv inner = *A;
        std::vector<TypePtr> params;
        for (Symbol p : e->params()) {
          params.push_back(st_.fresh());
          inner[p] = params.back();
        }
        TypePtr body = infer(e->body(), &inner);
        return Type::arrow(std::move(params), body);
      }
      case Expression::Kind::kApply: {
        TypePtr callee = infer(e->callee(), A);
        std::vector<TypePtr> args;
        for (std::size_t i = 0; i < e->arg_count(); ++i) {
          args.push_back(infer(e->arg(i), A));
        }
        TypePtr result = st_.fresh();
        unify(callee, Type::arrow(std::move(args), result), e->span(),
              "application");
        return result;
      }
      case Expression::Kind::kRep: {
        TypePtr init = infer(e->child(0), A);
        TypePtr update = infer(e->child(1), A);
        unify(update, Type::arrow({init}, init), e->span(), "rep");
        return init;
      }
      case Expression::Kind::kNbr:
        return infer(e->body(), A);
      case Expression::Kind::kFoldhood: {
        TypePtr init = infer(e->child(0), A);
        TypePtr agg = infer(e->child(1), A);
        TypePtr body = infer(e->child(2), A);
        unify(agg, Type::arrow({init, init}, init), e->child(1)->span(),
              "foldhood aggregator");
        unify(body, init, e->child(2)->span(), "foldhood body");
        return init;
      }
      default:
        throw TypeError(e->span(), "expression is not desugared");
    }
  }

  TypePtr value_type(const Value& v, const SourceSpan& span) {
    switch (v.kind()) {
      case Value::Kind::kNumber:
        return Type::num();
      case Value::Kind::kBool:
        return Type::boolean();
      case Value::Kind::kNull:
        return Type::list(st_.fresh());
      case Value::Kind::kPair:
        return Type::pair(value_type(v.first(), span),
                          value_type(v.second(), span));
      case Value::Kind::kCons: {
        TypePtr h = value_type(v.head(), span);
        unify(value_type(v.tail(), span), Type::list(h), span, "list value");
        return Type::list(h);
      }
      case Value::Kind::kBuiltin:
        return st_.instantiate(builtin_scheme(v.as_builtin(), false), nullptr);
      case Value::Kind::kDefined: {
        if (v.as_defined() == current) return current_type;
        auto it = D_.functions.find(v.as_defined());
        if (it == D_.functions.end()) {
          throw TypeError(span, "function " + v.as_defined().str() +
                                    " is used before its declaration");
        }
        return st_.instantiate(it->second, nullptr);
      }
      case Value::Kind::kClosure: {
        TypeEnv empty;
        return infer(materialize(v.as_closure()), &empty);
      }
      case Value::Kind::kField:
        throw TypeError(span, "neighbouring field values have no NC type");
    }
    throw TypeError(span, "unknown value");
  }

  void unify(const TypePtr& a, const TypePtr& b, const SourceSpan& span,
             const char* where) {
    try {
      st_.unify(a, b);
    } catch (const UnifyFailure& f) {
      throw TypeError(span, std::string(where) + ": " + f.message);
    }
  }

 private:
  TypeState& st_;
  const SchemeEnv& D_;
};

}  // namespace

namespace {

void collect_vars(const TypePtr& t, std::vector<int>* out) {
  if (t->kind() == Type::Kind::kVar &&
      std::find(out->begin(), out->end(), t->var_id()) == out->end()) {
    out->push_back(t->var_id());
  }
  for (const TypePtr& a : t->args()) collect_vars(a, out);
}

}  // namespace

TypePtr infer_expr(const SchemeEnv& D, const TypeEnv& A, const ExprPtr& e) {
  TypeState st;
  HmInferer inf(&st, D);
  // The caller's type variables are renamed into this state, consistently
  // across A.
  std::vector<int> vs;
  for (const auto& entry : A) collect_vars(entry.second, &vs);
  std::unordered_map<int, TypePtr> m;
  for (int v : vs) m[v] = st.fresh();
  TypeEnv renamed;
  for (const auto& [x, t] : A) renamed[x] = rename(t, m);
  return st.zonk(inf.infer(e, &renamed));
}

ProgramTypes infer_program(const Program& p, const Builtins* builtins) {
  SchemeEnv D;
  D.builtins = builtins;
  ProgramTypes out;
  for (const FunctionDecl& f : p.functions) {
    TypeState st;
    HmInferer inf(&st, D);
    TypeEnv A;
    std::vector<TypePtr> params;
    for (Symbol x : f.params) {
      params.push_back(st.fresh());
      A[x] = params.back();
    }
    TypePtr result = st.fresh();
    inf.current = f.name;
    inf.current_type = Type::arrow(params, result);
    TypePtr body = inf.infer(f.body, &A);
    inf.unify(body, result, f.body->span(), f.name.str().c_str());
    TypeScheme s = st.generalize(inf.current_type, {});
    D.functions[f.name] = s;
    out.functions.emplace_back(f.name, s);
  }
  TypeState st;
  HmInferer inf(&st, D);
  TypeEnv A;
  out.main = st.zonk(inf.infer(p.main, &A));
  return out;
}

bool value_has_type(const ProgramTypes& env, const Value& v, const TypePtr& t,
                    const Builtins* builtins) {
  SchemeEnv D;
  D.builtins = builtins;
  for (const auto& [n, s] : env.functions) D.functions[n] = s;
  TypeState st;
  std::vector<int> vs;
  collect_vars(t, &vs);
  std::unordered_map<int, TypePtr> m;
  for (int x : vs) m[x] = st.fresh_rigid();
  TypePtr target = rename(t, m);
  HmInferer inf(&st, D);
  try {
    st.unify(inf.value_type(v, SourceSpan{}), target);
  } catch (const UnifyFailure&) {
    return false;
  } catch (const TypeError&) {
    return false;
  }
  return true;
}

}  // namespace nc
