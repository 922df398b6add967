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

#include "nc/restricted.h"

#include <algorithm>
#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace nc {

const char* diagnostic_name(Diagnostic d) {
  switch (d) {
    case Diagnostic::kMismatch:
      return "type mismatch";
    case Diagnostic::kFieldCaptureInLambda:
      return "field captured in lambda";
    case Diagnostic::kFieldCaptureInFoldhood:
      return "field captured in foldhood body";
    case Diagnostic::kRepNotLocalReturn:
      return "rep on non-local-return type";
    case Diagnostic::kRepUpdateNotLambda:
      return "rep update is not a lambda";
    case Diagnostic::kFieldOfField:
      return "field of field";
    case Diagnostic::kFieldArgument:
      return "field argument to a non-liftable built-in";
  }
  return "error";
}

namespace {

Diagnostic diagnostic_for(Restriction r) {
  switch (r) {
    case Restriction::kLambdaCapture:
      return Diagnostic::kFieldCaptureInLambda;
    case Restriction::kFoldhoodCapture:
      return Diagnostic::kFieldCaptureInFoldhood;
    case Restriction::kRepLocalReturn:
      return Diagnostic::kRepNotLocalReturn;
    case Restriction::kFieldElement:
    case Restriction::kNbrLocalReturn:
      return Diagnostic::kFieldOfField;
    case Restriction::kLocalArgument:
      return Diagnostic::kFieldArgument;
    case Restriction::kNone:
      break;
  }
  return Diagnostic::kMismatch;
}

using ConstraintPtr = std::shared_ptr<const Constraint>;

bool contains(const std::vector<Symbol>& xs, Symbol x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

// Finds why a parameter of a function body must be local, if it is captured.
Restriction capture_of(const ExprPtr& e, Symbol x) {
  if (e->kind() == Expression::Kind::kFoldhood &&
      contains(e->child(2)->free_vars(), x)) {
    return Restriction::kFoldhoodCapture;
  }
  if (e->kind() == Expression::Kind::kLambda) {
    const std::vector<Symbol>& ps = e->params();
    if (contains(ps, x)) return Restriction::kNone;
    if (contains(e->free_vars(), x)) {
      Restriction inner = capture_of(e->body(), x);
      return inner == Restriction::kNone ? Restriction::kLambdaCapture : inner;
    }
    return Restriction::kNone;
  }
  for (const ExprPtr& c : e->children()) {
    Restriction r = capture_of(c, x);
    if (r != Restriction::kNone) return r;
  }
  return Restriction::kNone;
}

class Checker {
 public:
  Checker(TypeState* st, const SchemeEnv& D, const Builtins& builtins,
          std::vector<FoldRecord>* folds)
      : st_(*st), D_(D), builtins_(builtins), folds_(*folds) {}

  Symbol current;
  TypePtr current_type;
  const Program* program = nullptr;
  std::vector<ConstraintPtr> pending;

  TypePtr infer(const ExprPtr& e, const TypeEnv& A) {
    switch (e->kind()) {
      case Expression::Kind::kVariable: {
        auto it = A.find(e->name());
        if (it == A.end()) {
          throw TypeError(e->span(), "unbound variable " + e->name().str());
        }
        return it->second;
      }
      case Expression::Kind::kValue:
        return value_type(e->value(), e->span());
      case Expression::Kind::kLambda:
        return infer_lambda(e, A, nullptr);
      case Expression::Kind::kApply:
        return infer_apply(e, A);
      case Expression::Kind::kRep: {
        const ExprPtr& update = e->child(1);
        if (update->kind() != Expression::Kind::kLambda ||
            update->params().size() != 1) {
          throw RestrictionError(update->span(), Diagnostic::kRepUpdateNotLambda,
                                 "the update of rep must be a one-parameter "
                                 "lambda");
        }
        TypePtr init = infer(e->child(0), A);
        restrict(init, VarKind::kLocalReturn, Restriction::kRepLocalReturn,
                 e->child(0)->span());
        TypePtr fn = infer_lambda(update, A, &init);
        unify(fn, Type::arrow({init}, init), e->span());
        return init;
      }
      case Expression::Kind::kNbr: {
        TypePtr body = infer(e->body(), A);
        restrict(body, VarKind::kLocalReturn, Restriction::kFieldElement,
                 e->span());
        return st_.make_field(body);
      }
      case Expression::Kind::kFoldhood: {
        TypePtr init = infer(e->child(0), A);
        restrict(init, VarKind::kLocalReturn, Restriction::kNone,
                 e->child(0)->span());
        TypePtr agg = infer(e->child(1), A);
        unify(agg, st_.make_arrow({init, init}, init), e->child(1)->span());
        for (Symbol y : e->child(2)->free_vars()) {
          restrict(A.at(y), VarKind::kLocal, Restriction::kFoldhoodCapture,
                   e->child(2)->span());
        }
        TypePtr body = infer(e->child(2), A);
        auto c = std::make_shared<Constraint>();
        c->kind = Constraint::Kind::kMember;
        c->local_result = init;
        c->args = {body};
        c->record = static_cast<int>(folds_.size());
        c->span = e->child(2)->span();
        c->what = "foldhood";
        folds_.push_back(FoldRecord{e->span(), FoldBody::kUnresolved});
        pending.push_back(c);
        solve();
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
        return Type::list(st_.fresh(VarKind::kLocalReturn));
      case Value::Kind::kPair: {
        TypePtr a = value_type(v.first(), span);
        TypePtr b = value_type(v.second(), span);
        restrict(a, VarKind::kLocalReturn, Restriction::kNone, span);
        restrict(b, VarKind::kLocalReturn, Restriction::kNone, span);
        return Type::pair(a, b);
      }
      case Value::Kind::kCons: {
        TypePtr h = value_type(v.head(), span);
        restrict(h, VarKind::kLocalReturn, Restriction::kNone, span);
        unify(value_type(v.tail(), span), Type::list(h), span);
        return Type::list(h);
      }
      case Value::Kind::kBuiltin:
        return st_.instantiate(builtin_scheme(v.as_builtin(), true), nullptr);
      case Value::Kind::kDefined: {
        if (v.as_defined() == current) return current_type;
        auto it = D_.functions.find(v.as_defined());
        if (it == D_.functions.end()) {
          throw TypeError(span, "function " + v.as_defined().str() +
                                    " is used before its declaration");
        }
        std::vector<ConstraintPtr> cs;
        TypePtr t = st_.instantiate(it->second, &cs);
        pending.insert(pending.end(), cs.begin(), cs.end());
        return t;
      }
      case Value::Kind::kClosure:
        return infer(materialize(v.as_closure()), TypeEnv{});
      case Value::Kind::kField:
        throw TypeError(span, "neighbouring field values cannot be typed");
    }
    throw TypeError(span, "unknown value");
  }

  void unify(const TypePtr& a, const TypePtr& b, const SourceSpan& span) {
    try {
      st_.unify(a, b);
    } catch (const UnifyFailure& f) {
      throw RestrictionError(span, diagnostic_for(f.reason), f.message);
    }
  }

  void restrict(const TypePtr& t, VarKind k, Restriction r,
                const SourceSpan& span) {
    try {
      st_.restrict(t, k, r);
    } catch (const UnifyFailure& f) {
      throw RestrictionError(span, diagnostic_for(f.reason), f.message);
    }
  }

  void solve() {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t i = 0; i < pending.size();) {
        ConstraintPtr c = pending[i];
        if (discharge(*c, false)) {
          pending.erase(pending.begin() + static_cast<long>(i));
          progress = true;
        } else {
          ++i;
        }
      }
    }
  }

  // Resolves undetermined constraints as local, innermost first.
  void default_all() {
    solve();
    while (!pending.empty()) {
      ConstraintPtr c = pending.front();
      pending.erase(pending.begin());
      discharge(*c, true);
      solve();
    }
  }

  // Defaults the constraints that cannot be influenced through `t`.
  void default_unreachable(const TypePtr& t) {
    solve();
    while (true) {
      std::unordered_set<int> reach;
      std::vector<int> vs;
      st_.free_vars(t, &vs);
      reach.insert(vs.begin(), vs.end());
      bool grew = true;
      std::vector<bool> linked(pending.size(), false);
      while (grew) {
        grew = false;
        for (std::size_t i = 0; i < pending.size(); ++i) {
          if (linked[i]) continue;
          std::vector<int> cv = constraint_vars(*pending[i]);
          bool touches = false;
          for (int v : cv) touches = touches || reach.count(v) != 0;
          if (touches) {
            linked[i] = true;
            reach.insert(cv.begin(), cv.end());
            grew = true;
          }
        }
      }
      std::size_t victim = pending.size();
      for (std::size_t i = 0; i < pending.size(); ++i) {
        if (!linked[i]) {
          victim = i;
          break;
        }
      }
      if (victim == pending.size()) return;
      ConstraintPtr c = pending[victim];
      pending.erase(pending.begin() + static_cast<long>(victim));
      discharge(*c, true);
      solve();
    }
  }

 private:
  std::vector<int> constraint_vars(const Constraint& c) const {
    std::vector<int> out;
    for (const TypePtr& a : c.args) st_.free_vars(a, &out);
    if (c.result) st_.free_vars(c.result, &out);
    for (const TypePtr& p : c.params) st_.free_vars(p, &out);
    if (c.local_result) st_.free_vars(c.local_result, &out);
    return out;
  }

  bool may_be_field(const TypePtr& t) const {
    TypePtr p = st_.prune(t);
    if (p->kind() != Type::Kind::kVar) return false;
    VarKind k = st_.kind(p->var_id());
    return k == VarKind::kGeneral || k == VarKind::kReturn;
  }

  bool is_field(const TypePtr& t) const {
    return st_.prune(t)->kind() == Type::Kind::kField;
  }

  void local_arg(const TypePtr& arg, const TypePtr& param,
                 const SourceSpan& span) {
    TypePtr p = st_.prune(arg);
    if (p->kind() == Type::Kind::kField) {
      unify(p->args()[0], param, span);
    } else {
      unify(p, param, span);
    }
  }

  void mark(int record, FoldBody b) {
    FoldBody& cur = folds_[record].body;
    if (cur == FoldBody::kUnresolved || cur == b) {
      cur = b;
    } else {
      cur = FoldBody::kBoth;
    }
  }

  // Returns true when the constraint is fully resolved. With `force`, open
  // alternatives are resolved as local.
  bool discharge(const Constraint& c, bool force) {
    if (c.kind == Constraint::Kind::kMember) {
      const TypePtr& body = c.args[0];
      if (is_field(body)) {
        unify(st_.prune(body)->args()[0], c.local_result, c.span);
        mark(c.record, FoldBody::kField);
        return true;
      }
      if (may_be_field(body) && !force) return false;
      unify(body, c.local_result, c.span);
      mark(c.record, FoldBody::kLocal);
      return true;
    }
    bool any_field = false;
    bool any_unknown = false;
    for (const TypePtr& a : c.args) {
      if (is_field(a)) {
        any_field = true;
      } else if (may_be_field(a)) {
        any_unknown = true;
      }
    }
    if (any_unknown && !any_field && !force) {
      TypePtr r = st_.prune(c.result);
      bool result_local = !is_field(r) && !may_be_field(r);
      if (!result_local) return false;
      force = true;
    }
    for (std::size_t i = 0; i < c.args.size(); ++i) {
      if (may_be_field(c.args[i]) && !force) continue;
      local_arg(c.args[i], c.params[i], c.span);
    }
    if (any_field) {
      unify(c.result, st_.make_field(c.local_result), c.span);
    } else if (!any_unknown || force) {
      unify(c.result, c.local_result, c.span);
    }
    return !any_unknown || force;
  }

  TypePtr infer_lambda(const ExprPtr& e, const TypeEnv& A,
                       const TypePtr* param_type) {
    for (Symbol y : e->free_vars()) {
      restrict(A.at(y), VarKind::kLocal, Restriction::kLambdaCapture,
               e->span());
    }
    TypeEnv inner = A;
    std::vector<TypePtr> params;
    for (Symbol p : e->params()) {
      params.push_back(param_type != nullptr ? *param_type : st_.fresh());
      inner[p] = params.back();
    }
    TypePtr body = infer(e->body(), inner);
    restrict(body, VarKind::kReturn, Restriction::kNone, e->body()->span());
    return st_.make_arrow(std::move(params), body);
  }

  TypePtr infer_apply(const ExprPtr& e, const TypeEnv& A) {
    const ExprPtr& callee = e->callee();
    std::vector<TypePtr> args;
    if (callee->kind() == Expression::Kind::kValue &&
        callee->value().kind() == Value::Kind::kBuiltin &&
        callee->value().as_builtin().liftable) {
      const BuiltinInfo& b = callee->value().as_builtin();
      TypePtr sig = st_.instantiate(builtin_scheme(b, true), nullptr);
      if (sig->arity() != e->arg_count()) {
        throw RestrictionError(e->span(), Diagnostic::kMismatch,
                               b.name.str() + " expects " +
                                   std::to_string(sig->arity()) + " arguments");
      }
      for (std::size_t i = 0; i < e->arg_count(); ++i) {
        args.push_back(infer(e->arg(i), A));
      }
      auto c = std::make_shared<Constraint>();
      c->kind = Constraint::Kind::kLift;
      c->params.assign(sig->args().begin(), sig->args().end() - 1);
      c->local_result = sig->result();
      c->args = args;
      c->result = st_.fresh(VarKind::kReturn);
      c->span = e->span();
      c->what = b.name.str();
      pending.push_back(c);
      solve();
      return c->result;
    }
    TypePtr fn = infer(callee, A);
    for (std::size_t i = 0; i < e->arg_count(); ++i) {
      args.push_back(infer(e->arg(i), A));
    }
    TypePtr result = st_.fresh(VarKind::kReturn);
    try {
      unify(fn, st_.make_arrow(args, result), e->span());
    } catch (const RestrictionError& err) {
      if (err.diagnostic() == Diagnostic::kMismatch) explain_capture(e, args);
      throw;
    }
    solve();
    return result;
  }

  // Reports a field argument passed to a parameter the callee captures.
  void explain_capture(const ExprPtr& e, const std::vector<TypePtr>& args) {
    const ExprPtr& callee = e->callee();
    if (callee->kind() == Expression::Kind::kLambda) {
      explain_capture(e, args, callee->params(), callee->body(), "lambda");
      return;
    }
    if (program == nullptr || callee->kind() != Expression::Kind::kValue ||
        callee->value().kind() != Value::Kind::kDefined) {
      return;
    }
    Symbol name = callee->value().as_defined();
    for (const FunctionDecl& f : program->functions) {
      if (f.name == name) explain_capture(e, args, f.params, f.body, name.str());
    }
  }

  void explain_capture(const ExprPtr& e, const std::vector<TypePtr>& args,
                       const std::vector<Symbol>& params, const ExprPtr& body,
                       const std::string& what) {
    if (params.size() != args.size()) return;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (!is_field(args[i])) continue;
      Restriction r = capture_of(body, params[i]);
      if (r == Restriction::kNone) continue;
      throw RestrictionError(e->arg(i)->span(), diagnostic_for(r),
                             "field argument for captured parameter " +
                                 params[i].str() + " of " + what);
    }
  }

  TypeState& st_;
  const SchemeEnv& D_;
  const Builtins& builtins_;
  std::vector<FoldRecord>& folds_;
};

}  // namespace

RestrictedType check_restricted(const SchemeEnv& D, const TypeEnv& A,
                                const ExprPtr& e) {
  const Builtins& b = D.builtins != nullptr ? *D.builtins : Builtins::standard();
  TypeState st;
  RestrictedType out;
  Checker checker(&st, D, b, &out.folds);
  // The caller's variables keep their identity but live in this state.
  std::unordered_map<int, TypePtr> m;
  TypeEnv env;
  std::function<TypePtr(const TypePtr&)> import = [&](const TypePtr& t) {
    if (t->kind() == Type::Kind::kVar) {
      auto it = m.find(t->var_id());
      if (it == m.end()) it = m.emplace(t->var_id(), st.fresh()).first;
      return it->second;
    }
    if (t->args().empty()) return t;
    std::vector<TypePtr> args;
    for (const TypePtr& a : t->args()) args.push_back(import(a));
    return std::make_shared<const Type>(t->kind(), -1, std::move(args));
  };
  for (const auto& [x, t] : A) env[x] = import(t);
  TypePtr t = checker.infer(e, env);
  checker.default_all();
  out.type = st.zonk(t);
  out.text = st.to_string(t, true);
  return out;
}

RestrictedProgramTypes check_restricted_program(const Program& p,
                                                const Builtins* builtins) {
  const Builtins& b = builtins != nullptr ? *builtins : Builtins::standard();
  SchemeEnv D;
  D.builtins = &b;
  RestrictedProgramTypes out;
  for (const FunctionDecl& f : p.functions) {
    TypeState st;
    Checker checker(&st, D, b, &out.folds);
    checker.program = &p;
    TypeEnv A;
    std::vector<TypePtr> params;
    for (Symbol x : f.params) {
      params.push_back(st.fresh());
      A[x] = params.back();
    }
    TypePtr result = st.fresh(VarKind::kReturn);
    checker.current = f.name;
    checker.current_type = st.make_arrow(params, result);
    TypePtr body = checker.infer(f.body, A);
    checker.unify(body, result, f.body->span());
    checker.default_unreachable(checker.current_type);
    TypeScheme s = st.generalize(checker.current_type, checker.pending);
    D.functions[f.name] = s;
    out.functions.emplace_back(f.name, s);
  }
  TypeState st;
  Checker checker(&st, D, b, &out.folds);
  checker.program = &p;
  TypePtr t = checker.infer(p.main, TypeEnv{});
  checker.default_all();
  out.main = st.zonk(t);
  out.main_text = st.to_string(t, true);
  return out;
}

TypePtr erase(const TypePtr& t) {
  if (t->kind() == Type::Kind::kField) return erase(t->args()[0]);
  if (t->args().empty()) return t;
  std::vector<TypePtr> args;
  for (const TypePtr& a : t->args()) args.push_back(erase(a));
  return std::make_shared<const Type>(t->kind(), t->var_id(), std::move(args));
}

TypeScheme erase(const TypeScheme& s) {
  TypeState st;
  std::unordered_map<int, TypePtr> m;
  std::function<TypePtr(const TypePtr&)> import = [&](const TypePtr& t) {
    if (t->kind() == Type::Kind::kVar) {
      auto it = m.find(t->var_id());
      if (it == m.end()) it = m.emplace(t->var_id(), st.fresh()).first;
      return it->second;
    }
    if (t->kind() == Type::Kind::kField) return import(t->args()[0]);
    if (t->args().empty()) return t;
    std::vector<TypePtr> args;
    for (const TypePtr& a : t->args()) args.push_back(import(a));
    return std::make_shared<const Type>(t->kind(), -1, std::move(args));
  };
  TypePtr body = import(s.body);
  // Outstanding obligations hold pointwise once fields are erased.
  for (const auto& c : s.constraints) {
    if (c->kind == Constraint::Kind::kMember) {
      st.unify(import(c->args[0]), import(c->local_result));
      continue;
    }
    for (std::size_t i = 0; i < c->args.size(); ++i) {
      st.unify(import(c->args[i]), import(c->params[i]));
    }
    st.unify(import(c->result), import(c->local_result));
  }
  return st.generalize(body, {});
}

SchemeEnv erase_env(const SchemeEnv& D) {
  SchemeEnv out;
  out.builtins = D.builtins;
  for (const auto& [n, s] : D.functions) out.functions[n] = erase(s);
  return out;
}

TypeEnv erase_env(const TypeEnv& A) {
  TypeEnv out;
  for (const auto& [x, t] : A) out[x] = erase(t);
  return out;
}

}  // namespace nc
