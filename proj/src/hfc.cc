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

#include "nc/hfc.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <set>
#include <span>
#include <sstream>

namespace nc {

namespace {

struct Frame {
  const Frame* parent = nullptr;
  std::vector<std::pair<Symbol, Value>> vars;
};

Value make_field(std::vector<std::pair<DeviceId, Value>> entries) {
  auto f = std::make_shared<NeighbourField>();
  f->entries = std::move(entries);
  return Value::field(std::move(f));
}

std::vector<DeviceId> domain_with(const TreeEnv& env, DeviceId self) {
  std::vector<DeviceId> out = env.domain();
  if (!env.contains(self)) {
    out.insert(std::upper_bound(out.begin(), out.end(), self), self);
  }
  return out;
}

class HfcFiring {
 public:
  HfcFiring(DeviceId self, const SensorState& sigma,
            const std::unordered_map<Symbol, const FunctionDecl*>& functions,
            const EvalOptions& options)
      : self_(self), sigma_(sigma), functions_(functions), options_(options) {}

  TreePtr eval(const TreeEnv& env, const Frame& frame, const ExprPtr& e) {
    tick();
    switch (e->kind()) {
      case Expression::Kind::kVariable:
        return leaf(local_view(env, lookup(frame, e->name())));
      case Expression::Kind::kValue:
        return leaf(local_view(env, e->value()));
      case Expression::Kind::kLambda:
        return leaf(make_closure(frame, e));
      case Expression::Kind::kApply: {
        TreePtr callee = eval(project_i(env, 1), frame, e->callee());
        std::vector<TreePtr> args;
        args.reserve(e->arg_count());
        for (std::size_t i = 0; i < e->arg_count(); ++i) {
          args.push_back(eval(project_i(env, i + 2), frame, e->arg(i)));
        }
        return apply(env, std::move(callee), std::move(args));
      }
      case Expression::Kind::kRep:
        return eval_rep(env, frame, e);
      case Expression::Kind::kNbr: {
        TreeEnv env1 = project_i(env, 1);
        TreePtr body = eval(env1, frame, e->body());
        if (body->root.is_field()) throw EvalError("nbr of a field value");
        std::vector<std::pair<DeviceId, Value>> entries;
        for (const auto& [d, t] : env1) {
          if (d != self_) entries.emplace_back(d, t->root);
        }
        auto at = std::lower_bound(
            entries.begin(), entries.end(), self_,
            [](const auto& entry, DeviceId d) { return entry.first < d; });
        entries.insert(at, {self_, body->root});
        return node(make_field(std::move(entries)), {body});
      }
      case Expression::Kind::kFoldhood:
        return eval_foldhood(env, frame, e);
      default:
        throw EvalError("expression is not desugared");
    }
  }

  Value apply_pure(const Value& f, std::vector<Value> args) {
    std::vector<TreePtr> trees;
    trees.reserve(args.size());
    for (Value& v : args) trees.push_back(leaf(std::move(v)));
    return apply(TreeEnv(), leaf(f), std::move(trees))->root;
  }

 private:
  void tick() {
    if (++steps_ > options_.step_budget) {
      throw StepBudgetExceeded("step budget of " +
                               std::to_string(options_.step_budget) +
                               " rule applications exceeded");
    }
  }

  Value local_view(const TreeEnv& env, const Value& v) const {
    if (!v.is_field()) return v;
    return restrict_field(v, domain_with(env, self_));
  }

  const Value& lookup(const Frame& frame, Symbol x) const {
    for (const Frame* f = &frame; f != nullptr; f = f->parent) {
      for (const auto& [name, v] : f->vars) {
        if (name == x) return v;
      }
    }
    throw EvalError("unbound variable " + x.str());
  }

  Value make_closure(const Frame& frame, const ExprPtr& lambda) {
    auto c = std::make_shared<Closure>();
    c->lambda = lambda;
    for (Symbol y : lambda->free_vars()) {
      c->captured.emplace_back(y, lookup(frame, y));
    }
    return Value::closure(std::move(c));
  }

  TreePtr eval_rep(const TreeEnv& env, const Frame& frame, const ExprPtr& e) {
    const ExprPtr& update = e->child(1);
    if (update->kind() != Expression::Kind::kLambda ||
        update->params().size() != 1) {
      throw EvalError("rep update must be an anonymous unary function");
    }
    TreePtr init = eval(project_i(env, 1), frame, e->child(0));
    TreeEnv env2 = project_i(env, 2);
    const TreePtr* previous = env2.find(self_);
    Frame inner{&frame, {{update->params()[0],
                          previous != nullptr ? (*previous)->root
                                              : init->root}}};
    TreePtr body = eval(env2, inner, update->body());
    return node(body->root, {init, body});
  }

  TreePtr eval_foldhood(const TreeEnv& env, const Frame& frame,
                        const ExprPtr& e) {
    TreePtr init = eval(project_i(env, 1), frame, e->child(0));
    TreePtr agg = eval(project_i(env, 2), frame, e->child(1));
    TreeEnv env3 = project_i(env, 3);
    TreePtr body = eval(env3, frame, e->child(2));
    Value acc = init->root;
    if (body->root.is_field()) {
      for (const auto& [d, v] : body->root.as_field().entries) {
        if (d != self_) acc = apply_pure(agg->root, {acc, v});
      }
    } else {
      for (const auto& [d, t] : env3) {
        if (d != self_) acc = apply_pure(agg->root, {acc, body->root});
      }
    }
    return node(std::move(acc), {init, agg, body});
  }

  // Pointwise application over the common domain of the field arguments.
  template <typename F>
  Value lift(const std::vector<Value>& args, std::size_t first, F point) {
    std::optional<std::vector<DeviceId>> domain;
    for (std::size_t i = first; i < args.size(); ++i) {
      if (!args[i].is_field()) continue;
      std::vector<DeviceId> ds;
      for (const auto& entry : args[i].as_field().entries) {
        ds.push_back(entry.first);
      }
      if (!domain) {
        domain = std::move(ds);
      } else {
        std::vector<DeviceId> both;
        std::set_intersection(domain->begin(), domain->end(), ds.begin(),
                              ds.end(), std::back_inserter(both));
        domain = std::move(both);
      }
    }
    if (!domain) return point(args);
    std::vector<std::pair<DeviceId, Value>> entries;
    for (DeviceId d : *domain) {
      std::vector<Value> at = args;
      for (std::size_t i = first; i < at.size(); ++i) {
        if (at[i].is_field()) at[i] = *args[i].as_field().find(d);
      }
      entries.emplace_back(d, point(at));
    }
    return make_field(std::move(entries));
  }

  Value apply_builtin(const TreeEnv& env, const Value& f,
                      const std::vector<Value>& args) {
    const BuiltinInfo& b = f.as_builtin();
    switch (b.kind) {
      case BuiltinKind::kSensor:
        return sigma_.read(b, self_);
      case BuiltinKind::kRelational: {
        std::vector<std::pair<DeviceId, Value>> entries;
        for (DeviceId d : domain_with(project_f(env, f), self_)) {
          entries.emplace_back(d, sigma_.read_relational(b, self_, d));
        }
        return make_field(std::move(entries));
      }
      case BuiltinKind::kPure:
        break;
    }
    switch (b.special) {
      case BuiltinSpecial::kConsthood: {
        if (args[0].is_field()) return args[0];
        std::vector<std::pair<DeviceId, Value>> entries;
        for (DeviceId d : domain_with(env, self_)) {
          entries.emplace_back(d, args[0]);
        }
        return make_field(std::move(entries));
      }
      case BuiltinSpecial::kMap:
        return lift(args, 1, [&](const std::vector<Value>& at) {
          return apply_pure(at[0], {at.begin() + 1, at.end()});
        });
      case BuiltinSpecial::kNone:
        break;
    }
    return lift(args, 0, [&](const std::vector<Value>& at) {
      return b.apply(std::span<const Value>(at));
    });
  }

  TreePtr apply(const TreeEnv& env, TreePtr callee, std::vector<TreePtr> args) {
    const Value f = callee->root;
    switch (f.kind()) {
      case Value::Kind::kBuiltin: {
        const BuiltinInfo& b = f.as_builtin();
        if (b.arity != static_cast<int>(args.size())) {
          throw EvalError(b.name.str() + " applied to " +
                          std::to_string(args.size()) + " arguments");
        }
        std::vector<Value> vs;
        vs.reserve(args.size());
        for (const TreePtr& a : args) vs.push_back(a->root);
        Value v = apply_builtin(env, f, vs);
        args.insert(args.begin(), std::move(callee));
        args.push_back(leaf(v));
        return node(std::move(v), std::move(args));
      }
      case Value::Kind::kDefined:
      case Value::Kind::kClosure: {
        Frame frame;
        const ExprPtr* body;
        const std::vector<Symbol>* params;
        if (f.kind() == Value::Kind::kDefined) {
          auto it = functions_.find(f.as_defined());
          if (it == functions_.end()) {
            throw EvalError("unknown function " + f.as_defined().str());
          }
          body = &it->second->body;
          params = &it->second->params;
        } else {
          const Closure& c = f.as_closure();
          frame.vars = c.captured;
          body = &c.lambda->body();
          params = &c.lambda->params();
        }
        if (params->size() != args.size()) {
          throw EvalError(to_string(f) + " applied to " +
                          std::to_string(args.size()) + " arguments");
        }
        for (std::size_t i = 0; i < args.size(); ++i) {
          frame.vars.emplace_back((*params)[i], args[i]->root);
        }
        TreePtr result = eval(project_f(env, f), frame, *body);
        args.insert(args.begin(), std::move(callee));
        Value root = result->root;
        args.push_back(std::move(result));
        return node(std::move(root), std::move(args));
      }
      default:
        throw EvalError("cannot apply " + to_string(f));
    }
  }

  DeviceId self_;
  const SensorState& sigma_;
  const std::unordered_map<Symbol, const FunctionDecl*>& functions_;
  const EvalOptions& options_;
  std::uint64_t steps_ = 0;
};

}  // namespace

Value restrict_field(const Value& phi, const std::vector<DeviceId>& domain) {
  std::vector<std::pair<DeviceId, Value>> entries;
  for (const auto& entry : phi.as_field().entries) {
    if (std::binary_search(domain.begin(), domain.end(), entry.first)) {
      entries.push_back(entry);
    }
  }
  return make_field(std::move(entries));
}

HfcEvaluator::HfcEvaluator(const Program& program, EvalOptions options)
    : program_(program), options_(options) {
  for (const FunctionDecl& f : program_.functions) functions_[f.name] = &f;
}

TreePtr HfcEvaluator::evaluate(DeviceId self, const TreeEnv& env,
                               const SensorState& sigma, const ExprPtr& e) {
  HfcFiring firing(self, sigma, functions_, options_);
  return firing.eval(env, Frame{}, e);
}

TreePtr HfcEvaluator::fire(DeviceId self, const TreeEnv& env,
                           const SensorState& sigma) {
  return evaluate(self, env, sigma, program_.main);
}

HfcCheckResult check_hfc_prime(const Program& p, const Builtins* builtins) {
  HfcCheckResult out;
  try {
    out.types = check_restricted_program(p, builtins);
  } catch (const RestrictionError& e) {
    out.ok = false;
    out.span = e.span();
    out.message = e.what();
    switch (e.diagnostic()) {
      case Diagnostic::kFieldCaptureInLambda:
      case Diagnostic::kFieldCaptureInFoldhood:
        out.restriction = HfcRestriction::kR2;
        break;
      case Diagnostic::kFieldArgument:
      case Diagnostic::kFieldOfField:
        out.restriction = HfcRestriction::kR1;
        break;
      default:
        out.restriction = HfcRestriction::kOther;
        break;
    }
  } catch (const TypeError& e) {
    out.ok = false;
    out.span = e.span();
    out.message = e.what();
    out.restriction = HfcRestriction::kOther;
  }
  return out;
}

RefactorContext refactor_context(const Program& p) {
  RefactorContext ctx;
  Program decls = p;
  decls.main = Expression::value(Value::number(0));
  RestrictedProgramTypes types = check_restricted_program(decls);
  for (auto& [name, scheme] : types.functions) ctx.D.functions[name] = scheme;
  return ctx;
}

namespace {

Symbol fresh_tag() {
  static std::atomic<int> counter{0};
  return make_tag("refactor", ++counter);
}

struct Redex {
  Symbol x;
  ExprPtr body;
  ExprPtr arg;
};

Redex match_redex(const ExprPtr& e) {
  if (e->kind() != Expression::Kind::kApply || e->arg_count() != 1 ||
      e->callee()->kind() != Expression::Kind::kLambda ||
      e->callee()->params().size() != 1) {
    throw RefactorError("expected an application ((x) => e1)(e2)");
  }
  return {e->callee()->params()[0], e->callee()->body(), e->arg(0)};
}

bool has_field_type(const ExprPtr& e, const RefactorContext& ctx) {
  try {
    RestrictedType t = check_restricted(ctx.D, ctx.A, e);
    return t.type->kind() == Type::Kind::kField;
  } catch (const TypeError& err) {
    throw RefactorError(std::string("cannot type the argument: ") +
                        err.what());
  }
}

void collect_names(const ExprPtr& e, std::set<Symbol>* out) {
  if (e->kind() == Expression::Kind::kVariable) out->insert(e->name());
  for (Symbol p : e->params()) out->insert(p);
  for (const ExprPtr& c : e->children()) collect_names(c, out);
}

Symbol fresh_name(const std::string& base, std::set<Symbol>* used) {
  for (int i = 0;; ++i) {
    Symbol s(i == 0 ? base : base + std::to_string(i));
    if (used->insert(s).second) return s;
  }
}

ExprPtr rebuild(const ExprPtr& e, std::vector<ExprPtr> children) {
  return std::make_shared<const Expression>(e->kind(), e->name(), e->value(),
                                            e->params(), std::move(children),
                                            e->span());
}

// Replaces the subterms in `targets` by the matching variables.
ExprPtr replace_subterms(const ExprPtr& e, const std::vector<ExprPtr>& targets,
                         const std::vector<Symbol>& vars,
                         std::set<Symbol>* bound, std::vector<bool>* found) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (e.get() != targets[i].get()) continue;
    for (Symbol y : e->free_vars()) {
      if (bound->count(y) != 0) {
        throw RefactorError("abstracted subterm uses the bound variable " +
                            y.str());
      }
    }
    (*found)[i] = true;
    return Expression::variable(vars[i], e->span());
  }
  std::vector<Symbol> added;
  for (Symbol p : e->params()) {
    if (bound->insert(p).second) added.push_back(p);
  }
  std::vector<ExprPtr> children;
  bool changed = false;
  for (const ExprPtr& c : e->children()) {
    children.push_back(replace_subterms(c, targets, vars, bound, found));
    changed = changed || children.back() != c;
  }
  for (Symbol p : added) bound->erase(p);
  return changed ? rebuild(e, std::move(children)) : e;
}

}  // namespace

ExprPtr refactor_abstract(const ExprPtr& e, const RefactorContext& ctx) {
  Redex r = match_redex(e);
  if (!has_field_type(r.arg, ctx)) {
    throw RefactorError("argument has local type; nothing to abstract");
  }
  ExprPtr call = Expression::apply(Expression::variable(r.x), {});
  ExprPtr body = substitute_expr(r.body, r.x, call);
  return Expression::apply(
      Expression::lambda({r.x}, body, fresh_tag(), e->callee()->span()),
      {Expression::lambda({}, r.arg, fresh_tag(), r.arg->span())}, e->span());
}

ExprPtr refactor_abstract_params(const ExprPtr& e,
                                 const std::vector<ExprPtr>& locals,
                                 const RefactorContext& ctx) {
  Redex r = match_redex(e);
  if (!has_field_type(r.arg, ctx)) {
    throw RefactorError("argument has local type; nothing to abstract");
  }
  for (const ExprPtr& l : locals) {
    if (has_field_type(l, ctx)) {
      throw RefactorError("abstracted subterm has field type");
    }
  }
  std::set<Symbol> used;
  collect_names(e, &used);
  used.insert(r.x);
  std::vector<Symbol> ys;
  for (std::size_t i = 0; i < locals.size(); ++i) {
    ys.push_back(fresh_name("y", &used));
  }
  std::set<Symbol> bound;
  std::vector<bool> found(locals.size(), false);
  ExprPtr arg = replace_subterms(r.arg, locals, ys, &bound, &found);
  for (bool f : found) {
    if (!f) throw RefactorError("subterm does not occur in the argument");
  }
  std::vector<ExprPtr> y_vars;
  for (Symbol y : ys) y_vars.push_back(Expression::variable(y));
  ExprPtr call = Expression::apply(Expression::variable(r.x), y_vars);
  ExprPtr body = substitute_expr(r.body, r.x, call);
  std::vector<Symbol> params = {r.x};
  params.insert(params.end(), ys.begin(), ys.end());
  std::vector<ExprPtr> args = {
      Expression::lambda(ys, arg, fresh_tag(), r.arg->span())};
  args.insert(args.end(), locals.begin(), locals.end());
  return Expression::apply(
      Expression::lambda(params, body, fresh_tag(), e->callee()->span()),
      std::move(args), e->span());
}

ExprPtr refactor_defer(const ExprPtr& e) {
  Redex r = match_redex(e);
  if (r.arg->kind() != Expression::Kind::kNbr) {
    throw RefactorError("argument is not an nbr expression");
  }
  ExprPtr body = substitute_expr(
      r.body, r.x, Expression::nbr(Expression::variable(r.x)));
  return Expression::apply(
      Expression::lambda({r.x}, body, fresh_tag(), e->callee()->span()),
      {r.arg->body()}, e->span());
}

bool occurs_in_branch(const ExprPtr& e, Symbol x) {
  if (!e->has_free_var(x)) return false;
  if (e->kind() == Expression::Kind::kIf) {
    if (e->child(1)->has_free_var(x) || e->child(2)->has_free_var(x)) {
      return true;
    }
  }
  if (e->kind() == Expression::Kind::kApply &&
      e->callee()->kind() == Expression::Kind::kValue &&
      e->callee()->value().kind() == Value::Kind::kBuiltin &&
      e->callee()->value().as_builtin().name.str() == "mux") {
    for (std::size_t i = 1; i < e->arg_count(); ++i) {
      const ExprPtr& a = e->arg(i);
      if (a->kind() == Expression::Kind::kLambda && a->has_free_var(x)) {
        return true;
      }
    }
  }
  for (const ExprPtr& c : e->children()) {
    if (occurs_in_branch(c, x)) return true;
  }
  return false;
}

TraceScenario make_trace(Environment env, std::uint64_t seed,
                         std::uint64_t rounds) {
  TraceScenario out;
  out.env = env;
  Network n(std::move(env),
            [](DeviceId, const TreeEnv&, const SensorState&) {
              return leaf(Value::number(0));
            });
  UniformRandomScheduler scheduler(seed);
  StopCondition stop;
  stop.max_rounds = rounds;
  RunResult r = run(n, scheduler, stop);
  for (const Event& e : r.log.events) {
    out.actions.push_back(e.action == Action::Kind::kComp
                              ? Action::comp(e.device)
                              : Action::send(e.device));
  }
  return out;
}

std::string Divergence::describe() const {
  return "step " + std::to_string(step) + " device " + std::to_string(device) +
         ": " + to_string(left) + " vs " + to_string(right);
}

bool values_close(const Value& a, const Value& b, double rel_tol) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Value::Kind::kNumber: {
      double x = a.as_number();
      double y = b.as_number();
      if (x == y) return true;
      if (std::isnan(x) && std::isnan(y)) return true;
      if (!std::isfinite(x) || !std::isfinite(y)) return false;
      return std::fabs(x - y) <= rel_tol * std::max(std::fabs(x), std::fabs(y));
    }
    case Value::Kind::kPair:
      return values_close(a.first(), b.first(), rel_tol) &&
             values_close(a.second(), b.second(), rel_tol);
    case Value::Kind::kCons:
      return values_close(a.head(), b.head(), rel_tol) &&
             values_close(a.tail(), b.tail(), rel_tol);
    case Value::Kind::kField: {
      const auto& x = a.as_field().entries;
      const auto& y = b.as_field().entries;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].first != y[i].first ||
            !values_close(x[i].second, y[i].second, rel_tol)) {
          return false;
        }
      }
      return true;
    }
    default:
      return a == b;
  }
}

BehaviourVerdict compare_firings(const FiringFn& left, const FiringFn& right,
                                 const TraceScenario& scenario) {
  BehaviourVerdict out;
  Network a(scenario.env, left);
  Network b(scenario.env, right);
  for (const Action& act : scenario.actions) {
    switch (act.kind) {
      case Action::Kind::kComp: {
        std::uint64_t step = a.steps();
        a.step_comp(act.device);
        b.step_comp(act.device);
        ++out.firings;
        const Value& x = a.own_tree(act.device)->root;
        const Value& y = b.own_tree(act.device)->root;
        if (!values_close(x, y)) {
          out.same = false;
          out.divergence = Divergence{step, act.device, x, y};
          return out;
        }
        break;
      }
      case Action::Kind::kSend:
        a.step_send(act.device);
        b.step_send(act.device);
        break;
      case Action::Kind::kEnv:
        a.step_env(*act.env);
        b.step_env(*act.env);
        break;
    }
  }
  return out;
}

BehaviourVerdict check_same_behaviour(const Program& p,
                                      const TraceScenario& scenario) {
  auto nc = std::make_shared<DeviceEvaluator>(p);
  auto hfc = std::make_shared<HfcEvaluator>(p);
  return compare_firings(
      [nc](DeviceId d, const TreeEnv& env, const SensorState& s) {
        return nc->fire(d, env, s);
      },
      [hfc](DeviceId d, const TreeEnv& env, const SensorState& s) {
        return hfc->fire(d, env, s);
      },
      scenario);
}

namespace {

class ProgramGenerator {
 public:
  ProgramGenerator(std::mt19937_64& rng, const GeneratorOptions& options)
      : rng_(rng), options_(options) {}

  std::string program() {
    std::string out;
    int n = pick(0, options_.max_functions);
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> params;
      int arity = pick(1, 2);
      for (int j = 0; j < arity; ++j) params.push_back("p" + std::to_string(j));
      std::vector<std::string> saved = vars_;
      vars_ = params;
      std::string body = num(options_.max_depth - 1);
      vars_ = saved;
      out += "def f" + std::to_string(i) + "(" + join(params) + ") { " + body +
             " }\n";
      arities_.push_back(arity);
    }
    out += num(options_.max_depth) + "\n";
    return out;
  }

 private:
  int pick(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  static std::string join(const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) out += ", ";
      out += xs[i];
    }
    return out;
  }

  std::string fresh() { return "v" + std::to_string(next_var_++); }

  std::string num_leaf() {
    int k = pick(0, vars_.empty() ? 2 : 4);
    switch (k) {
      case 0:
        return std::to_string(pick(0, 9));
      case 1:
        return chance(0.5) ? "temperature()" : "mid()";
      case 2:
        return std::to_string(pick(1, 5));
      default:
        return vars_[pick(0, static_cast<int>(vars_.size()) - 1)];
    }
  }

  std::string binop(const std::string& a, const std::string& b) {
    switch (pick(0, 4)) {
      case 0:
        return "(" + a + " + " + b + ")";
      case 1:
        return "(" + a + " - " + b + ")";
      case 2:
        return "min(" + a + ", " + b + ")";
      case 3:
        return "max(" + a + ", " + b + ")";
      default:
        return "(" + a + " * " + b + ")";
    }
  }

  std::string call(int depth, bool field) {
    int f = pick(0, static_cast<int>(arities_.size()) - 1);
    std::vector<std::string> args;
    for (int i = 0; i < arities_[f]; ++i) {
      args.push_back(field && chance(0.5) ? fld(depth) : num(depth));
    }
    return "f" + std::to_string(f) + "(" + join(args) + ")";
  }

  std::string num(int depth) {
    if (depth <= 0) return num_leaf();
    switch (pick(0, arities_.empty() ? 8 : 9)) {
      case 0:
      case 1:
        return num_leaf();
      case 2:
        return binop(num(depth - 1), num(depth - 1));
      case 3:
        return "if (" + boolean(depth - 1) + ") { " + num(depth - 1) +
               " } else { " + num(depth - 1) + " }";
      case 4: {
        std::string init = num(depth - 1);
        std::string v = fresh();
        vars_.push_back(v);
        std::string body = num(depth - 1);
        vars_.pop_back();
        return "rep (" + init + ") { (" + v + ") => " + body + " }";
      }
      case 5:
      case 6: {
        static const char* aggs[] = {"+", "min", "max"};
        return "foldhood(" + num(depth - 1) + ", " + aggs[pick(0, 2)] + ", " +
               fld(depth - 1) + ")";
      }
      case 7: {
        std::string init = num(depth - 1);
        std::string v = fresh();
        vars_.push_back(v);
        std::string body = num(depth - 1);
        vars_.pop_back();
        return "(let " + v + " = " + init + " in " + body + ")";
      }
      case 8: {
        std::string arg = num(depth - 1);
        std::string v = fresh();
        vars_.push_back(v);
        std::string body = num(depth - 1);
        vars_.pop_back();
        return "((" + v + ") => " + body + ")(" + arg + ")";
      }
      default:
        return call(depth - 1, false);
    }
  }

  std::string boolean(int depth) {
    if (depth <= 0) {
      switch (pick(0, 3)) {
        case 0:
          return "True";
        case 1:
          return "False";
        case 2:
          return "isSource()";
        default:
          return "isObstacle()";
      }
    }
    switch (pick(0, 3)) {
      case 0:
        return "(" + num(depth - 1) + " < " + num(depth - 1) + ")";
      case 1:
        return "(" + num(depth - 1) + " == " + num(depth - 1) + ")";
      case 2:
        return "!" + boolean(depth - 1);
      default:
        return "(" + boolean(depth - 1) + " && " + boolean(depth - 1) + ")";
    }
  }

  std::string fld(int depth) {
    if (depth <= 0) return chance(0.5) ? "nbrRange()" : "nbr{" + num(0) + "}";
    switch (pick(0, arities_.empty() ? 8 : 9)) {
      case 0:
      case 1:
        return "nbr{" + num(depth - 1) + "}";
      case 2:
        return "nbrRange()";
      case 3:
        return binop(fld(depth - 1), chance(0.5) ? fld(depth - 1)
                                                 : num(depth - 1));
      case 4:
        return "if (" + boolean(depth - 1) + ") { " + fld(depth - 1) +
               " } else { " + fld(depth - 1) + " }";
      case 5:
        return "mux(" + boolean(depth - 1) + ", " + fld(depth - 1) + ", " +
               num(depth - 1) + ")";
      case 6:
        return num(depth - 1);
      case 7:
        return "consthood(" + num(depth - 1) + ")";
      case 8: {
        std::string v = fresh();
        return "map((" + v + ") => " + v + " + " + std::to_string(pick(0, 3)) +
               ", " + fld(depth - 1) + ")";
      }
      default:
        return call(depth - 1, true);
    }
  }

  std::mt19937_64& rng_;
  GeneratorOptions options_;
  std::vector<std::string> vars_;
  std::vector<int> arities_;
  int next_var_ = 0;
};

}  // namespace

std::string generate_program_source(std::mt19937_64& rng,
                                    const GeneratorOptions& options) {
  return ProgramGenerator(rng, options).program();
}

Environment random_environment(std::mt19937_64& rng, int max_devices) {
  Environment env;
  int n = std::uniform_int_distribution<int>(1, max_devices)(rng);
  std::bernoulli_distribution edge(0.4);
  std::bernoulli_distribution source(0.3);
  std::bernoulli_distribution obstacle(0.2);
  std::uniform_int_distribution<int> temp(0, 30);
  std::uniform_int_distribution<int> weight(1, 5);
  std::map<std::pair<DeviceId, DeviceId>, double> w;
  for (int i = 0; i < n; ++i) env.add_device(static_cast<DeviceId>(i));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!edge(rng)) continue;
      env.connect(i, j);
      double x = weight(rng);
      w[{i, j}] = x;
      w[{j, i}] = x;
    }
  }
  Symbol range("nbrRange");
  for (int i = 0; i < n; ++i) {
    SensorState& s = env.sensors[i];
    s.values[Symbol("temperature")] = Value::number(temp(rng));
    s.values[Symbol("isSource")] = Value::boolean(source(rng));
    s.values[Symbol("isObstacle")] = Value::boolean(obstacle(rng));
    std::map<DeviceId, double> row;
    for (const auto& [k, x] : w) {
      if (k.first == static_cast<DeviceId>(i)) row[k.second] = x;
    }
    DeviceId self = i;
    s.relational[range] = [row, self](DeviceId d) {
      if (d == self) return Value::number(0);
      auto it = row.find(d);
      return Value::number(it == row.end() ? 1.0 : it->second);
    };
  }
  return env;
}

}  // namespace nc
