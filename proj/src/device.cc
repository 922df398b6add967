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

#include "nc/device.h"

#include <span>
#include <stdexcept>

namespace nc {

namespace {

bool returns_bool(const BuiltinInfo& b) {
  return b.scheme.size() >= 4 &&
         b.scheme.compare(b.scheme.size() - 4, 4, "bool") == 0;
}

Value default_reading(const BuiltinInfo& b) {
  return returns_bool(b) ? Value::boolean(false) : Value::number(0);
}

}  // namespace

Value SensorState::read(const BuiltinInfo& b, DeviceId self) const {
  auto it = values.find(b.name);
  if (it != values.end()) return it->second;
  if (b.name.str() == "mid") return Value::number(static_cast<double>(self));
  return default_reading(b);
}

Value SensorState::read_relational(const BuiltinInfo& b, DeviceId self,
                                   DeviceId neighbour) const {
  auto it = relational.find(b.name);
  if (it != relational.end()) return it->second(neighbour);
  if (neighbour == self) return default_reading(b);
  return Value::number(1);
}

namespace {

struct Frame {
  const Frame* parent = nullptr;
  std::vector<std::pair<Symbol, Value>> vars;
  std::uint64_t id = 0;
};

struct MemoEntry {
  std::vector<TreeEnv::Entry> env;
  TreePtr tree;
};

struct MemoKey {
  const Expression* expr;
  std::uint64_t frame;
  bool operator==(const MemoKey& o) const {
    return expr == o.expr && frame == o.frame;
  }
};

struct MemoKeyHash {
  std::size_t operator()(const MemoKey& k) const {
    return std::hash<const void*>()(k.expr) * 31 + k.frame;
  }
};

bool same_entries(const std::vector<TreeEnv::Entry>& a, const TreeEnv& b) {
  if (a.size() != b.size()) return false;
  std::size_t i = 0;
  for (const auto& e : b) {
    if (a[i].first != e.first || a[i].second != e.second) return false;
    ++i;
  }
  return true;
}

class Firing {
 public:
  Firing(DeviceId self, const SensorState& sigma,
         const std::unordered_map<Symbol, const FunctionDecl*>& functions,
         const EvalOptions& options)
      : self_(self), sigma_(sigma), functions_(functions), options_(options) {}

  std::uint64_t steps() const { return steps_; }

  TreePtr eval(DeviceId nbr, const TreeEnv& env, const Frame& frame,
               const ExprPtr& e) {
    tick();
    switch (e->kind()) {
      case Expression::Kind::kVariable:
        return leaf(lookup(frame, e->name()));
      case Expression::Kind::kValue:
        return leaf(e->value());
      case Expression::Kind::kLambda:
        return leaf(make_closure(frame, e));
      case Expression::Kind::kApply: {
        TreePtr callee = eval(self_, project_i(env, 1), frame, e->callee());
        if (!callee) throw EvalError("callee evaluation failed");
        std::vector<TreePtr> args;
        args.reserve(e->arg_count());
        for (std::size_t i = 0; i < e->arg_count(); ++i) {
          TreePtr a = eval(nbr, project_i(env, i + 2), frame, e->arg(i));
          if (!a) return nullptr;
          args.push_back(std::move(a));
        }
        return apply(nbr, env, std::move(callee), std::move(args));
      }
      case Expression::Kind::kRep:
        return memoized(env, frame, e, [&] { return eval_rep(env, frame, e); });
      case Expression::Kind::kNbr: {
        if (nbr == self_) {
          TreePtr body = eval(self_, project_i(env, 1), frame, e->body());
          return node(body->root, {body});
        }
        const TreePtr* stored = env.find(nbr);
        return stored != nullptr ? *stored : nullptr;
      }
      case Expression::Kind::kFoldhood:
        return memoized(env, frame, e,
                        [&] { return eval_foldhood(env, frame, e); });
      default:
        throw EvalError("expression is not desugared");
    }
  }

  // f(v1..vn) against the device itself under the empty environment.
  Value apply_pure(const Value& f, std::vector<Value> args) {
    std::vector<TreePtr> trees;
    trees.reserve(args.size());
    for (Value& v : args) trees.push_back(leaf(std::move(v)));
    TreePtr t = apply(self_, TreeEnv(), leaf(f), std::move(trees));
    if (!t) throw EvalError("aggregator evaluation failed");
    return t->root;
  }

  std::uint64_t next_frame_id() { return ++frame_ids_; }

 private:
  void tick() {
    if (++steps_ > options_.step_budget) {
      throw StepBudgetExceeded("step budget of " +
                               std::to_string(options_.step_budget) +
                               " rule applications exceeded");
    }
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

  template <typename F>
  TreePtr memoized(const TreeEnv& env, const Frame& frame, const ExprPtr& e,
                   F compute) {
    if (!options_.memoize) return compute();
    MemoKey key{e.get(), frame.id};
    auto& bucket = memo_[key];
    for (const MemoEntry& m : bucket) {
      if (same_entries(m.env, env)) return m.tree;
    }
    TreePtr t = compute();
    // Re-fetch: compute() may have rehashed the table.
    memo_[key].push_back(MemoEntry{{env.begin(), env.end()}, t});
    return t;
  }

  TreePtr eval_rep(const TreeEnv& env, const Frame& frame, const ExprPtr& e) {
    TreePtr init = eval(self_, project_i(env, 1), frame, e->child(0));
    TreeEnv env2 = project_i(env, 2);
    const TreePtr* previous = env2.find(self_);
    Value v0 = previous != nullptr ? (*previous)->root : init->root;
    // e2(v0) as an application expression under pi_2.
    tick();
    TreePtr callee = eval(self_, project_i(env2, 1), frame, e->child(1));
    tick();
    TreePtr update = apply(self_, env2, std::move(callee), {leaf(v0)});
    return node(update->root, {init, update});
  }

  TreePtr eval_foldhood(const TreeEnv& env, const Frame& frame,
                        const ExprPtr& e) {
    TreePtr init = eval(self_, project_i(env, 1), frame, e->child(0));
    TreePtr agg = eval(self_, project_i(env, 2), frame, e->child(1));
    TreeEnv env3 = project_i(env, 3);
    TreePtr own = eval(self_, env3, frame, e->child(2));
    Value acc = init->root;
    for (const auto& [d, t] : env3) {
      if (d == self_) continue;
      TreePtr r = eval(d, env3, frame, e->child(2));
      if (!r) continue;
      acc = apply_pure(agg->root, {acc, r->root});
    }
    return node(std::move(acc), {init, agg, own});
  }

  TreePtr apply(DeviceId nbr, const TreeEnv& env, TreePtr callee,
                std::vector<TreePtr> args) {
    const Value f = callee->root;
    switch (f.kind()) {
      case Value::Kind::kBuiltin: {
        const BuiltinInfo& b = f.as_builtin();
        if (b.arity != static_cast<int>(args.size())) {
          throw EvalError(b.name.str() + " applied to " +
                          std::to_string(args.size()) + " arguments");
        }
        Value v;
        switch (b.kind) {
          case BuiltinKind::kSensor:
            v = sigma_.read(b, self_);
            break;
          case BuiltinKind::kRelational:
            if (nbr != self_) {
              const TreePtr* t = env.find(nbr);
              if (t == nullptr || !subtree_f(*t, f)) return nullptr;
            }
            v = sigma_.read_relational(b, self_, nbr);
            break;
          case BuiltinKind::kPure:
            v = apply_builtin(b, args);
            break;
        }
        args.insert(args.begin(), std::move(callee));
        args.push_back(leaf(v));
        return node(std::move(v), std::move(args));
      }
      case Value::Kind::kDefined:
      case Value::Kind::kClosure: {
        Frame frame;
        frame.id = next_frame_id();
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
        TreePtr result = eval(nbr, project_f(env, f), frame, *body);
        if (!result) return nullptr;
        args.insert(args.begin(), std::move(callee));
        Value root = result->root;
        args.push_back(std::move(result));
        return node(std::move(root), std::move(args));
      }
      default:
        throw EvalError("cannot apply " + to_string(f));
    }
  }

  Value apply_builtin(const BuiltinInfo& b, const std::vector<TreePtr>& args) {
    switch (b.special) {
      case BuiltinSpecial::kConsthood:
        return args[0]->root;
      case BuiltinSpecial::kMap: {
        std::vector<Value> rest;
        for (std::size_t i = 1; i < args.size(); ++i) {
          rest.push_back(args[i]->root);
        }
        return apply_pure(args[0]->root, std::move(rest));
      }
      case BuiltinSpecial::kNone:
        break;
    }
    std::vector<Value> vs;
    vs.reserve(args.size());
    for (const TreePtr& a : args) vs.push_back(a->root);
    return b.apply(std::span<const Value>(vs));
  }

  DeviceId self_;
  const SensorState& sigma_;
  const std::unordered_map<Symbol, const FunctionDecl*>& functions_;
  const EvalOptions& options_;
  std::uint64_t steps_ = 0;
  std::uint64_t frame_ids_ = 0;
  std::unordered_map<MemoKey, std::vector<MemoEntry>, MemoKeyHash> memo_;
};

}  // namespace

DeviceEvaluator::DeviceEvaluator(const Program& program, EvalOptions options)
    : program_(program), options_(options) {
  for (const FunctionDecl& f : program_.functions) functions_[f.name] = &f;
}

EvalOutcome DeviceEvaluator::evaluate(DeviceId self, DeviceId neighbour,
                                      const TreeEnv& env,
                                      const SensorState& sigma,
                                      const ExprPtr& e) {
  Firing firing(self, sigma, functions_, options_);
  Frame top;
  top.id = firing.next_frame_id();
  TreePtr t = firing.eval(neighbour, env, top, e);
  last_steps_ = firing.steps();
  return t;
}

TreePtr DeviceEvaluator::fire(DeviceId self, const TreeEnv& env,
                              const SensorState& sigma) {
  TreePtr t = evaluate(self, self, env, sigma, program_.main);
  if (!t) throw EvalError("self-evaluation failed");
  return t;
}

namespace {

class ShapeChecker {
 public:
  explicit ShapeChecker(const Program& p) : program_(p) {}

  bool check(const ExprPtr& e, const TreePtr& t, std::string* why) {
    auto fail = [&](const std::string& msg) {
      if (why != nullptr) *why = msg + " at " + serialize(t);
      return false;
    };
    switch (e->kind()) {
      case Expression::Kind::kVariable:
        return t->children.empty() || fail("variable tree is not a leaf");
      case Expression::Kind::kValue:
        if (!t->children.empty()) return fail("value tree is not a leaf");
        return t->root == e->value() || fail("leaf differs from the value");
      case Expression::Kind::kLambda:
        if (!t->children.empty()) return fail("lambda tree is not a leaf");
        if (t->root.kind() != Value::Kind::kClosure ||
            t->root.function_name() != e->tag()) {
          return fail("lambda leaf is not a closure of its tag");
        }
        return true;
      case Expression::Kind::kApply: {
        if (t->children.size() != e->arg_count() + 2) {
          return fail("application tree has the wrong number of children");
        }
        if (!check(e->callee(), t->children[0], why)) return false;
        for (std::size_t i = 0; i < e->arg_count(); ++i) {
          if (!check(e->arg(i), t->children[i + 1], why)) return false;
        }
        return check_application(t->children[0]->root, t, why);
      }
      case Expression::Kind::kRep: {
        if (t->children.size() != 2) return fail("rep tree needs 2 children");
        if (!check(e->child(0), t->children[0], why)) return false;
        const TreePtr& app = t->children[1];
        if (app->children.size() != 3) {
          return fail("rep update tree has the wrong shape");
        }
        if (!check(e->child(1), app->children[0], why)) return false;
        if (!app->children[1]->children.empty()) {
          return fail("rep state is not a leaf");
        }
        if (!check_application(app->children[0]->root, app, why)) return false;
        return t->root == app->root || fail("rep root differs from update");
      }
      case Expression::Kind::kNbr:
        if (t->children.size() != 1) return fail("nbr tree needs 1 child");
        if (!check(e->body(), t->children[0], why)) return false;
        return t->root == t->children[0]->root || fail("nbr root mismatch");
      case Expression::Kind::kFoldhood:
        if (t->children.size() != 3) return fail("foldhood tree needs 3 children");
        for (std::size_t i = 0; i < 3; ++i) {
          if (!check(e->child(i), t->children[i], why)) return false;
        }
        return true;
      default:
        return fail("sugar node");
    }
  }

 private:
  bool check_application(const Value& f, const TreePtr& t, std::string* why) {
    auto fail = [&](const std::string& msg) {
      if (why != nullptr) *why = msg + " at " + serialize(t);
      return false;
    };
    if (!f.is_function()) return fail("callee is not a function");
    const TreePtr& last = t->children.back();
    if (t->root != last->root) return fail("application root differs");
    if (f.kind() == Value::Kind::kBuiltin) {
      return last->children.empty() || fail("built-in result is not a leaf");
    }
    ExprPtr body;
    if (f.kind() == Value::Kind::kClosure) {
      body = f.as_closure().lambda->body();
    } else {
      const FunctionDecl* d = program_.find(f.as_defined());
      if (d == nullptr) return fail("unknown function");
      body = d->body;
    }
    return check(body, last, why);
  }

  const Program& program_;
};

}  // namespace

bool well_formed(const Program& program, const ExprPtr& e, const TreePtr& t,
                 std::string* why) {
  return ShapeChecker(program).check(e, t, why);
}

}  // namespace nc
