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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "nc/device.h"
#include "nc/hfc.h"
#include "nc/network.h"
#include "nc/parser.h"
#include "nc/stdlib.h"
#include "nc/types.h"
#include "support.h"

namespace {

using nc::DeviceEvaluator;
using nc::DeviceId;
using nc::Program;
using nc::SensorState;
using nc::Symbol;
using nc::TreeEnv;
using nc::TreePtr;
using nc::Value;

constexpr const char* kNeighbourSum =
    "foldhood(2, +, min(nbr{temperature()}, temperature()))";

SensorState temperature(double t) {
  SensorState s;
  s.values[Symbol("temperature")] = Value::number(t);
  return s;
}

// <n>(min, <n>(<n>(temperature, n)), <n>(temperature, n), n)
std::string theta_n(int n) {
  std::string v = std::to_string(n);
  std::string sensor = "<" + v + ">(temperature, " + v + ")";
  return "<" + v + ">(min, <" + v + ">(" + sensor + "), " + sensor + ", " + v +
         ")";
}

TEST(Projection, IthSubtree) {
  const nc::Builtins& b = nc::Builtins::standard();
  TreePtr t = nc::node(Value::boolean(true),
                       {nc::leaf(Value::builtin(b.find("<"))),
                        nc::leaf(Value::number(-2)), nc::leaf(Value::number(5)),
                        nc::leaf(Value::boolean(true))});
  EXPECT_EQ(nc::serialize(t), "<True>(<, -2, 5, True)");
  TreePtr second = nc::subtree_i(t, 2);
  ASSERT_NE(second, nullptr);
  EXPECT_EQ(nc::serialize(second), "-2");
  EXPECT_EQ(nc::subtree_i(t, 5), nullptr);
}

TEST(Projection, FunctionSubtree) {
  const nc::Builtins& b = nc::Builtins::standard();
  TreePtr inner = nc::node(Value::number(4),
                           {nc::leaf(Value::builtin(b.find("+"))),
                            nc::leaf(Value::number(3)), nc::leaf(Value::number(1)),
                            nc::leaf(Value::number(4))});
  TreePtr t = nc::node(Value::number(4), {nc::leaf(Value::defined(Symbol("f"))),
                                          nc::leaf(Value::number(3)), inner});
  EXPECT_EQ(nc::serialize(t), "<4>(f, 3, <4>(+, 3, 1, 4))");
  TreePtr f = nc::subtree_f(t, Value::defined(Symbol("f")));
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(nc::serialize(f), "<4>(+, 3, 1, 4)");
  EXPECT_EQ(nc::subtree_f(t, Value::defined(Symbol("g"))), nullptr);
}

TEST(Projection, EnvironmentDropsMismatches) {
  TreePtr tf = nc::node(Value::number(1), {nc::leaf(Value::defined(Symbol("f"))),
                                           nc::leaf(Value::number(1))});
  TreePtr tg = nc::node(Value::number(1), {nc::leaf(Value::defined(Symbol("g"))),
                                           nc::leaf(Value::number(2))});
  TreeEnv env({{0, tf}, {1, tg}, {2, nc::leaf(Value::number(0))}});
  TreeEnv pf = nc::project_f(env, Value::defined(Symbol("f")));
  EXPECT_EQ(pf.domain(), std::vector<DeviceId>{0});
  TreeEnv p2 = nc::project_i(env, 2);
  EXPECT_EQ(p2.domain(), (std::vector<DeviceId>{0, 1}));
}

class NeighbourSum : public ::testing::Test {
 protected:
  NeighbourSum() : p_(nc::parse_program(kNeighbourSum)), eval_(p_) {}
  Program p_;
  DeviceEvaluator eval_;
};

TEST_F(NeighbourSum, FoldsNeighbourMinima) {
  TreePtr t1 = eval_.fire(1, {}, temperature(15));
  TreePtr t2 = eval_.fire(2, {}, temperature(5));
  TreeEnv env({{1, t1}, {2, t2}});
  TreePtr t0 = eval_.fire(0, env, temperature(10));
  EXPECT_EQ(t0->root, Value::number(17));
  EXPECT_EQ(nc::serialize(t0), "<17>(2, +, " + theta_n(10) + ")");
}

TEST_F(NeighbourSum, EmptyEnvironmentYieldsInitialValue) {
  TreePtr t = eval_.fire(0, {}, temperature(10));
  EXPECT_EQ(t->root, Value::number(2));
}

TEST_F(NeighbourSum, NetworkExampleFirings) {
  TreePtr theta0 = eval_.fire(2, {}, temperature(15));
  EXPECT_EQ(nc::serialize(theta0), "<2>(2, +, " + theta_n(15) + ")");
  TreePtr theta1 = eval_.fire(3, TreeEnv({{2, theta0}}), temperature(5));
  EXPECT_EQ(nc::serialize(theta1), "<7>(2, +, " + theta_n(5) + ")");
  TreePtr theta2 =
      eval_.fire(1, TreeEnv({{2, theta0}, {3, theta1}}), temperature(10));
  EXPECT_EQ(nc::serialize(theta2), "<17>(2, +, " + theta_n(10) + ")");
}

TEST(Evaluate, RepCountsAcrossFirings) {
  Program p = nc::parse_program("rep (3) { (x) => x + 1 }");
  DeviceEvaluator eval(p);
  TreeEnv env;
  std::vector<double> roots;
  for (int i = 0; i < 3; ++i) {
    TreePtr t = eval.fire(0, env, {});
    roots.push_back(t->root.as_number());
    env = env.with(0, t);
  }
  EXPECT_EQ(roots, (std::vector<double>{4, 5, 6}));
}

TEST(Evaluate, NbrAgainstNeighbourReturnsStoredTree) {
  Program p = nc::parse_program("nbr{temperature()}");
  DeviceEvaluator eval(p);
  TreePtr stored = eval.fire(1, {}, temperature(15));
  TreeEnv env({{1, stored}});
  nc::EvalOutcome out = eval.evaluate(0, 1, env, temperature(10), p.main);
  ASSERT_NE(out, nullptr);
  EXPECT_TRUE(nc::trees_equal(out, stored));
  EXPECT_EQ(out->root, Value::number(15));
}

TEST(Evaluate, NbrAgainstAbsentNeighbourFails) {
  Program p = nc::parse_program("nbr{temperature()}");
  DeviceEvaluator eval(p);
  EXPECT_EQ(eval.evaluate(0, 1, {}, temperature(10), p.main), nullptr);
}

TEST(Evaluate, NbrLocallyDiscardsNbr) {
  Program p = nc::parse_program("nbr{temperature()}");
  DeviceEvaluator eval(p);
  TreePtr t = eval.fire(0, {}, temperature(10));
  EXPECT_EQ(nc::serialize(t), "<10>(<10>(temperature, 10))");
}

TEST(Evaluate, RelationalSensorFailsOutsideDomain) {
  Program p = nc::parse_program("nbrRange()");
  DeviceEvaluator eval(p);
  SensorState s;
  s.relational[Symbol("nbrRange")] = [](DeviceId) { return Value::number(1); };
  EXPECT_EQ(eval.evaluate(0, 1, {}, s, p.main), nullptr);
  TreePtr t = eval.fire(1, {}, s);
  nc::EvalOutcome out = eval.evaluate(0, 1, TreeEnv({{1, t}}), s, p.main);
  ASSERT_NE(out, nullptr);
  EXPECT_EQ(out->root, Value::number(1));
}

TEST(Evaluate, BranchesAlignNeighbours) {
  Program p = nc::parse_program(
      "if (isObstacle()) { 0 } { foldhood(0, +, nbr{1}) }");
  DeviceEvaluator eval(p);
  SensorState free_device;
  SensorState obstacle;
  obstacle.values[Symbol("isObstacle")] = Value::boolean(true);
  TreeEnv env({{1, eval.fire(1, {}, free_device)},
               {2, eval.fire(2, {}, obstacle)}});
  env = env.with(0, eval.fire(0, env, free_device));
  TreePtr t = eval.fire(0, env, free_device);
  EXPECT_EQ(t->root, Value::number(1));
}

TEST(Evaluate, ObstacleGradientIgnoresObstacleValue) {
  Program p = nctest::program(
      "if (isObstacle()) { PositiveInfinity } { gradient(isSource(), "
      "nbrRange) }");
  DeviceEvaluator eval(p);
  auto sensors = [](bool obstacle) {
    SensorState s;
    s.values[Symbol("isObstacle")] = Value::boolean(obstacle);
    s.relational[Symbol("nbrRange")] = [](DeviceId) { return Value::number(1); };
    return s;
  };
  SensorState source = sensors(false);
  source.values[Symbol("isSource")] = Value::boolean(true);
  TreePtr first = eval.fire(1, {}, source);
  TreeEnv env({{1, eval.fire(1, TreeEnv({{1, first}}), source)},
               {2, eval.fire(2, {}, sensors(true))}});
  TreePtr t = eval.fire(0, env, sensors(false));
  EXPECT_EQ(t->root, Value::number(1));
  EXPECT_EQ(eval.fire(2, env, sensors(true))->root.as_number(),
            std::numeric_limits<double>::infinity());
}

TEST(Evaluate, ConstantMainIsLeaf) {
  Program p = nc::parse_program("42");
  DeviceEvaluator eval(p);
  TreePtr t = eval.fire(0, {}, {});
  EXPECT_TRUE(t->children.empty());
  EXPECT_EQ(t->root, Value::number(42));
}

TEST(Evaluate, NonterminationHitsStepBudget) {
  Program p = nc::parse_program("def loop(x) { loop(x) } loop(1)");
  nc::EvalOptions o;
  o.step_budget = 10'000;
  DeviceEvaluator eval(p, o);
  EXPECT_THROW(eval.fire(0, {}, {}), nc::StepBudgetExceeded);
}

TEST(Evaluate, FoldOrderFollowsDeviceIds) {
  Program p = nc::parse_program(
      "foldhood(0, (a, b) => a * 10 + b, nbr{mid()})");
  DeviceEvaluator eval(p);
  TreeEnv env;
  for (DeviceId d : {3, 1, 2}) env = env.with(d, eval.fire(d, {}, {}));
  EXPECT_EQ(eval.fire(0, env, {})->root, Value::number(123));
}

// Fires every program of a random trace and checks each firing.
struct FiringProperty {
  int programs = 0;
  int firings = 0;
};

template <typename Check>
FiringProperty check_firings(std::uint64_t seed, int wanted, Check check) {
  std::mt19937_64 rng(seed);
  FiringProperty out;
  for (int i = 0; i < wanted * 4 && out.programs < wanted; ++i) {
    std::string src = nc::generate_program_source(rng);
    Program p = nc::parse_program(src);
    nc::ProgramTypes types;
    try {
      types = nc::infer_program(p);
    } catch (const nc::TypeError&) {
      continue;
    }
    nc::TraceScenario sc =
        nc::make_trace(nc::random_environment(rng, 5), rng(), 3);
    DeviceEvaluator eval(p);
    nc::FiringFn fire = [&](DeviceId d, const TreeEnv& env,
                            const SensorState& s) {
      TreePtr t = eval.fire(d, env, s);
      check(p, types, eval, d, env, s, t, src);
      ++out.firings;
      return t;
    };
    nc::Network net(sc.env, fire);
    for (const nc::Action& a : sc.actions) {
      if (a.kind == nc::Action::Kind::kComp) net.step_comp(a.device);
      if (a.kind == nc::Action::Kind::kSend) net.step_send(a.device);
    }
    ++out.programs;
  }
  return out;
}

TEST(DeviceProperty, FiringIsTotalWellFormedAndTyped) {
  FiringProperty r = check_firings(
      11, 220,
      [](const Program& p, const nc::ProgramTypes& types, DeviceEvaluator&,
         DeviceId, const TreeEnv&, const SensorState&, const TreePtr& t,
         const std::string& src) {
        ASSERT_NE(t, nullptr) << src;
        std::string why;
        EXPECT_TRUE(nc::well_formed(p, p.main, t, &why)) << src << ": " << why;
        EXPECT_TRUE(nc::value_has_type(types, t->root, types.main))
            << src << ": " << nc::to_string(t->root);
      });
  EXPECT_GE(r.programs, 200);
}

TEST(DeviceProperty, FiringIsDeterministic) {
  std::mt19937_64 shuffle(5);
  FiringProperty r = check_firings(
      12, 220,
      [&](const Program& p, const nc::ProgramTypes&, DeviceEvaluator& eval,
          DeviceId d, const TreeEnv& env, const SensorState& s,
          const TreePtr& t, const std::string& src) {
        std::vector<TreeEnv::Entry> entries(env.begin(), env.end());
        std::shuffle(entries.begin(), entries.end(), shuffle);
        TreePtr again = eval.fire(d, TreeEnv(entries), s);
        EXPECT_TRUE(nc::trees_equal(t, again)) << src;
        nc::EvalOptions plain;
        plain.memoize = false;
        DeviceEvaluator unmemoized(p, plain);
        EXPECT_TRUE(nc::trees_equal(t, unmemoized.fire(d, env, s))) << src;
      });
  EXPECT_GE(r.programs, 200);
}

// Relabels devices by `perm` inside a value-tree environment.
TreeEnv relabel(const TreeEnv& env, const std::vector<DeviceId>& perm) {
  std::vector<TreeEnv::Entry> out;
  for (const auto& [d, t] : env) out.emplace_back(perm[d], t);
  return TreeEnv(out);
}

TEST(DeviceProperty, SumFoldIgnoresNeighbourOrder) {
  Program p = nc::parse_program("foldhood(0, +, nbr{temperature()} * 3)");
  DeviceEvaluator eval(p);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> temp(-20, 20);
  for (int i = 0; i < 200; ++i) {
    int n = std::uniform_int_distribution<int>(1, 7)(rng);
    TreeEnv env;
    for (DeviceId d = 1; d <= static_cast<DeviceId>(n); ++d) {
      env = env.with(d, eval.fire(d, {}, temperature(temp(rng))));
    }
    std::vector<DeviceId> perm(n + 1);
    for (int k = 0; k <= n; ++k) perm[k] = k;
    std::shuffle(perm.begin() + 1, perm.end(), rng);
    SensorState self = temperature(temp(rng));
    EXPECT_EQ(eval.fire(0, env, self)->root,
              eval.fire(0, relabel(env, perm), self)->root);
  }
}

TEST(DeviceProperty, FoldhoodPlusSelfMatchesInlinedFold) {
  Program plus_self = nctest::program("foldhoodPlusSelf(+, temperature())");
  Program inlined =
      nctest::program("let v = temperature() in foldhood(v, +, v)");
  Program neighbours = nctest::program(
      "foldhood(nbr{temperature()}, +, nbr{temperature()})");
  DeviceEvaluator a(plus_self);
  DeviceEvaluator b(inlined);
  DeviceEvaluator c(neighbours);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> temp(-20, 20);
  for (int i = 0; i < 200; ++i) {
    int n = std::uniform_int_distribution<int>(0, 6)(rng);
    std::vector<SensorState> sensors;
    for (int k = 0; k <= n; ++k) sensors.push_back(temperature(temp(rng)));
    TreeEnv ea;
    TreeEnv eb;
    TreeEnv ec;
    for (DeviceId d = 1; d <= static_cast<DeviceId>(n); ++d) {
      ea = ea.with(d, a.fire(d, {}, sensors[d]));
      eb = eb.with(d, b.fire(d, {}, sensors[d]));
      ec = ec.with(d, c.fire(d, {}, sensors[d]));
    }
    double own = sensors[0].values.at(Symbol("temperature")).as_number();
    double total = 0;
    for (const SensorState& s : sensors) {
      total += s.values.at(Symbol("temperature")).as_number();
    }
    EXPECT_EQ(a.fire(0, ea, sensors[0])->root.as_number(), own * (n + 1));
    EXPECT_EQ(b.fire(0, eb, sensors[0])->root.as_number(), own * (n + 1));
    EXPECT_EQ(c.fire(0, ec, sensors[0])->root.as_number(), total);
  }
}

}  // namespace
