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

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "nc/device.h"
#include "nc/hfc.h"
#include "nc/network.h"
#include "nc/parser.h"
#include "nc/stdlib.h"
#include "support.h"

namespace {

using nc::DeviceId;
using nc::Environment;
using nc::ExprPtr;
using nc::HfcEvaluator;
using nc::HfcRestriction;
using nc::Program;
using nc::SensorState;
using nc::Symbol;
using nc::TreeEnv;
using nc::TreePtr;
using nc::Value;
using nctest::find_subterm;
using nctest::hfc_firing;
using nctest::nc_firing;
using nctest::random_redex;
using nctest::RedexCase;
using nctest::with_main;

SensorState temperature(double t) {
  SensorState s;
  s.values[Symbol("temperature")] = Value::number(t);
  return s;
}

std::map<DeviceId, Value> field_entries(const Value& v) {
  std::map<DeviceId, Value> out;
  for (const auto& [d, x] : v.as_field().entries) out[d] = x;
  return out;
}

TEST(HfcEvaluate, NbrBuildsNeighbouringField) {
  Program p = nc::parse_program("nbr{temperature()}");
  HfcEvaluator eval(p);
  TreeEnv env({{1, eval.fire(1, {}, temperature(15))},
               {2, eval.fire(2, {}, temperature(5))}});
  TreePtr t = eval.fire(0, env, temperature(10));
  ASSERT_TRUE(t->root.is_field());
  std::map<DeviceId, Value> expected = {{0, Value::number(10)},
                                        {1, Value::number(15)},
                                        {2, Value::number(5)}};
  EXPECT_EQ(field_entries(t->root), expected);
}

TEST(HfcEvaluate, FieldStyleNeighbourSum) {
  Program p = nc::parse_program(
      "foldhood(2, +, map2(min, nbr{temperature()}, consthood(temperature())))");
  HfcEvaluator eval(p);
  TreeEnv env({{1, eval.fire(1, {}, temperature(15))},
               {2, eval.fire(2, {}, temperature(5))}});
  EXPECT_EQ(eval.fire(0, env, temperature(10))->root, Value::number(17));
}

TEST(HfcEvaluate, LiftedBuiltinNeighbourSum) {
  Program p = nc::parse_program(
      "foldhood(2, +, min(nbr{temperature()}, temperature()))");
  HfcEvaluator eval(p);
  TreeEnv env({{1, eval.fire(1, {}, temperature(15))},
               {2, eval.fire(2, {}, temperature(5))}});
  EXPECT_EQ(eval.fire(0, env, temperature(10))->root, Value::number(17));
}

TEST(HfcEvaluate, ConstantIsLeaf) {
  Program p = nc::parse_program("3");
  HfcEvaluator eval(p);
  TreePtr t = eval.fire(0, {}, {});
  EXPECT_TRUE(t->children.empty());
  EXPECT_EQ(t->root, Value::number(3));
}

TEST(HfcEvaluate, RestrictFieldKeepsDomain) {
  Value phi = Value::field(std::make_shared<nc::NeighbourField>(
      nc::NeighbourField{{{0, Value::number(1)},
                          {1, Value::number(2)},
                          {4, Value::number(3)}}}));
  Value r = nc::restrict_field(phi, {0, 4});
  std::map<DeviceId, Value> expected = {{0, Value::number(1)},
                                        {4, Value::number(3)}};
  EXPECT_EQ(field_entries(r), expected);
}

TEST(FragmentCheck, CapturedFieldAverageViolatesR2) {
  nc::HfcCheckResult r = nc::check_hfc_prime(nc::parse_program(
      "def hfc_avghood(x) { foldhood(0, +, x) / foldhood(0, +, 1) }"
      "hfc_avghood(nbr{temperature()})"));
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.restriction, HfcRestriction::kR2);
}

TEST(FragmentCheck, ByNameAveragePasses) {
  nc::HfcCheckResult r = nc::check_hfc_prime(nc::parse_program(
      "def hfc_nc_avghood(y) { foldhood(0, +, y()) / foldhood(0, +, 1) }"
      "hfc_nc_avghood(() => nbr{temperature()})"));
  EXPECT_TRUE(r.ok) << r.message;
}

TEST(FragmentCheck, ConstantPasses) {
  EXPECT_TRUE(nc::check_hfc_prime(nc::parse_program("1")).ok);
}

TEST(FragmentCheck, FieldOfFieldViolatesR1) {
  nc::HfcCheckResult r = nc::check_hfc_prime(nc::parse_program("nbr{nbr{1}}"));
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.restriction, HfcRestriction::kR1);
}

TEST(FragmentCheck, LambdaCaptureViolatesR2) {
  nc::HfcCheckResult r = nc::check_hfc_prime(
      nc::parse_program("let x = nbr{1} in foldhood(0, +, (() => x)())"));
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.restriction, HfcRestriction::kR2);
}

TEST(FragmentCheck, UpWithFieldPayloadRejected) {
  Program p = nctest::program("up(() => pair(1, nbrRange))");
  EXPECT_FALSE(nc::check_hfc_prime(p).ok);
  EXPECT_TRUE(nc::check_hfc_prime(nctest::program("up(() => pair(1, 2))")).ok);
}

constexpr const char* kFoldOfArgument =
    "((x) => foldhood(0, +, x))(nbr{temperature()})";

TEST(Refactor, DeferMovesNbrIntoBody) {
  Program p = nc::parse_program(kFoldOfArgument);
  ExprPtr r = nc::refactor_defer(p.main);
  Program expected =
      nc::parse_program("((x) => foldhood(0, +, nbr{x}))(temperature())");
  EXPECT_TRUE(nc::alpha_equal(r, expected.main, false))
      << nc::pretty_print(r);
  EXPECT_TRUE(nc::check_hfc_prime(with_main(p, r)).ok);
}

TEST(Refactor, AbstractPassesArgumentByName) {
  Program p = nc::parse_program(kFoldOfArgument);
  EXPECT_FALSE(nc::check_hfc_prime(p).ok);
  ExprPtr r = nc::refactor_abstract(p.main);
  Program expected = nc::parse_program(
      "((x) => foldhood(0, +, x()))(() => nbr{temperature()})");
  EXPECT_TRUE(nc::alpha_equal(r, expected.main, false))
      << nc::pretty_print(r);
  EXPECT_TRUE(nc::check_hfc_prime(with_main(p, r)).ok);
}

TEST(Refactor, LocalArgumentRejected) {
  Program p = nc::parse_program("((x) => x + 1)(temperature())");
  EXPECT_THROW(nc::refactor_abstract(p.main), nc::RefactorError);
  EXPECT_THROW(nc::refactor_abstract_params(p.main, {}), nc::RefactorError);
  EXPECT_THROW(nc::refactor_defer(p.main), nc::RefactorError);
}

TEST(Refactor, NonRedexRejected) {
  Program p = nc::parse_program("nbr{1}");
  EXPECT_THROW(nc::refactor_defer(p.main), nc::RefactorError);
}

// Finds the first subterm printing as `text`.
class CounthoodRefactor : public ::testing::Test {
 protected:
  CounthoodRefactor()
      : p_(nctest::program(
            "((x) => if (temperature() < 30) { 0 } "
            "{ foldhood(counthood(), max, x) })(nbr{counthood()})")) {}

  // Complete graph; devices 0-2 hot, 3-5 cold. Hot devices see 5 neighbours
  // in total but only 2 hot ones.
  nc::TraceScenario scenario() const {
    nctest::Graph g = nctest::add_nodes({}, 6);
    for (DeviceId a = 0; a < 6; ++a) {
      for (DeviceId b = a + 1; b < 6; ++b) nctest::add_edge(&g, a, b);
    }
    Environment env = nctest::environment_of(g);
    for (DeviceId d = 0; d < 6; ++d) {
      nctest::set_sensor(&env, d, "temperature", Value::number(d < 3 ? 40 : 10));
    }
    return nc::make_trace(env, 4, 6);
  }

  Program p_;
};

TEST_F(CounthoodRefactor, ParametrisedAbstractionMatchesDisplay) {
  ExprPtr local = find_subterm(p_.main->arg(0), "counthood()");
  ASSERT_NE(local, nullptr);
  ExprPtr r = nc::refactor_abstract_params(p_.main, {local},
                                           nc::refactor_context(p_));
  Program expected = nctest::program(
      "((x, y) => if (temperature() < 30) { 0 } "
      "{ foldhood(counthood(), max, x(y)) })((y) => nbr{y}, counthood())");
  EXPECT_TRUE(nc::alpha_equal(r, expected.main, false)) << nc::pretty_print(r);
  EXPECT_TRUE(nc::check_hfc_prime(with_main(p_, r)).ok);
}

TEST_F(CounthoodRefactor, ParametrisedAbstractionPreservesBehaviour) {
  ExprPtr local = find_subterm(p_.main->arg(0), "counthood()");
  Program refactored = with_main(
      p_, nc::refactor_abstract_params(p_.main, {local},
                                       nc::refactor_context(p_)));
  nc::BehaviourVerdict v =
      nc::compare_firings(hfc_firing(p_), hfc_firing(refactored), scenario());
  EXPECT_TRUE(v.same) << v.divergence->describe();
  EXPECT_TRUE(nc::check_same_behaviour(refactored, scenario()).same);
}

TEST_F(CounthoodRefactor, PlainAbstractionChangesBehaviourInBranch) {
  EXPECT_TRUE(nc::occurs_in_branch(p_.main->callee()->body(), Symbol("x")));
  Program refactored =
      with_main(p_, nc::refactor_abstract(p_.main, nc::refactor_context(p_)));
  nc::BehaviourVerdict v =
      nc::compare_firings(hfc_firing(p_), hfc_firing(refactored), scenario());
  EXPECT_FALSE(v.same);
  // After full rounds a hot device reads 5 originally and 2 once refactored.
  std::map<DeviceId, double> roots[2];
  int k = 0;
  for (const Program* q : {&p_, &refactored}) {
    nc::Network net(scenario().env, hfc_firing(*q));
    nc::RoundRobinScheduler rr;
    nc::StopCondition stop;
    stop.max_rounds = 3;
    nc::run(net, rr, stop);
    for (DeviceId d = 0; d < 6; ++d) {
      roots[k][d] = net.own_tree(d)->root.as_number();
    }
    ++k;
  }
  for (DeviceId d = 0; d < 6; ++d) {
    EXPECT_EQ(roots[0][d], d < 3 ? 5 : 0) << d;
    EXPECT_EQ(roots[1][d], d < 3 ? 2 : 0) << d;
  }
}

TEST(SameBehaviour, GBlockOnRandomGraph) {
  Program p = nctest::program(
      "snd(G(mux(isSource(), 0, PositiveInfinity), temperature(), nbrRange, "
      "(v) => v + 1))");
  ASSERT_TRUE(nc::check_hfc_prime(p).ok) << nc::check_hfc_prime(p).message;
  std::mt19937_64 rng(6);
  nctest::Graph g = nctest::random_graph(rng, 6, 0.4, false, true);
  Environment env = nctest::environment_of(g);
  nctest::set_sensor(&env, 2, "isSource", Value::boolean(true));
  for (DeviceId d = 0; d < 6; ++d) {
    nctest::set_sensor(&env, d, "temperature", Value::number(d * 3));
  }
  nc::BehaviourVerdict v = nc::check_same_behaviour(p, nc::make_trace(env, 1, 50));
  EXPECT_TRUE(v.same) << v.divergence->describe();
  EXPECT_GE(v.firings, 300u);
}

TEST(SameBehaviour, GradientOnLineMatchesOracle) {
  Program p = nctest::program("gradient(isSource(), nbrRange)");
  nctest::Graph g = nctest::line(5);
  Environment env = nctest::environment_of(g);
  nctest::set_sensor(&env, 0, "isSource", Value::boolean(true));
  nc::TraceScenario sc = nc::make_trace(env, 2, 30);
  EXPECT_TRUE(nc::check_same_behaviour(p, sc).same);
  nc::Network net(env, hfc_firing(p));
  for (const nc::Action& a : sc.actions) {
    if (a.kind == nc::Action::Kind::kComp) net.step_comp(a.device);
    if (a.kind == nc::Action::Kind::kSend) net.step_send(a.device);
  }
  for (DeviceId d = 0; d < 5; ++d) {
    EXPECT_EQ(net.own_tree(d)->root, Value::number(d));
  }
}

TEST(SameBehaviour, ConstantProgram) {
  std::mt19937_64 rng(1);
  EXPECT_TRUE(nc::check_same_behaviour(nc::parse_program("7"),
                                       nc::make_trace(nc::random_environment(rng, 4), 1, 5))
                  .same);
}

TEST(SameBehaviour, DivergenceIsReported) {
  std::mt19937_64 rng(2);
  Environment env = nctest::environment_of(nctest::line(3));
  nc::BehaviourVerdict v = nc::compare_firings(
      nc_firing(nc::parse_program("1")), nc_firing(nc::parse_program("2")),
      nc::make_trace(env, 3, 2));
  ASSERT_FALSE(v.same);
  EXPECT_EQ(v.firings, 1u);
  EXPECT_NE(v.divergence->describe().find("1 vs 2"), std::string::npos);
}

TEST(SameBehaviourProperty, FragmentProgramsAgree) {
  std::mt19937_64 rng(55);
  int checked = 0;
  for (int i = 0; i < 2000 && checked < 220; ++i) {
    std::string src = nc::generate_program_source(rng);
    Program p = nc::parse_program(src);
    if (!nc::check_hfc_prime(p).ok) continue;
    Environment env = nc::random_environment(rng, 8);
    std::uint64_t rounds = std::uniform_int_distribution<int>(1, 30)(rng);
    nc::BehaviourVerdict v =
        nc::check_same_behaviour(p, nc::make_trace(env, rng(), rounds));
    EXPECT_TRUE(v.same) << src << "\n" << v.divergence->describe();
    ++checked;
  }
  EXPECT_GE(checked, 200);
}

TEST(RefactorProperty, ParametrisedAbstractionPreservesHfcBehaviour) {
  std::mt19937_64 rng(77);
  int checked = 0;
  for (int i = 0; i < 220; ++i) {
    RedexCase c = random_redex(rng);
    Program p = nctest::program(c.source);
    ASSERT_FALSE(nc::occurs_in_branch(p.main->callee()->body(), Symbol("x")))
        << c.source;
    ExprPtr local = find_subterm(p.main->arg(0), nc::pretty_print(
        nctest::program(c.local).main));
    ASSERT_NE(local, nullptr) << c.source;
    Program r = with_main(
        p, nc::refactor_abstract_params(p.main, {local}, nc::refactor_context(p)));
    Environment env = nc::random_environment(rng, 6);
    nc::TraceScenario sc = nc::make_trace(env, rng(), 8);
    nc::BehaviourVerdict v = nc::compare_firings(hfc_firing(p), hfc_firing(r), sc);
    EXPECT_TRUE(v.same) << c.source << "\n" << nc::pretty_print(r.main) << "\n"
                        << v.divergence->describe();
    nc::HfcCheckResult check = nc::check_hfc_prime(r);
    EXPECT_TRUE(check.ok) << nc::pretty_print(r.main) << ": " << check.message;
    ++checked;
  }
  EXPECT_GE(checked, 200);
}

// Bit i of mid() as a Boolean, bound to b<i>.
std::string bit_lets(int n) {
  std::string out;
  for (int i = 1; i <= n; ++i) {
    out += "let b" + std::to_string(i) + " = floor(mid() / " +
           std::to_string(1 << (i - 1)) + ") % 2 == 1 in ";
  }
  return out;
}

std::string linear_restriction(int n) {
  std::string e = "nbr{temperature()}";
  for (int i = 1; i <= n; ++i) {
    e += " + if (b" + std::to_string(i) + ") { nbr{0} } { nbr{0} }";
  }
  return bit_lets(n) + "foldhood(0, +, " + e + ")";
}

std::string branching_restriction(int n) {
  std::function<std::string(int)> go = [&](int i) -> std::string {
    if (i > n) return "foldhood(0, +, nbr{temperature()})";
    std::string b = "b" + std::to_string(i);
    return "if (" + b + ") { " + go(i + 1) + " } { " + go(i + 1) + " }";
  };
  return bit_lets(n) + go(1);
}

TEST(BooleanRestriction, LinearAndBranchingProgramsAgree) {
  std::mt19937_64 rng(31);
  for (int n = 1; n <= 3; ++n) {
    Program linear = nc::parse_program(linear_restriction(n));
    Program branching = nc::parse_program(branching_restriction(n));
    EXPECT_TRUE(nc::check_hfc_prime(branching).ok);
    int devices = 2 << n;
    nctest::Graph g = nctest::random_graph(rng, devices, 0.5, true, true);
    Environment env = nctest::environment_of(g);
    std::map<DeviceId, double> temp;
    for (DeviceId d = 0; d < static_cast<DeviceId>(devices); ++d) {
      temp[d] = std::uniform_int_distribution<int>(1, 50)(rng);
      nctest::set_sensor(&env, d, "temperature", Value::number(temp[d]));
    }
    nc::TraceScenario sc = nc::make_trace(env, rng(), 6);
    nc::BehaviourVerdict v =
        nc::compare_firings(nc_firing(linear), hfc_firing(branching), sc);
    EXPECT_TRUE(v.same) << n << ": " << v.divergence->describe();

    nc::Network net(env, nc_firing(linear));
    nc::RoundRobinScheduler rr;
    nc::StopCondition stop;
    stop.max_rounds = 2;
    nc::run(net, rr, stop);
    int mask = (1 << n) - 1;
    for (const auto& [d, nbrs] : g) {
      double expected = 0;
      for (const auto& [e, w] : nbrs) {
        if ((d & mask) == (e & mask)) expected += temp[e];
      }
      EXPECT_EQ(net.own_tree(d)->root.as_number(), expected)
          << "n=" << n << " device " << d;
    }
  }
}

}  // namespace
