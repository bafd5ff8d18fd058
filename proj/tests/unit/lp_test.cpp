#include "vresbid/lp.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "vresbid/errors.hpp"

namespace vresbid {
namespace {

LpModel x_at_least(double rhs) {
  LpModel m;
  const auto x = m.add_variable("x", -kInf, kInf, 1.0);
  m.add_constraint("c", {{x, 1.0}}, Relation::kGreaterEqual, rhs);
  return m;
}

TEST(LpSolve, GreaterEqualDualIsOne) {
  const LpModel m = x_at_least(3.0);
  const LpSolution s = solve(m);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 3.0, 1e-9);
  EXPECT_NEAR(s.primal[0], 3.0, 1e-9);
  EXPECT_NEAR(s.dual[0], 1.0, 1e-9);
  EXPECT_NEAR(check_strong_duality(m, s), 0.0, 1e-12);
}

TEST(LpSolve, InfeasibleReported) {
  LpModel m;
  const auto x = m.add_variable("x", 0.0, kInf, 1.0);
  m.add_constraint("c", {{x, 1.0}}, Relation::kLessEqual, -1.0);
  EXPECT_EQ(solve(m).status, LpStatus::kInfeasible);
}

TEST(LpSolve, UnboundedReported) {
  LpModel m;
  m.add_variable("x", 0.0, kInf, -1.0);
  EXPECT_EQ(solve(m).status, LpStatus::kUnbounded);
}

TEST(LpSolve, LessEqualDualIsNonnegative) {
  LpModel m;
  const auto x = m.add_variable("x", -kInf, kInf, -1.0);
  m.add_constraint("c", {{x, 1.0}}, Relation::kLessEqual, 4.0);
  const LpSolution s = solve(m);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, -4.0, 1e-9);
  EXPECT_NEAR(s.dual[0], 1.0, 1e-9);
}

TEST(LpSolve, EqualityDualCarriesSign) {
  LpModel m;
  const auto x = m.add_variable("x", -kInf, kInf, -2.0);
  m.add_constraint("c", {{x, 1.0}}, Relation::kEqual, 5.0);
  const LpSolution s = solve(m);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.dual[0], -2.0, 1e-9);
}

TEST(LpSolve, MaximizeMatchesNegatedMinimize) {
  LpModel m;
  m.set_sense(Sense::kMaximize);
  const auto x = m.add_variable("x", 0.0, kInf, 1.0);
  const auto y = m.add_variable("y", 0.0, kInf, 2.0);
  m.add_constraint("cap", {{x, 1.0}, {y, 1.0}}, Relation::kLessEqual, 4.0);
  m.add_constraint("ylim", {{y, 1.0}}, Relation::kLessEqual, 3.0);
  m.add_objective_constant(1.0);
  const LpSolution s = solve(m);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 1.0 + 1.0 + 6.0, 1e-9);
  EXPECT_NEAR(dual_objective(m, s), s.objective, 1e-9);
  EXPECT_LE(check_strong_duality(m, s), 1e-9);
}

TEST(LpSolve, ObjectiveConstantIncluded) {
  LpModel m = x_at_least(3.0);
  m.add_objective_constant(2.5);
  const LpSolution s = solve(m);
  EXPECT_NEAR(s.objective, 5.5, 1e-9);
  EXPECT_LE(check_strong_duality(m, s), 1e-9);
}

TEST(LpChecks, PerturbedDualIsDetected) {
  const LpModel m = x_at_least(3.0);
  LpSolution s = solve(m);
  s.dual[0] += 0.1;
  EXPECT_GE(check_strong_duality(m, s), 0.09);
}

TEST(LpChecks, PerturbedDualOnBoundedColumnIsDetected) {
  LpModel m;
  const auto x = m.add_variable("x", 0.0, 10.0, 1.0);
  const auto y = m.add_variable("y", 0.0, 10.0, 2.0);
  m.add_constraint("demand", {{x, 1.0}, {y, 1.0}}, Relation::kGreaterEqual, 12.0);
  LpSolution s = solve(m);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 10.0 + 4.0, 1e-9);
  EXPECT_NEAR(s.dual[0], 2.0, 1e-9);
  EXPECT_LE(check_strong_duality(m, s), 1e-9);
  s.dual[0] += 0.1;
  EXPECT_GE(check_strong_duality(m, s), 0.09);
}

TEST(LpChecks, ComplementarySlacknessAndResidual) {
  LpModel m;
  const auto x = m.add_variable("x", 0.0, kInf, 1.0);
  const auto y = m.add_variable("y", 0.0, kInf, 3.0);
  m.add_constraint("a", {{x, 1.0}, {y, 1.0}}, Relation::kGreaterEqual, 2.0);
  m.add_constraint("b", {{x, 1.0}}, Relation::kLessEqual, 5.0);
  m.add_constraint("c", {{x, 1.0}, {y, -1.0}}, Relation::kEqual, 1.0);
  const LpSolution s = solve(m);
  ASSERT_TRUE(s.optimal());
  EXPECT_LE(primal_residual(m, s), 1e-9);
  EXPECT_LE(complementary_slackness(m, s), 1e-9);
  for (std::size_t r = 0; r < m.num_constraints(); ++r) {
    if (m.constraint(r).relation != Relation::kEqual) {
      EXPECT_GE(s.dual[r], -1e-12);
    }
  }
}

TEST(LpModelTest, MergesDuplicateTerms) {
  LpModel m;
  const auto x = m.add_variable("x", 0.0, 1.0);
  m.add_constraint("c", {{x, 1.0}, {x, 2.0}}, Relation::kLessEqual, 1.0);
  ASSERT_EQ(m.constraint(0).terms.size(), 1u);
  EXPECT_DOUBLE_EQ(m.constraint(0).terms[0].coef, 3.0);
}

TEST(LpModelTest, RejectsDuplicateNames) {
  LpModel m;
  m.add_variable("x", 0.0, 1.0);
  m.add_variable("x", 0.0, 1.0);
  EXPECT_THROW(m.validate(), ValidationError);
  EXPECT_THROW(solve(m), ValidationError);
}

TEST(LpModelTest, RejectsDanglingIndex) {
  LpModel m;
  m.add_variable("x", 0.0, 1.0);
  m.add_constraint("c", {{3, 1.0}}, Relation::kLessEqual, 1.0);
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(LpModelTest, RejectsCrossedBounds) {
  LpModel m;
  m.add_variable("x", 2.0, 1.0);
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(LpExport, WritesLpText) {
  const auto path = std::filesystem::temp_directory_path() / "vresbid_lp_test.lp";
  write_lp(x_at_least(3.0), path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("min"), std::string::npos);
  EXPECT_NE(ss.str().find("x"), std::string::npos);
  std::filesystem::remove(path);
}

LpModel transport(int seed) {
  LpModel m;
  std::vector<std::size_t> v;
  for (int i = 0; i < 6; ++i) {
    v.push_back(m.add_variable("f" + std::to_string(i), 0.0, 10.0 + i,
                               1.0 + (i * 7 + seed) % 5));
  }
  m.add_constraint("d1", {{v[0], 1}, {v[1], 1}, {v[2], 1}}, Relation::kGreaterEqual,
                   8.0 + seed % 3);
  m.add_constraint("d2", {{v[3], 1}, {v[4], 1}, {v[5], 1}}, Relation::kGreaterEqual,
                   9.0);
  m.add_constraint("s", {{v[0], 1}, {v[3], 1}}, Relation::kLessEqual, 12.0);
  return m;
}

TEST(LpSolve, IdenticalInputsGiveIdenticalOutputs) {
  const LpModel m = transport(2);
  const LpSolution a = solve(m);
  const LpSolution b = solve(m);
  EXPECT_EQ(a.primal, b.primal);
  EXPECT_EQ(a.dual, b.dual);
}

TEST(LpSolve, ConcurrentIndependentSolves) {
  std::vector<LpSolution> serial;
  for (int k = 0; k < 16; ++k) serial.push_back(solve(transport(k)));
  std::vector<LpSolution> parallel(16);
  std::vector<std::thread> threads;
  for (int k = 0; k < 16; ++k) {
    threads.emplace_back([&, k] {
      for (int rep = 0; rep < 20; ++rep) parallel[k] = solve(transport(k));
    });
  }
  for (auto& t : threads) t.join();
  for (int k = 0; k < 16; ++k) {
    EXPECT_EQ(serial[k].primal, parallel[k].primal);
    EXPECT_EQ(serial[k].dual, parallel[k].dual);
  }
}

}  // namespace
}  // namespace vresbid
