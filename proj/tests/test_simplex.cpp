#include <gtest/gtest.h>

#include <array>
#include <random>
#include <sstream>

#include "varlpec/errors.hpp"
#include "varlpec/lp.hpp"

namespace varlpec::lp {
namespace {

TEST(Simplex, MinimiseOverHalfLine) {
  LpModel m;
  m.add_variable("x", 0.0, kInfinity, 1.0);
  const LpSolution s = solve_lp(m);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_DOUBLE_EQ(s.x[0], 0.0);
  EXPECT_DOUBLE_EQ(s.objective, 0.0);
}

TEST(Simplex, ContradictoryBoundRowIsInfeasible) {
  LpModel m;
  const int x = m.add_variable("x", 0.0, kInfinity, 1.0);
  m.add_constraint(LinearExpr{{x, 1.0}}, Relation::kLessEqual, -1.0);
  EXPECT_EQ(solve_lp(m).status, LpStatus::kInfeasible);
}

TEST(Simplex, UnboundedRay) {
  LpModel m;
  m.add_variable("x", 0.0, kInfinity, -1.0);
  EXPECT_EQ(solve_lp(m).status, LpStatus::kUnbounded);
}

TEST(Simplex, ExtraRowsOnTopOfBase) {
  LpModel m;
  const int x = m.add_variable("x", 0.0, 1.0, 1.0);
  const Constraint half{{{x, 1.0}}, Relation::kGreaterEqual, 0.5, "half"};
  EXPECT_NEAR(solve_lp_with(m, std::span(&half, 1)).objective, 0.5, 1e-12);

  const std::vector<Constraint> clash = {{{{x, 1.0}}, Relation::kGreaterEqual, 2.0, "a"},
                                         {{{x, 1.0}}, Relation::kLessEqual, 1.0, "b"}};
  EXPECT_EQ(solve_lp_with(m, clash).status, LpStatus::kInfeasible);
  EXPECT_EQ(m.num_constraints(), 0);
}

TEST(Simplex, EmptyExtraRowsMatchPlainSolve) {
  LpModel m;
  const int a = m.add_variable("a", -2.0, 3.0, 1.0);
  const int b = m.add_variable("b", 0.0, kInfinity, 2.0);
  m.add_constraint(LinearExpr{{a, 1.0}, {b, 1.0}}, Relation::kGreaterEqual, 1.0);
  const LpSolution p = solve_lp(m);
  const LpSolution q = solve_lp_with(m, {});
  EXPECT_EQ(p.status, q.status);
  EXPECT_EQ(p.x, q.x);
  EXPECT_EQ(p.objective, q.objective);
}

TEST(Simplex, FreeVariablesAndEqualities) {
  // min a + 2b s.t. a - b = 1, a + b >= 3, a, b free -> a = 2, b = 1.
  LpModel m;
  const int a = m.add_variable("a", -kInfinity, kInfinity, 1.0);
  const int b = m.add_variable("b", -kInfinity, kInfinity, 2.0);
  m.add_constraint(LinearExpr{{a, 1.0}, {b, -1.0}}, Relation::kEqual, 1.0);
  m.add_constraint(LinearExpr{{a, 1.0}, {b, 1.0}}, Relation::kGreaterEqual, 3.0);
  const LpSolution s = solve_lp(m);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.x[a], 2.0, 1e-10);
  EXPECT_NEAR(s.x[b], 1.0, 1e-10);
  EXPECT_NEAR(s.objective, 4.0, 1e-10);
}

TEST(Simplex, RepeatedTermsAreSummed) {
  LpModel m;
  const int x = m.add_variable("x", 0.0, kInfinity, 1.0);
  m.add_constraint(LinearExpr{{x, 1.0}, {x, 1.0}}, Relation::kGreaterEqual, 4.0);
  EXPECT_NEAR(solve_lp(m).objective, 2.0, 1e-12);
}

TEST(Simplex, CheckRejectsBadModels) {
  LpModel m;
  const int x = m.add_variable("x", 0.0, 1.0);
  m.set_bounds(x, 2.0, 1.0);
  EXPECT_THROW(m.check(), Error);
  LpModel n;
  n.add_variable("x");
  EXPECT_THROW(n.add_constraint(LinearExpr{{3, 1.0}}, Relation::kEqual, 0.0), Error);
}

TEST(Simplex, ListingNamesEveryRow) {
  LpModel m;
  const int x = m.add_variable("x", 0.0, 1.0, 1.0);
  m.add_constraint(LinearExpr{{x, 1.0}}, Relation::kGreaterEqual, 0.25, "floor");
  std::ostringstream out;
  write_lp_listing(m, out);
  EXPECT_NE(out.str().find("floor"), std::string::npos);
}

// Random feasible, bounded LPs: the returned point satisfies every row and
// its objective matches c.x; duality is checked against a brute-force vertex
// scan in two variables.
TEST(Simplex, RandomTwoVariableLpsAgainstVertexScan) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    LpModel m;
    const int a = m.add_variable("a", -5.0, 5.0, u(rng));
    const int b = m.add_variable("b", -5.0, 5.0, u(rng));
    std::vector<std::array<double, 3>> rows;
    for (int r = 0; r < 4; ++r) {
      const double ca = u(rng), cb = u(rng), rhs = 1.0 + u(rng);
      rows.push_back({ca, cb, rhs});
      m.add_constraint(LinearExpr{{a, ca}, {b, cb}}, Relation::kLessEqual, rhs);
    }
    const LpSolution s = solve_lp(m);
    ASSERT_TRUE(s.optimal()) << trial;  // origin is feasible, box is bounded
    std::vector<std::array<double, 3>> lines = rows;
    lines.push_back({1, 0, 5});
    lines.push_back({1, 0, -5});
    lines.push_back({0, 1, 5});
    lines.push_back({0, 1, -5});
    double best = kInfinity;
    for (std::size_t p = 0; p < lines.size(); ++p) {
      for (std::size_t q = p + 1; q < lines.size(); ++q) {
        const double det = lines[p][0] * lines[q][1] - lines[p][1] * lines[q][0];
        if (std::abs(det) < 1e-12) continue;
        const double va = (lines[p][2] * lines[q][1] - lines[p][1] * lines[q][2]) / det;
        const double vb = (lines[p][0] * lines[q][2] - lines[p][2] * lines[q][0]) / det;
        if (std::abs(va) > 5 + 1e-9 || std::abs(vb) > 5 + 1e-9) continue;
        bool ok = true;
        for (const auto& r : rows) ok = ok && r[0] * va + r[1] * vb <= r[2] + 1e-9;
        if (ok) best = std::min(best, m.costs()[0] * va + m.costs()[1] * vb);
      }
    }
    EXPECT_NEAR(s.objective, best, 1e-8) << trial;
    for (const auto& r : rows) EXPECT_LE(r[0] * s.x[a] + r[1] * s.x[b], r[2] + 1e-8);
    EXPECT_LE(s.max_primal_residual, 1e-8);
  }
}

}  // namespace
}  // namespace varlpec::lp
