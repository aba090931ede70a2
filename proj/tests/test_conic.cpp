#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "mjls/conic.hpp"
#include "mjls/error.hpp"
#include "mjls/stability.hpp"

using namespace mjls;

TEST(Conic, ScalarLmiOptimum) {
  SdpProblem p(1);
  p.objective(0) = 1.0;
  auto& b = p.add_block(2);
  b.f0 = Matrix::Identity(2, 2);
  b.terms.push_back({0, Matrix::Identity(2, 2)});
  const auto sol = solve_sdp(p);
  EXPECT_EQ(sol.status, SdpStatus::optimal);
  EXPECT_NEAR(sol.y(0), 1.0, 1e-6);
}

TEST(Conic, BoundContradictionIsInfeasible) {
  SdpProblem p(1);
  auto& b = p.add_block(2);
  b.f0 = Matrix::Identity(2, 2);
  b.terms.push_back({0, Matrix::Identity(2, 2)});
  p.set_upper(0, 0.5);
  const auto sol = solve_sdp(p);
  EXPECT_EQ(sol.status, SdpStatus::infeasible);
}

namespace {

Matrix random_symmetric(std::mt19937_64& rng, int k) {
  std::normal_distribution<double> g;
  Matrix m(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) m(i, j) = g(rng);
  }
  return 0.5 * (m + m.transpose());
}

// Strictly feasible (y0 has margin 1) and bounded (c lies in the interior of
// the dual cone image) random SDP.
SdpProblem random_bounded_sdp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> vars(1, 4), blocks(1, 3), size(1, 3);
  SdpProblem p(vars(rng));
  Vector y0 = Vector::NullaryExpr(p.num_vars, [&] { return std::normal_distribution<double>()(rng); });
  p.objective.setZero();
  const int nb = blocks(rng);
  for (int b = 0; b < nb; ++b) {
    auto& blk = p.add_block(size(rng));
    const int k = blk.size();
    const Matrix g = random_symmetric(rng, k);
    const Matrix z = g * g.transpose() + Matrix::Identity(k, k);
    Matrix sum = Matrix::Zero(k, k);
    for (int v = 0; v < p.num_vars; ++v) {
      const Matrix f = random_symmetric(rng, k);
      blk.terms.push_back({v, f});
      sum += y0(v) * f;
      p.objective(v) += (f.array() * z.array()).sum();
    }
    blk.f0 = sum - Matrix::Identity(k, k);
  }
  // Keep the problem bounded in directions the blocks do not constrain.
  for (int v = 0; v < p.num_vars; ++v) {
    p.set_lower(v, y0(v) - 10.0);
    p.set_upper(v, y0(v) + 10.0);
  }
  return p;
}

}  // namespace

TEST(Conic, ScalarLmiMarginAndResidual) {
  SdpProblem p(1);
  p.objective(0) = 1.0;
  auto& b = p.add_block(2);
  b.f0 = Matrix::Identity(2, 2);
  b.terms.push_back({0, Matrix::Identity(2, 2)});
  const auto sol = solve_sdp(p);
  ASSERT_EQ(sol.status, SdpStatus::optimal);
  EXPECT_NEAR(sol.margin, 0.0, 1e-6);
  EXPECT_NEAR(lmi_residual(p, Vector::Constant(1, 2.0)).min_eig, 1.0, 1e-14);
  EXPECT_NEAR(lmi_residual(p, Vector::Constant(1, 0.5)).min_eig, -0.5, 1e-14);
  EXPECT_THROW(lmi_residual(p, Vector::Zero(2)), InvalidInput);
}

TEST(Conic, EqualityConstrainedOptimum) {
  // minimize y0 + 2 y1 s.t. y0 + y1 = 1, y0 >= 0, y1 >= 0 -> (1, 0).
  SdpProblem p(2);
  p.objective << 1.0, 2.0;
  p.add_equality(Vector::Ones(2), 1.0);
  auto& b = p.add_block(2);
  Matrix e0 = Matrix::Zero(2, 2), e1 = Matrix::Zero(2, 2);
  e0(0, 0) = 1.0;
  e1(1, 1) = 1.0;
  b.terms.push_back({0, e0});
  b.terms.push_back({1, e1});
  const auto sol = solve_sdp(p);
  ASSERT_EQ(sol.status, SdpStatus::optimal);
  EXPECT_NEAR(sol.y(0), 1.0, 1e-6);
  EXPECT_NEAR(sol.y(1), 0.0, 1e-6);
  EXPECT_NEAR(sol.objective_value, 1.0, 1e-6);
  EXPECT_LT(sol.eq_residual, 1e-7);
}

TEST(Conic, DualMultipliersSatisfyStationarity) {
  // minimize y s.t. y I >= diag(1, 3): multiplier concentrates on the 3.
  SdpProblem p(1);
  p.objective(0) = 1.0;
  auto& b = p.add_block(2);
  b.f0 = Matrix::Zero(2, 2);
  b.f0(0, 0) = 1.0;
  b.f0(1, 1) = 3.0;
  b.terms.push_back({0, Matrix::Identity(2, 2)});
  const auto sol = solve_sdp(p);
  ASSERT_EQ(sol.status, SdpStatus::optimal);
  EXPECT_NEAR(sol.y(0), 3.0, 1e-6);
  ASSERT_EQ(sol.dual.size(), 1u);
  EXPECT_NEAR(sol.dual[0].trace(), 1.0, 1e-5);
  EXPECT_NEAR(sol.dual[0](1, 1), 1.0, 1e-5);
  EXPECT_GE(min_eig_symmetric(sol.dual[0]), -1e-7);
}

TEST(Conic, InfeasibleHasCertificate) {
  // y >= 1 and -y >= 0 in one 2x2 block each.
  SdpProblem p(1);
  auto& a = p.add_block(1);
  a.f0 = Matrix::Ones(1, 1);
  a.terms.push_back({0, Matrix::Ones(1, 1)});
  auto& b = p.add_block(1);
  b.f0 = Matrix::Zero(1, 1);
  b.terms.push_back({0, -Matrix::Ones(1, 1)});
  const auto sol = solve_sdp(p);
  ASSERT_EQ(sol.status, SdpStatus::infeasible);
  EXPECT_FALSE(sol.certificate.empty());
}

TEST(Conic, UnboundedDetected) {
  SdpProblem p(1);
  p.objective(0) = 1.0;
  auto& b = p.add_block(1);
  b.f0 = Matrix::Zero(1, 1);
  b.terms.push_back({0, -Matrix::Ones(1, 1)});  // y <= 0, minimize y
  EXPECT_EQ(solve_sdp(p).status, SdpStatus::unbounded);
}

TEST(Conic, MalformedProblemsThrow) {
  SdpProblem asym(1);
  auto& b = asym.add_block(2);
  Matrix f = Matrix::Zero(2, 2);
  f(0, 1) = 1.0;
  b.terms.push_back({0, f});
  EXPECT_THROW(solve_sdp(asym), InvalidInput);

  SdpProblem wrong_size(1);
  wrong_size.add_block(2).terms.push_back({0, Matrix::Identity(3, 3)});
  EXPECT_THROW(validate_problem(wrong_size), InvalidInput);

  SdpProblem bad_var(1);
  bad_var.add_block(1).terms.push_back({3, Matrix::Ones(1, 1)});
  EXPECT_THROW(validate_problem(bad_var), InvalidInput);
}

TEST(Conic, CounterexampleLyapunovLmiFeasible) {
  const Dtmc d = induce_dtmc(fixtures::counterexample_mdp(), fixtures::policy_from({{1, 0}, {0.27, 0.73}}));
  const SdpProblem p = lyapunov_sdp(d, fixtures::counterexample_system());
  const auto sol = solve_sdp(p);
  ASSERT_TRUE(sol.status == SdpStatus::optimal || sol.status == SdpStatus::feasible);
  EXPECT_GE(lmi_residual(p, sol.y).min_eig, -1e-6);
}

TEST(Conic, ReturnedPointsReverifyProperty) {
  std::mt19937_64 rng(31);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const SdpProblem p = random_bounded_sdp(rng);
    const SdpOptions opts;
    const auto sol = solve_sdp(p, opts);
    ASSERT_NE(sol.status, SdpStatus::infeasible) << "trial " << trial;
    ASSERT_NE(sol.status, SdpStatus::unbounded) << "trial " << trial;
    if (sol.status != SdpStatus::optimal && sol.status != SdpStatus::feasible) continue;
    ++solved;
    const auto r = lmi_residual(p, sol.y);
    EXPECT_GE(r.min_eig, -10.0 * opts.tol);
    EXPECT_LE(r.eq_residual, 10.0 * opts.tol);
  }
  EXPECT_GE(solved, 55);
}

TEST(Conic, BlockScalingPreservesStatusProperty) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 40; ++trial) {
    SdpProblem p = random_bounded_sdp(rng);
    // Make roughly half of them infeasible by tightening the bounds to a
    // point far outside the feasible region.
    if (trial % 2 == 1) {
      for (int v = 0; v < p.num_vars; ++v) {
        p.lower[v] = -100.0;
        p.upper[v] = -99.0;
      }
      p.lmis[0].f0 += 1e3 * Matrix::Identity(p.lmis[0].size(), p.lmis[0].size());
    }
    SdpProblem scaled = p;
    for (auto& blk : scaled.lmis) {
      blk.f0 *= 2.0;
      for (auto& t : blk.terms) t.coeff *= 2.0;
    }
    const auto a = solve_sdp(p).status;
    const auto b = solve_sdp(scaled).status;
    const bool fa = a == SdpStatus::optimal || a == SdpStatus::feasible;
    const bool fb = b == SdpStatus::optimal || b == SdpStatus::feasible;
    EXPECT_EQ(fa, fb) << "trial " << trial << ": " << to_string(a) << " vs " << to_string(b);
  }
}

TEST(Conic, SparseDumpFormat) {
  SdpProblem p(1);
  p.objective(0) = 1.0;
  p.add_equality(Vector::Ones(1), 2.0);
  auto& b = p.add_block(2);
  b.f0 = Matrix::Identity(2, 2);
  b.terms.push_back({0, Matrix::Identity(2, 2)});
  p.set_lower(0, 0.0);
  std::ostringstream out;
  write_sparse_dump(p, out);
  const std::string s = out.str();
  EXPECT_NE(s.find("c 1 1"), std::string::npos);
  EXPECT_NE(s.find("eqb 1 2"), std::string::npos);
  EXPECT_NE(s.find("bound 1 lower 0"), std::string::npos);
  EXPECT_NE(s.find("\n1 0 1 1 1"), std::string::npos);
  EXPECT_NE(s.find("\n1 1 2 2 1"), std::string::npos);
  EXPECT_EQ(s.find("\n1 1 1 2"), std::string::npos);  // zero off-diagonal omitted
}
