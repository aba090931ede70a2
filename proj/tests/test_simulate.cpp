#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "mjls/error.hpp"
#include "mjls/numerics.hpp"
#include "mjls/simulate.hpp"
#include "mjls/stability.hpp"

using namespace mjls;
using fixtures::counterexample_mdp;
using fixtures::counterexample_system;
using fixtures::policy_from;

namespace {

NoiseSpec no_noise() { return {}; }

SwitchedLinearSystem with_identity_input(SwitchedLinearSystem sys) {
  sys.m = sys.n;
  sys.b.assign(sys.a.size(), Matrix::Identity(sys.n, sys.n));
  return sys;
}

NoiseSpec zero_noise(int m) { return {Vector::Zero(m), Matrix::Zero(m, m)}; }

Dtmc chain(double p21) { return induce_dtmc(counterexample_mdp(), policy_from({{1, 0}, {p21, 1.0 - p21}})); }

MomentTrace synthetic(const std::vector<double>& sizes) {
  MomentTrace t;
  t.horizon = static_cast<int>(sizes.size()) - 1;
  t.trials = 1;
  for (double s : sizes) {
    t.mean_trace.push_back(Vector::Constant(1, s));
    t.second_moment_trace.push_back(Matrix::Constant(1, 1, s * s));
  }
  return t;
}

}  // namespace

TEST(Simulate, ZeroDynamicsGiveZeroMoments) {
  const auto sys = fixtures::scalar_like_system(2, 2, 0.0);
  const Dtmc d{counterexample_mdp().transitions[0], 0};
  const Vector x0 = Vector::Constant(2, 3.0);
  const auto t = simulate_trajectories(sys, d, no_noise(), x0, {10, 50, 1, 1});
  ASSERT_EQ(t.steps(), 11);
  EXPECT_EQ(t.mean_trace[0], x0);
  EXPECT_EQ(t.second_moment_trace[0], x0 * x0.transpose());
  for (int k = 1; k <= 10; ++k) {
    EXPECT_EQ(t.mean_trace[k].cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(t.second_moment_trace[k].cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Simulate, StableChainDecays) {
  const auto sys = with_identity_input(counterexample_system());
  const auto t = simulate_trajectories(sys, chain(0.27), zero_noise(2), Vector::Ones(2), {100, 1000, 7, 1});
  EXPECT_FALSE(t.diverged_at.has_value());
  EXPECT_LT(sup_norm(t.second_moment_trace[100]), 1e-3);
  EXPECT_EQ(mss_empirical_diagnostic(t).verdict, EmpiricalVerdict::converging);
}

TEST(Simulate, UnstableChainGrows) {
  const auto sys = counterexample_system();
  const auto t = simulate_trajectories(sys, chain(1.0), no_noise(), Vector::Ones(2), {400, 2000, 7, 1});
  const double start = sup_norm(t.second_moment_trace[0]);
  EXPECT_GT(sup_norm(t.second_moment_trace.back()), 10.0 * start);
  EXPECT_EQ(mss_empirical_diagnostic(t).verdict, EmpiricalVerdict::diverging);
}

TEST(Simulate, DivergenceTruncatesTrace) {
  const auto sys = fixtures::scalar_like_system(1, 1, 10.0);
  const Dtmc d{Matrix::Ones(1, 1), 0};
  const auto t = simulate_trajectories(sys, d, no_noise(), Vector::Ones(1), {50, 3, 0, 1});
  ASSERT_TRUE(t.diverged_at.has_value());
  EXPECT_EQ(*t.diverged_at, 13);  // 10^13 > 1e12
  EXPECT_EQ(t.steps(), 13);
  EXPECT_EQ(mss_empirical_diagnostic(t, 0.1, 5).verdict, EmpiricalVerdict::diverging);
}

TEST(Simulate, NoiseMeanDrivesStationaryMean) {
  // x+ = 0.5 x + w, E[w] = 1 -> E[x] -> 2; Var[w] = 0.75 -> Var[x] -> 1.
  auto sys = with_identity_input(fixtures::scalar_like_system(1, 1, 0.5));
  const Dtmc d{Matrix::Ones(1, 1), 0};
  const NoiseSpec noise{Vector::Ones(1), Matrix::Constant(1, 1, 0.75)};
  const auto t = simulate_trajectories(sys, d, noise, Vector::Zero(1), {60, 20000, 3, 1});
  EXPECT_NEAR(t.mean_limit(0), 2.0, 0.03);
  EXPECT_NEAR(t.second_limit(0, 0), 5.0, 0.1);
}

TEST(Simulate, InputErrors) {
  const auto sys = counterexample_system();
  EXPECT_THROW(simulate_trajectories(sys, chain(0.27), no_noise(), Vector::Ones(3), {}), InvalidInput);
  EXPECT_THROW(simulate_trajectories(sys, chain(0.27), no_noise(), Vector::Ones(2), {0, 10, 0, 1}), InvalidInput);
  EXPECT_THROW(simulate_trajectories(sys, chain(0.27), no_noise(), Vector::Ones(2), {10, 0, 0, 1}), InvalidInput);
  const Dtmc wrong{Matrix::Ones(1, 1), 0};
  EXPECT_THROW(simulate_trajectories(sys, wrong, no_noise(), Vector::Ones(2), {}), InvalidInput);
  const auto noisy = with_identity_input(sys);
  EXPECT_THROW(simulate_trajectories(noisy, chain(0.27), zero_noise(3), Vector::Ones(2), {}), InvalidInput);
}

TEST(Simulate, ReproducibleAndThreadIndependentProperty) {
  const auto sys = with_identity_input(counterexample_system());
  const NoiseSpec noise{Vector::Constant(2, 0.1), 0.2 * Matrix::Identity(2, 2)};
  for (std::uint64_t seed : {0ull, 1ull, 99ull, 0xdeadbeefcafeull}) {
    const SimulationOptions serial{40, 700, seed, 1};
    SimulationOptions parallel = serial;
    parallel.threads = 3;
    const auto a = simulate_trajectories(sys, chain(0.27), noise, Vector::Ones(2), serial);
    const auto b = simulate_trajectories(sys, chain(0.27), noise, Vector::Ones(2), serial);
    const auto c = simulate_trajectories(sys, chain(0.27), noise, Vector::Ones(2), parallel);
    for (int k = 0; k < a.steps(); ++k) {
      EXPECT_EQ(a.mean_trace[k], b.mean_trace[k]);
      EXPECT_EQ(a.second_moment_trace[k], c.second_moment_trace[k]);
      EXPECT_EQ(a.mean_trace[k], c.mean_trace[k]);
    }
  }
}

TEST(Simulate, SecondMomentsSymmetricPsdProperty) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = fixtures::random_small_instance(rng, 3, 3, 2);
    const Dtmc d = induce_dtmc(inst.mdp, fixtures::random_policy(inst.mdp, rng));
    const NoiseSpec noise{Vector::Zero(inst.sys.m), Matrix::Identity(inst.sys.m, inst.sys.m)};
    const auto t = simulate_trajectories(inst.sys, d, noise, Vector::Ones(inst.sys.n), {30, 200, rng(), 1});
    for (const auto& s : t.second_moment_trace) {
      EXPECT_LT((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, sup_norm(s)));
      EXPECT_GE(min_eig_symmetric(s), -1e-6 * std::max(1.0, sup_norm(s)));
    }
  }
}

TEST(Simulate, GeometricDecayProperty) {
  std::mt19937_64 rng(62);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 10; ++trial) {
    const Instance inst = fixtures::random_small_instance(rng, 3, 3, 2);
    const Dtmc d = induce_dtmc(inst.mdp, fixtures::random_policy(inst.mdp, rng));
    const double rho = *check_mss_spectral(d, inst.sys).rho;
    if (rho >= 0.95 || rho < 0.3) continue;
    ++checked;
    const auto t = simulate_trajectories(inst.sys, d, zero_noise(inst.sys.m), Vector::Ones(inst.sys.n), {100, 2000, rng(), 1});
    const double rate = rho + 0.02;
    // Fit c on [20, 40], then check the rate holds on [40, 100].
    double c = 0.0;
    for (int k = 20; k <= 40; ++k) c = std::max(c, sup_norm(t.second_moment_trace[k]) / std::pow(rate, k));
    for (int k = 40; k <= 100; ++k) {
      // Factor 3 absorbs Monte-Carlo error in the sampled moments.
      EXPECT_LE(sup_norm(t.second_moment_trace[k]), 3.0 * c * std::pow(rate, k)) << "rho " << rho << " k " << k;
    }
  }
  EXPECT_GE(checked, 5);
}

TEST(Diagnostic, SyntheticTraces) {
  std::vector<double> decay, growth, flat;
  std::mt19937_64 rng(63);
  std::normal_distribution<double> jitter(0.0, 0.01);
  for (int k = 0; k <= 100; ++k) {
    decay.push_back(std::pow(0.9, k));
    growth.push_back(std::pow(1.05, k));
    flat.push_back(1.0 + jitter(rng));
  }
  EXPECT_EQ(mss_empirical_diagnostic(synthetic(decay)).verdict, EmpiricalVerdict::converging);
  const auto g = mss_empirical_diagnostic(synthetic(growth));
  EXPECT_EQ(g.verdict, EmpiricalVerdict::diverging);
  EXPECT_GT(g.relative_change, 0.1);
  EXPECT_EQ(mss_empirical_diagnostic(synthetic(flat), 0.1).verdict, EmpiricalVerdict::converging);
  EXPECT_THROW(mss_empirical_diagnostic(synthetic(std::vector<double>(30, 1.0))), InvalidInput);
}

TEST(Diagnostic, StationaryNoisyChainConverges) {
  const auto sys = with_identity_input(counterexample_system());
  const NoiseSpec noise{Vector::Zero(2), Matrix::Identity(2, 2)};
  const auto t = simulate_trajectories(sys, chain(0.27), noise, Vector::Zero(2), {150, 2000, 4, 1});
  EXPECT_EQ(mss_empirical_diagnostic(t, 0.1).verdict, EmpiricalVerdict::converging);
  // Longer run with 10x trials agrees on the stationary level.
  const auto ref = simulate_trajectories(sys, chain(0.27), noise, Vector::Zero(2), {150, 20000, 5, 1});
  EXPECT_NEAR(sup_norm(t.second_limit), sup_norm(ref.second_limit), 0.1 * sup_norm(ref.second_limit));
}

TEST(TraceCsv, HeaderAndRows) {
  const auto sys = fixtures::scalar_like_system(2, 1, 0.5);
  const Dtmc d{Matrix::Ones(1, 1), 0};
  const auto t = simulate_trajectories(sys, d, {}, Vector::Ones(2), {3, 1, 0, 1});
  std::ostringstream out;
  write_trace_csv(t, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("step,", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}
