#pragma once

#include <cmath>

#include "mjls/model.hpp"

namespace mjls::fixtures {

// Two-mode, two-action system where no deterministic policy is mean-square
// stabilizing but a randomized one is.
inline SwitchedLinearSystem counterexample_system() {
  SwitchedLinearSystem sys;
  sys.n = 2;
  Matrix a1(2, 2), a2(2, 2);
  a1 << 0.99, -0.56, -0.19, 0.73;
  a2 << 0.38, -0.98, -0.66, -0.66;
  sys.a = {a1, a2};
  return sys;
}

inline Mdp counterexample_mdp() {
  Mdp mdp;
  mdp.num_modes = 2;
  mdp.actions = {"sigma1", "sigma2"};
  Matrix t1(2, 2), t2(2, 2);
  t1 << 0.21, 0.79, 0.90, 0.10;
  t2 << 0.71, 0.29, 0.13, 0.87;
  mdp.transitions = {t1, t2};
  return mdp;
}

inline Policy policy_from(std::initializer_list<std::initializer_list<double>> rows) {
  Policy p{Matrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()))};
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) p.pi(i, j++) = v;
    ++i;
  }
  return p;
}

inline SwitchedLinearSystem scalar_like_system(int n, int modes, double scale) {
  SwitchedLinearSystem sys;
  sys.n = n;
  for (int i = 0; i < modes; ++i) sys.a.push_back(scale * Matrix::Identity(n, n));
  return sys;
}

}  // namespace mjls::fixtures

#include <random>

#include "mjls/casegen.hpp"

namespace mjls::fixtures {

// Small instance with entry scale drawn so that the spectral radius of
// the lifted matrix lands on both sides of 1.
inline Instance random_small_instance(std::mt19937_64& rng, int max_n = 4, int max_modes = 3, int max_actions = 2) {
  std::uniform_int_distribution<int> n(1, max_n), modes(1, max_modes), actions(1, max_actions);
  const int dim = n(rng);
  std::uniform_real_distribution<double> scale(0.2, 2.2 / std::sqrt(static_cast<double>(dim)));
  const double s = scale(rng);
  return gen_random_instance(dim, modes(rng), actions(rng), {-s, s}, rng());
}

inline Policy random_policy(const Mdp& mdp, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Policy p{Matrix::Zero(mdp.num_modes, mdp.num_actions())};
  for (int i = 0; i < mdp.num_modes; ++i) {
    for (int s : mdp.defined_actions(i)) p.pi(i, s) = expo(rng);
    p.pi.row(i) /= p.pi.row(i).sum();
  }
  return p;
}

}  // namespace mjls::fixtures
