#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mjls/numerics.hpp"

namespace mjls {

inline constexpr double kStochasticTol = 1e-9;

/// x(k+1) = A_s x(k) + B_s w(k), one (A, B) pair per mode.
struct SwitchedLinearSystem {
  int n = 0;  ///< state dimension
  int m = 0;  ///< noise dimension (0 when no B is given)
  std::vector<Matrix> a;
  std::vector<Matrix> b;  ///< empty, or one n x m matrix per mode

  int num_modes() const { return static_cast<int>(a.size()); }
  bool has_noise_input() const { return !b.empty(); }
};

/// Mode-switching MDP. An action that is undefined at mode i has an all-zero
/// row i in its transition matrix.
struct Mdp {
  int num_modes = 0;
  std::vector<std::string> actions;
  std::vector<Matrix> transitions;  ///< one num_modes x num_modes matrix per action
  int initial_mode = 0;

  int num_actions() const { return static_cast<int>(actions.size()); }
  bool defined(int mode, int action) const;
  std::vector<int> defined_actions(int mode) const;
};

/// pi(i, sigma): probability of taking action sigma in mode i.
struct Policy {
  Matrix pi;
};

struct Dtmc {
  Matrix p;
  int initial_mode = 0;
};

struct NoiseSpec {
  Vector mean;
  Matrix covariance;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Collects every invariant violation of the pair; never throws.
ValidationReport validate_system(const SwitchedLinearSystem& sys, const Mdp& mdp);

/// Empty when the policy is row-stochastic, nonnegative and puts no mass on
/// undefined actions; otherwise one message per violation.
std::vector<std::string> policy_violations(const Mdp& mdp, const Policy& policy);

std::vector<std::string> noise_violations(const NoiseSpec& noise, int m);

/// P(i, j) = sum_sigma T_sigma(i, j) * pi(i, sigma). Throws InvalidInput for
/// an invalid policy.
Dtmc induce_dtmc(const Mdp& mdp, const Policy& policy);

/// Every deterministic policy over defined actions, lexicographic in the
/// per-mode action index (mode 0 varies slowest). Throws InvalidInput when
/// the count exceeds max_count.
std::vector<Policy> enumerate_deterministic_policies(const Mdp& mdp, std::size_t max_count = 1'000'000);

/// Uniform distribution over the defined actions of every mode.
Policy uniform_policy(const Mdp& mdp);

/// Snaps entries within kStochasticTol of a valid stochastic row onto it
/// (clamps tiny negatives, rescales the row sum). Rows further off are left
/// untouched so validation still reports them.
void renormalize_rows(Matrix& rows);

}  // namespace mjls
