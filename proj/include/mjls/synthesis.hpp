#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mjls/conic.hpp"
#include "mjls/model.hpp"
#include "mjls/stability.hpp"

namespace mjls {

enum class CdInit { uniform, deterministic };

struct CdParams {
  double L = 1e-3;            ///< proximal weight
  int max_iters = 50;
  double gamma_tol = 1e-7;    ///< success threshold on the slack
  double stall_tol = 1e-6;
  int stall_window = 3;
  double tau = 1e3;           ///< V_i <= tau I
  double eps = 1e-6;          ///< V_i >= eps I
  CdInit init = CdInit::uniform;
  std::optional<Policy> initial_policy;  ///< overrides `init` when set
  double time_limit_s = 0.0;  ///< 0 = unlimited
  /// When the policy step gains less than stall_tol in gamma, take a projected supergradient step
  /// on pi -> max_V gamma instead (see synth_coordinate_descent).
  bool ascent_fallback = true;
  double min_ascent_step = 1e-4;
  SdpOptions sdp;
};

/// Throws InvalidInput if a parameter is out of range.
void validate(const CdParams& params);

enum class SynthesisStatus { stabilized, converged_infeasible, iteration_limit, solver_failure };

std::string to_string(SynthesisStatus s);

struct SynthesisResult {
  SynthesisStatus status = SynthesisStatus::solver_failure;
  std::optional<Policy> policy;
  std::optional<LyapunovCertificate> certificate;
  std::optional<double> rho;  ///< spectral radius of the chain induced by `policy`
  std::vector<double> gamma_trace;
  int iterations = 0;
  double wall_time_s = 0.0;
  bool timed_out = false;
  std::string message;
};

/// Diagonal-Lyapunov relaxation: one SDP in K_{i,sigma} >= 0 and alpha_i with
/// sum_sigma K_{i,sigma} = alpha_i, 1 <= alpha_i <= tau, and
/// alpha_j I - sum_{i,sigma} T_sigma(i,j) K_{i,sigma} A_i A_i' >= eps I.
/// The policy is recovered as K / alpha and accepted only after the spectral
/// test and a certificate check with V_i = alpha_i I.
SynthesisResult synth_sdp_relaxation(const Mdp& mdp, const SwitchedLinearSystem& sys,
                                     const LyapunovOptions& opts = {});

struct VStep {
  std::vector<Matrix> v;
  double gamma = 0.0;
};

struct PolicyStep {
  Policy policy;
  double gamma = 0.0;
};

/// Fixed-policy step: minimize -gamma + L sum_i ||V_i - V_prev,i|| over
/// eps I <= V_i <= tau I and V_j - T_j(V) >= gamma I. Throws NumericalError
/// when the solver does not reach an optimum.
VStep cd_step_V(const Mdp& mdp, const SwitchedLinearSystem& sys, const Policy& policy,
                const std::vector<Matrix>& v_prev, const CdParams& params);

/// Fixed-V step: minimize -gamma + L sum |pi - pi_prev| over the policy
/// simplex and V_j - T_j(V) >= gamma I with p_ij linear in pi.
PolicyStep cd_step_policy(const Mdp& mdp, const SwitchedLinearSystem& sys, const std::vector<Matrix>& v,
                          const Policy& policy_prev, const CdParams& params);

/// Largest-slack V for a fixed policy (no proximal term). This is the
/// certificate extracted once coordinate descent accepts a policy.
VStep max_slack_certificate(const Mdp& mdp, const SwitchedLinearSystem& sys, const Policy& policy,
                            const CdParams& params);

/// Alternates cd_step_V and cd_step_policy from V = I and the initial policy.
/// When the policy step does not raise gamma, a projected supergradient step
/// on the max-slack value (multipliers of the max-slack SDP, step length
/// found by backtracking) is taken instead, unless ascent_fallback is off.
SynthesisResult synth_coordinate_descent(const Mdp& mdp, const SwitchedLinearSystem& sys,
                                         const CdParams& params = {});

struct BruteForceResult {
  Policy policy;
  double rho = 0.0;
  std::size_t evaluated = 0;
};

/// Exhaustive scan of each mode's action simplex on a grid of step
/// grid_step (1/grid_step must be an integer). Throws InvalidInput when the
/// grid exceeds max_points.
BruteForceResult brute_force_policy_search(const Mdp& mdp, const SwitchedLinearSystem& sys, double grid_step,
                                           std::size_t max_points = 10'000'000);

}  // namespace mjls
