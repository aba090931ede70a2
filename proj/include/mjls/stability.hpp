#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mjls/conic.hpp"
#include "mjls/model.hpp"

namespace mjls {

/// V = (V_1, ..., V_N) with V_i > 0 and V_j - T_j(V) > 0 for every j.
struct LyapunovCertificate {
  std::vector<Matrix> v;
  double epsilon = 0.0;
};

enum class StabilityMethod { spectral, lyapunov, diagonal };
enum class Verdict { stable, unstable, inconclusive };

std::string to_string(StabilityMethod m);
std::string to_string(Verdict v);

struct StabilityReport {
  std::optional<double> rho;  ///< spectral radius of the lifted matrix (spectral method)
  bool stable = false;
  Verdict verdict = Verdict::inconclusive;
  std::optional<LyapunovCertificate> certificate;
  StabilityMethod method = StabilityMethod::spectral;
};

struct LyapunovOptions {
  double eps = 1e-6;   ///< strict inequalities become >= eps * I
  double tau = 1e3;    ///< normalization V_i <= tau * I (alpha_i <= tau for the diagonal test)
  SdpOptions sdp;
};

/// T_j(V) = sum_i p_ij A_i V_i A_i'.
std::vector<Matrix> lyapunov_operator(const Matrix& p, const SwitchedLinearSystem& sys, const std::vector<Matrix>& v);

/// (P' kron I_{n^2}) * blockdiag(A_i kron A_i), size N n^2.
Matrix mss_lift(const Dtmc& dtmc, const SwitchedLinearSystem& sys);

/// stable iff rho < 1 - 1e-9.
StabilityReport check_mss_spectral(const Dtmc& dtmc, const SwitchedLinearSystem& sys);

/// The feasibility problem solved by check_mss_lyapunov, in units of eps
/// (variables are the upper triangles of V_i / eps, mode by mode).
SdpProblem lyapunov_sdp(const Dtmc& dtmc, const SwitchedLinearSystem& sys, const LyapunovOptions& opts = {});

/// Feasibility of eps I <= V_i <= tau I, V_j - T_j(V) >= eps I. A solver
/// failure gives an inconclusive verdict.
StabilityReport check_mss_lyapunov(const Dtmc& dtmc, const SwitchedLinearSystem& sys,
                                   const LyapunovOptions& opts = {});

struct DiagonalCheck {
  SdpStatus status = SdpStatus::numerical_failure;
  std::optional<Vector> alpha;  ///< present only when feasible
};

/// Scalar test in alpha_1..alpha_N:
///   alpha_i I - sum_j p_ij alpha_j A_i A_i' >= eps I,  1 <= alpha_i <= tau.
/// Feasible implies mean-square stability; infeasible implies nothing.
DiagonalCheck check_mss_diagonal(const Dtmc& dtmc, const SwitchedLinearSystem& sys,
                                 const LyapunovOptions& opts = {});

inline constexpr double kCertificateMargin = 1e-8;

/// Direct arithmetic check (no solver) that `policy` is a valid policy and
/// `cert` is a Lyapunov certificate for the chain it induces, with every
/// eigenvalue margin at least kCertificateMargin.
bool verify_policy_certificate(const Mdp& mdp, const SwitchedLinearSystem& sys, const Policy& policy,
                               const LyapunovCertificate& cert);

/// Smallest eigenvalue over V_i and V_j - T_j(V). Throws on dimension mismatch.
double certificate_margin(const Matrix& p, const SwitchedLinearSystem& sys, const std::vector<Matrix>& v);

}  // namespace mjls
