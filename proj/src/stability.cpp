#include "mjls/stability.hpp"

#include <cmath>

#include "mjls/error.hpp"
#include "sym_vars.hpp"

namespace mjls {

namespace {

void require_compatible(const Matrix& p, const SwitchedLinearSystem& sys) {
  if (p.rows() != sys.num_modes() || p.cols() != sys.num_modes()) {
    throw InvalidInput("dimension mismatch: chain is " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
                       " but the system has " + std::to_string(sys.num_modes()) + " modes");
  }
}

}  // namespace

std::string to_string(StabilityMethod m) {
  switch (m) {
    case StabilityMethod::spectral: return "spectral";
    case StabilityMethod::lyapunov: return "lyapunov";
    case StabilityMethod::diagonal: return "diagonal";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::vector<Matrix> lyapunov_operator(const Matrix& p, const SwitchedLinearSystem& sys, const std::vector<Matrix>& v) {
  require_compatible(p, sys);
  const int modes = sys.num_modes();
  std::vector<Matrix> out(modes, Matrix::Zero(sys.n, sys.n));
  for (int i = 0; i < modes; ++i) {
    const Matrix avat = sys.a[i] * v[i] * sys.a[i].transpose();
    for (int j = 0; j < modes; ++j) {
      if (p(i, j) != 0.0) out[j] += p(i, j) * avat;
    }
  }
  return out;
}

Matrix mss_lift(const Dtmc& dtmc, const SwitchedLinearSystem& sys) {
  require_compatible(dtmc.p, sys);
  const int n2 = sys.n * sys.n;
  std::vector<Matrix> blocks;
  blocks.reserve(sys.a.size());
  for (const auto& a : sys.a) blocks.push_back(kron(a, a));
  return kron(dtmc.p.transpose(), Matrix::Identity(n2, n2)) * block_diag(blocks);
}

StabilityReport check_mss_spectral(const Dtmc& dtmc, const SwitchedLinearSystem& sys) {
  StabilityReport r;
  r.method = StabilityMethod::spectral;
  r.rho = spectral_radius(mss_lift(dtmc, sys));
  r.stable = *r.rho < 1.0 - 1e-9;
  r.verdict = r.stable ? Verdict::stable : Verdict::unstable;
  return r;
}

SdpProblem lyapunov_sdp(const Dtmc& dtmc, const SwitchedLinearSystem& sys, const LyapunovOptions& opts) {
  require_compatible(dtmc.p, sys);
  if (!(opts.eps > 0.0)) throw InvalidInput("check_mss_lyapunov: eps must be positive");
  const int modes = sys.num_modes();
  // Variables are V / eps: the feasible cone is scale-invariant, and in these
  // units an infeasibility certificate has unit strength instead of eps.
  const detail::SymVars vars(sys.n, modes, 0);
  SdpProblem p(vars.size());
  detail::add_box_blocks(p, vars, modes, 1.0, opts.tau / opts.eps);
  detail::add_decrease_blocks(p, vars, dtmc.p, sys, -1, 1.0);
  return p;
}

StabilityReport check_mss_lyapunov(const Dtmc& dtmc, const SwitchedLinearSystem& sys, const LyapunovOptions& opts) {
  const SdpProblem p = lyapunov_sdp(dtmc, sys, opts);
  const int modes = sys.num_modes();
  const detail::SymVars vars(sys.n, modes, 0);
  const auto sol = solve_sdp(p, opts.sdp);
  StabilityReport r;
  r.method = StabilityMethod::lyapunov;
  switch (sol.status) {
    case SdpStatus::optimal:
    case SdpStatus::feasible: {
      LyapunovCertificate cert;
      cert.epsilon = opts.eps;
      for (int i = 0; i < modes; ++i) cert.v.push_back(opts.eps * vars.extract(sol.y, i));
      r.stable = true;
      r.verdict = Verdict::stable;
      r.certificate = std::move(cert);
      break;
    }
    case SdpStatus::infeasible:
      r.verdict = Verdict::unstable;
      break;
    default:
      r.verdict = Verdict::inconclusive;
      break;
  }
  return r;
}

DiagonalCheck check_mss_diagonal(const Dtmc& dtmc, const SwitchedLinearSystem& sys, const LyapunovOptions& opts) {
  require_compatible(dtmc.p, sys);
  const int modes = sys.num_modes();
  const int n = sys.n;
  SdpProblem p(modes);
  for (int i = 0; i < modes; ++i) {
    p.set_lower(i, 1.0);
    p.set_upper(i, opts.tau);
  }
  for (int i = 0; i < modes; ++i) {
    auto& blk = p.add_block(n);
    blk.f0 = opts.eps * Matrix::Identity(n, n);
    const Matrix aat = sys.a[i] * sys.a[i].transpose();
    for (int j = 0; j < modes; ++j) {
      Matrix coeff = -dtmc.p(i, j) * aat;
      if (i == j) coeff += Matrix::Identity(n, n);
      if (coeff.cwiseAbs().maxCoeff() > 0.0) blk.terms.push_back({j, symmetrize(coeff)});
    }
  }
  const auto sol = solve_sdp(p, opts.sdp);
  DiagonalCheck out;
  out.status = sol.status;
  if (sol.status == SdpStatus::feasible || sol.status == SdpStatus::optimal) out.alpha = sol.y;
  return out;
}

double certificate_margin(const Matrix& p, const SwitchedLinearSystem& sys, const std::vector<Matrix>& v) {
  require_compatible(p, sys);
  if (static_cast<int>(v.size()) != sys.num_modes()) throw InvalidInput("certificate has the wrong number of matrices");
  for (const auto& vi : v) {
    if (vi.rows() != sys.n || vi.cols() != sys.n) throw InvalidInput("certificate matrix has the wrong shape");
  }
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& vi : v) {
    if (!vi.allFinite()) return -std::numeric_limits<double>::infinity();
    if ((vi - vi.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, sup_norm(vi))) {
      return -std::numeric_limits<double>::infinity();
    }
    margin = std::min(margin, min_eig_symmetric(vi));
  }
  const auto t = lyapunov_operator(p, sys, v);
  for (std::size_t j = 0; j < v.size(); ++j) margin = std::min(margin, min_eig_symmetric(v[j] - t[j]));
  return margin;
}

bool verify_policy_certificate(const Mdp& mdp, const SwitchedLinearSystem& sys, const Policy& policy,
                               const LyapunovCertificate& cert) {
  if (mdp.num_modes != sys.num_modes()) throw InvalidInput("dimension mismatch: MDP and system mode counts differ");
  if (static_cast<int>(cert.v.size()) != sys.num_modes()) {
    throw InvalidInput("dimension mismatch: certificate has " + std::to_string(cert.v.size()) + " matrices");
  }
  if (!policy_violations(mdp, policy).empty()) return false;
  const Dtmc chain = induce_dtmc(mdp, policy);
  return certificate_margin(chain.p, sys, cert.v) >= kCertificateMargin;
}

}  // namespace mjls
