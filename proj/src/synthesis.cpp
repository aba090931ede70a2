#include "mjls/synthesis.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "mjls/error.hpp"
#include "sym_vars.hpp"

namespace mjls {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_pair(const Mdp& mdp, const SwitchedLinearSystem& sys) {
  const auto report = validate_system(sys, mdp);
  if (!report.ok()) throw InvalidInput("invalid model: " + report.violations.front());
}

// Lifted matrix assembled directly from the chain: block (j, i) = p_ij A_i kron A_i.
Matrix lift_from_kron(const Matrix& p, const std::vector<Matrix>& akron) {
  const auto modes = p.rows();
  const auto d = akron.front().rows();
  Matrix out = Matrix::Zero(modes * d, modes * d);
  for (Eigen::Index i = 0; i < modes; ++i) {
    for (Eigen::Index j = 0; j < modes; ++j) {
      if (p(i, j) != 0.0) out.block(j * d, i * d, d, d) = p(i, j) * akron[i];
    }
  }
  return out;
}

// Index of each defined (mode, action) pair among the policy variables.
struct PolicyVars {
  std::vector<std::pair<int, int>> pairs;
  Matrix index;  // -1 where undefined

  PolicyVars(const Mdp& mdp, int offset) : index(Matrix::Constant(mdp.num_modes, mdp.num_actions(), -1)) {
    for (int i = 0; i < mdp.num_modes; ++i) {
      for (int s : mdp.defined_actions(i)) {
        index(i, s) = offset + static_cast<int>(pairs.size());
        pairs.emplace_back(i, s);
      }
    }
  }
  int size() const { return static_cast<int>(pairs.size()); }
};

// Clamps solver round-off and rescales rows onto the simplex.
Policy clean_policy(const Mdp& mdp, Matrix pi) {
  for (int i = 0; i < mdp.num_modes; ++i) {
    for (int s = 0; s < mdp.num_actions(); ++s) {
      if (!mdp.defined(i, s) || pi(i, s) < 0.0) pi(i, s) = 0.0;
    }
    const double sum = pi.row(i).sum();
    if (sum > 0.0) pi.row(i) /= sum;
  }
  return Policy{std::move(pi)};
}

struct VSolve {
  VStep step;
  std::vector<Matrix> z;  // multipliers of the decrease blocks
};

VSolve solve_v_problem(const Mdp& mdp, const SwitchedLinearSystem& sys, const Policy& policy,
                       const std::vector<Matrix>* v_prev, const CdParams& params) {
  const int modes = sys.num_modes();
  const int n = sys.n;
  const Dtmc chain = induce_dtmc(mdp, policy);
  const detail::SymVars vars(n, modes, 0);
  const int gamma = vars.end();
  const int num_vars = gamma + 1 + (v_prev ? modes : 0);

  SdpProblem p(num_vars);
  p.objective(gamma) = -1.0;
  detail::add_box_blocks(p, vars, modes, params.eps, params.tau);
  detail::add_decrease_blocks(p, vars, chain.p, sys, gamma, 0.0);
  // sum_i tr(V_i) = n N pins the scale, so gamma stays comparable across
  // iterations and cannot shrink to zero together with V on unstable chains.
  Vector trace_row = Vector::Zero(num_vars);
  for (int i = 0; i < modes; ++i) {
    vars.for_each(i, [&](int k, int r, int c) {
      if (r == c) trace_row(k) = 1.0;
    });
  }
  p.add_equality(trace_row, static_cast<double>(n * modes));
  if (v_prev) {
    // -t_i I <= V_i - V_prev,i <= t_i I
    for (int i = 0; i < modes; ++i) {
      const int t = gamma + 1 + i;
      p.objective(t) = params.L;
      for (double sign : {-1.0, 1.0}) {
        auto& blk = p.add_block(n);
        blk.f0 = sign * symmetrize((*v_prev)[i]);
        blk.terms.push_back({t, Matrix::Identity(n, n)});
        vars.for_each(i, [&](int k, int r, int c) { blk.terms.push_back({k, sign * vars.basis(r, c)}); });
      }
    }
  }

  const auto sol = solve_sdp(p, params.sdp);
  if (sol.status != SdpStatus::optimal) {
    throw NumericalError("step-V SDP ended with status " + to_string(sol.status));
  }
  VSolve out;
  for (int i = 0; i < modes; ++i) out.step.v.push_back(vars.extract(sol.y, i));
  out.step.gamma = sol.y(gamma);
  // Blocks were added as [box lo, box hi] per mode, then one decrease block per mode.
  for (int j = 0; j < modes; ++j) out.z.push_back(sol.dual[2 * modes + j]);
  return out;
}

// Euclidean projection of `x` onto the probability simplex.
Vector project_simplex(const Vector& x) {
  Vector u = x;
  std::sort(u.data(), u.data() + u.size(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    cum += u(k);
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u(k) - t > 0.0) theta = t;
  }
  return (x.array() - theta).max(0.0).matrix();
}

// Supergradient of pi -> max_V gamma at `policy`, from the multipliers of
// the max-slack problem (envelope theorem).
Matrix slack_supergradient(const Mdp& mdp, const SwitchedLinearSystem& sys, const VSolve& at) {
  const int modes = sys.num_modes();
  Matrix grad = Matrix::Zero(modes, mdp.num_actions());
  for (int i = 0; i < modes; ++i) {
    const Matrix avat = sys.a[i] * at.step.v[i] * sys.a[i].transpose();
    for (int s : mdp.defined_actions(i)) {
      double g = 0.0;
      for (int j = 0; j < modes; ++j) g -= mdp.transitions[s](i, j) * at.z[j].cwiseProduct(avat).sum();
      grad(i, s) = g;
    }
  }
  return grad;
}

Policy ascent_step(const Mdp& mdp, const Policy& policy, const Matrix& grad, double step) {
  const double scale = grad.cwiseAbs().maxCoeff();
  Matrix pi = policy.pi;
  for (int i = 0; i < mdp.num_modes; ++i) {
    const auto acts = mdp.defined_actions(i);
    Vector x(static_cast<Eigen::Index>(acts.size()));
    for (std::size_t q = 0; q < acts.size(); ++q) {
      x(static_cast<Eigen::Index>(q)) = pi(i, acts[q]) + (scale > 0.0 ? step * grad(i, acts[q]) / scale : 0.0);
    }
    const Vector y = project_simplex(x);
    for (std::size_t q = 0; q < acts.size(); ++q) pi(i, acts[q]) = y(static_cast<Eigen::Index>(q));
  }
  return clean_policy(mdp, std::move(pi));
}

}  // namespace

void validate(const CdParams& params) {
  if (!(params.L > 0.0)) throw InvalidInput("CD parameter L must be positive");
  if (params.max_iters < 1) throw InvalidInput("CD parameter max_iters must be at least 1");
  if (!(params.gamma_tol > 0.0) || !(params.stall_tol > 0.0)) throw InvalidInput("CD tolerances must be positive");
  if (params.stall_window < 1) throw InvalidInput("CD stall window must be at least 1");
  if (!(params.eps > 0.0) || !(params.tau > params.eps)) throw InvalidInput("CD requires 0 < eps < tau");
  if (params.time_limit_s < 0.0) throw InvalidInput("CD time limit must be nonnegative");
}

std::string to_string(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::stabilized: return "stabilized";
    case SynthesisStatus::converged_infeasible: return "converged_infeasible";
    case SynthesisStatus::iteration_limit: return "iteration_limit";
    case SynthesisStatus::solver_failure: return "solver_failure";
  }
  return "unknown";
}

SynthesisResult synth_sdp_relaxation(const Mdp& mdp, const SwitchedLinearSystem& sys, const LyapunovOptions& opts) {
  require_pair(mdp, sys);
  const auto t0 = Clock::now();
  const int modes = sys.num_modes();
  const int n = sys.n;
  const PolicyVars kvars(mdp, 0);
  const int alpha0 = kvars.size();

  SdpProblem p(alpha0 + modes);
  for (int k = 0; k < kvars.size(); ++k) p.set_lower(k, 0.0);
  for (int i = 0; i < modes; ++i) {
    p.set_lower(alpha0 + i, 1.0);
    p.set_upper(alpha0 + i, opts.tau);
    Vector row = Vector::Zero(p.num_vars);
    for (int s : mdp.defined_actions(i)) row(static_cast<int>(kvars.index(i, s))) = 1.0;
    row(alpha0 + i) = -1.0;
    p.add_equality(row, 0.0);
  }
  std::vector<Matrix> aat;
  for (const auto& a : sys.a) aat.push_back(symmetrize(a * a.transpose()));
  for (int j = 0; j < modes; ++j) {
    auto& blk = p.add_block(n);
    blk.f0 = opts.eps * Matrix::Identity(n, n);
    blk.terms.push_back({alpha0 + j, Matrix::Identity(n, n)});
    for (int k = 0; k < kvars.size(); ++k) {
      const auto [i, s] = kvars.pairs[k];
      const double t = mdp.transitions[s](i, j);
      if (t != 0.0) blk.terms.push_back({k, -t * aat[i]});
    }
  }

  SynthesisResult res;
  res.iterations = 1;
  const auto sol = solve_sdp(p, opts.sdp);
  if (sol.status == SdpStatus::infeasible) {
    res.status = SynthesisStatus::converged_infeasible;
    res.message = "diagonal relaxation infeasible";
  } else if (sol.status != SdpStatus::feasible && sol.status != SdpStatus::optimal) {
    res.status = SynthesisStatus::solver_failure;
    res.message = "relaxation SDP ended with status " + to_string(sol.status);
  } else {
    Matrix pi = Matrix::Zero(modes, mdp.num_actions());
    for (int k = 0; k < kvars.size(); ++k) {
      const auto [i, s] = kvars.pairs[k];
      pi(i, s) = sol.y(k) / sol.y(alpha0 + i);
    }
    Policy policy = clean_policy(mdp, std::move(pi));
    LyapunovCertificate cert;
    cert.epsilon = opts.eps;
    for (int i = 0; i < modes; ++i) cert.v.push_back(sol.y(alpha0 + i) * Matrix::Identity(n, n));
    const auto spectral = check_mss_spectral(induce_dtmc(mdp, policy), sys);
    res.rho = spectral.rho;
    if (spectral.stable && verify_policy_certificate(mdp, sys, policy, cert)) {
      res.status = SynthesisStatus::stabilized;
      res.policy = std::move(policy);
      res.certificate = std::move(cert);
    } else {
      res.status = SynthesisStatus::converged_infeasible;
      res.message = "relaxation point failed re-verification";
    }
  }
  res.wall_time_s = seconds_since(t0);
  return res;
}

VStep cd_step_V(const Mdp& mdp, const SwitchedLinearSystem& sys, const Policy& policy,
                const std::vector<Matrix>& v_prev, const CdParams& params) {
  if (static_cast<int>(v_prev.size()) != sys.num_modes()) throw InvalidInput("cd_step_V: V_prev has the wrong length");
  for (const auto& v : v_prev) {
    if (v.rows() != sys.n || v.cols() != sys.n) throw InvalidInput("cd_step_V: V_prev matrix has the wrong shape");
  }
  return solve_v_problem(mdp, sys, policy, &v_prev, params).step;
}

VStep max_slack_certificate(const Mdp& mdp, const SwitchedLinearSystem& sys, const Policy& policy,
                            const CdParams& params) {
  return solve_v_problem(mdp, sys, policy, nullptr, params).step;
}

PolicyStep cd_step_policy(const Mdp& mdp, const SwitchedLinearSystem& sys, const std::vector<Matrix>& v,
                          const Policy& policy_prev, const CdParams& params) {
  const int modes = sys.num_modes();
  const int n = sys.n;
  if (static_cast<int>(v.size()) != modes) throw InvalidInput("cd_step_policy: V has the wrong length");
  if (policy_prev.pi.rows() != modes || policy_prev.pi.cols() != mdp.num_actions()) {
    throw InvalidInput("cd_step_policy: previous policy has the wrong shape");
  }
  const PolicyVars pvars(mdp, 0);
  const int gamma = pvars.size();
  const int u0 = gamma + 1;
  SdpProblem p(u0 + pvars.size());
  p.objective(gamma) = -1.0;

  for (int k = 0; k < pvars.size(); ++k) {
    const auto [i, s] = pvars.pairs[k];
    const double prev = policy_prev.pi(i, s);
    p.set_lower(k, 0.0);
    p.objective(u0 + k) = params.L;
    // u >= |pi - pi_prev|
    for (double sign : {-1.0, 1.0}) {
      auto& blk = p.add_block(1);
      blk.f0(0, 0) = sign * prev;
      blk.terms.push_back({u0 + k, Matrix::Constant(1, 1, 1.0)});
      blk.terms.push_back({k, Matrix::Constant(1, 1, sign)});
    }
  }
  for (int i = 0; i < modes; ++i) {
    Vector row = Vector::Zero(p.num_vars);
    for (int s : mdp.defined_actions(i)) row(static_cast<int>(pvars.index(i, s))) = 1.0;
    p.add_equality(row, 1.0);
  }
  std::vector<Matrix> avat;
  for (int i = 0; i < modes; ++i) avat.push_back(symmetrize(sys.a[i] * v[i] * sys.a[i].transpose()));
  for (int j = 0; j < modes; ++j) {
    auto& blk = p.add_block(n);
    blk.f0 = -symmetrize(v[j]);
    blk.terms.push_back({gamma, -Matrix::Identity(n, n)});
    for (int k = 0; k < pvars.size(); ++k) {
      const auto [i, s] = pvars.pairs[k];
      const double t = mdp.transitions[s](i, j);
      if (t != 0.0) blk.terms.push_back({k, -t * avat[i]});
    }
  }

  const auto sol = solve_sdp(p, params.sdp);
  if (sol.status != SdpStatus::optimal) {
    throw NumericalError("step-policy SDP ended with status " + to_string(sol.status));
  }
  Matrix pi = Matrix::Zero(modes, mdp.num_actions());
  for (int k = 0; k < pvars.size(); ++k) {
    const auto [i, s] = pvars.pairs[k];
    pi(i, s) = sol.y(k);
  }
  return PolicyStep{clean_policy(mdp, std::move(pi)), sol.y(gamma)};
}

SynthesisResult synth_coordinate_descent(const Mdp& mdp, const SwitchedLinearSystem& sys, const CdParams& params) {
  require_pair(mdp, sys);
  validate(params);
  const auto t0 = Clock::now();
  SynthesisResult res;

  Policy policy = uniform_policy(mdp);
  if (params.initial_policy) {
    const auto bad = policy_violations(mdp, *params.initial_policy);
    if (!bad.empty()) throw InvalidInput("initial policy: " + bad.front());
    policy = *params.initial_policy;
  } else if (params.init == CdInit::deterministic) {
    double best = std::numeric_limits<double>::infinity();
    for (auto& cand : enumerate_deterministic_policies(mdp)) {
      const double rho = *check_mss_spectral(induce_dtmc(mdp, cand), sys).rho;
      if (rho < best) {
        best = rho;
        policy = std::move(cand);
      }
    }
  }

  // Accepts `candidate` if a max-slack certificate for it re-verifies.
  auto try_accept = [&](const Policy& candidate) {
    const VStep cert_step = max_slack_certificate(mdp, sys, candidate, params);
    if (!(cert_step.gamma > params.gamma_tol)) return false;
    LyapunovCertificate cert{cert_step.v, params.eps};
    if (!verify_policy_certificate(mdp, sys, candidate, cert)) return false;
    const auto spectral = check_mss_spectral(induce_dtmc(mdp, candidate), sys);
    if (!spectral.stable) return false;
    res.status = SynthesisStatus::stabilized;
    res.policy = candidate;
    res.certificate = std::move(cert);
    res.rho = spectral.rho;
    return true;
  };

  auto finish = [&](SynthesisStatus status, std::string message) {
    if (status != SynthesisStatus::stabilized) {
      res.status = status;
      res.policy = policy;
      res.rho = check_mss_spectral(induce_dtmc(mdp, policy), sys).rho;
    }
    res.message = std::move(message);
    res.wall_time_s = seconds_since(t0);
    return res;
  };

  try {
    if (check_mss_spectral(induce_dtmc(mdp, policy), sys).stable && try_accept(policy)) {
      return finish(SynthesisStatus::stabilized, "initial policy already stabilizes");
    }

    std::vector<Matrix> v(sys.num_modes(), Matrix::Identity(sys.n, sys.n));
    double step = 0.1;
    int stalled = 0;
    double last_gamma = std::numeric_limits<double>::quiet_NaN();
    for (int k = 1; k <= params.max_iters; ++k) {
      if (params.time_limit_s > 0.0 && seconds_since(t0) > params.time_limit_s) {
        res.timed_out = true;
        return finish(SynthesisStatus::iteration_limit, "time limit reached");
      }
      res.iterations = k;

      const VStep vs = cd_step_V(mdp, sys, policy, v, params);
      v = vs.v;
      if (vs.gamma > params.gamma_tol && try_accept(policy)) {
        res.gamma_trace.push_back(vs.gamma);
        return finish(SynthesisStatus::stabilized, "positive slack at step V");
      }

      const PolicyStep ps = cd_step_policy(mdp, sys, v, policy, params);
      const double gain = ps.gamma - vs.gamma;
      policy = ps.policy;
      double gamma = ps.gamma;
      if (gamma > params.gamma_tol && try_accept(policy)) {
        res.gamma_trace.push_back(gamma);
        return finish(SynthesisStatus::stabilized, "positive slack at step pi");
      }

      // With V fixed at a max-slack point the decrease blocks are balanced and
      // the policy step typically cannot raise gamma; fall back to a projected
      // supergradient step on pi -> max_V gamma with backtracking.
      if (params.ascent_fallback && gain < params.stall_tol) {
        const VSolve here = solve_v_problem(mdp, sys, policy, nullptr, params);
        const Matrix grad = slack_supergradient(mdp, sys, here);
        gamma = here.step.gamma;
        while (step >= params.min_ascent_step) {
          const Policy trial = ascent_step(mdp, policy, grad, step);
          const VStep at = max_slack_certificate(mdp, sys, trial, params);
          if (at.gamma > gamma) {
            policy = trial;
            gamma = at.gamma;
            step = std::min(1.0, 2.0 * step);
            break;
          }
          step *= 0.5;
        }
        if (gamma > params.gamma_tol && try_accept(policy)) {
          res.gamma_trace.push_back(gamma);
          return finish(SynthesisStatus::stabilized, "positive slack after ascent step");
        }
      }
      res.gamma_trace.push_back(gamma);

      if (gamma <= 0.0 && std::abs(gamma - last_gamma) < params.stall_tol) {
        if (++stalled >= params.stall_window) {
          return finish(SynthesisStatus::converged_infeasible, "slack stalled at a nonpositive value");
        }
      } else {
        stalled = 0;
      }
      last_gamma = gamma;
    }
    return finish(SynthesisStatus::iteration_limit, "iteration limit reached");
  } catch (const NumericalError& e) {
    return finish(SynthesisStatus::solver_failure, e.what());
  }
}

BruteForceResult brute_force_policy_search(const Mdp& mdp, const SwitchedLinearSystem& sys, double grid_step,
                                           std::size_t max_points) {
  require_pair(mdp, sys);
  if (!(grid_step > 0.0) || grid_step > 1.0) throw InvalidInput("grid step must lie in (0, 1]");
  const long steps = std::lround(1.0 / grid_step);
  if (std::abs(static_cast<double>(steps) * grid_step - 1.0) > 1e-9) {
    throw InvalidInput("1 / grid_step must be an integer");
  }

  // Per-mode list of grid points on the simplex of defined actions.
  std::vector<std::vector<Vector>> grids(mdp.num_modes);
  double total = 1.0;
  for (int i = 0; i < mdp.num_modes; ++i) {
    const auto acts = mdp.defined_actions(i);
    const int d = static_cast<int>(acts.size());
    std::vector<long> counts(d, 0);
    // Compositions of `steps` into d parts, lexicographic.
    auto recurse = [&](auto&& self, int pos, long remaining) -> void {
      if (pos == d - 1) {
        counts[pos] = remaining;
        Vector row = Vector::Zero(mdp.num_actions());
        for (int q = 0; q < d; ++q) row(acts[q]) = static_cast<double>(counts[q]) / static_cast<double>(steps);
        grids[i].push_back(std::move(row));
        if (grids[i].size() > max_points) throw InvalidInput("policy grid exceeds the point cap");
        return;
      }
      for (long c = remaining; c >= 0; --c) {
        counts[pos] = c;
        self(self, pos + 1, remaining - c);
      }
    };
    recurse(recurse, 0, steps);
    total *= static_cast<double>(grids[i].size());
    if (total > static_cast<double>(max_points)) {
      throw InvalidInput("policy grid exceeds the point cap of " + std::to_string(max_points));
    }
  }

  std::vector<Matrix> akron;
  for (const auto& a : sys.a) akron.push_back(kron(a, a));

  BruteForceResult best;
  best.rho = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> digit(mdp.num_modes, 0);
  Matrix pi(mdp.num_modes, mdp.num_actions());
  const auto count = static_cast<std::size_t>(total);
  for (std::size_t k = 0; k < count; ++k) {
    for (int i = 0; i < mdp.num_modes; ++i) pi.row(i) = grids[i][digit[i]].transpose();
    Matrix p = Matrix::Zero(mdp.num_modes, mdp.num_modes);
    for (int s = 0; s < mdp.num_actions(); ++s) p += pi.col(s).asDiagonal() * mdp.transitions[s];
    const double rho = spectral_radius(lift_from_kron(p, akron));
    if (rho < best.rho) {
      best.rho = rho;
      best.policy = Policy{pi};
    }
    ++best.evaluated;
    for (int i = mdp.num_modes - 1; i >= 0; --i) {
      if (++digit[i] < grids[i].size()) break;
      digit[i] = 0;
    }
  }
  return best;
}

}  // namespace mjls
