#include "mjls/model.hpp"

#include <cmath>
#include <sstream>

#include "mjls/error.hpp"

namespace mjls {

namespace {

bool row_is_zero(const Matrix& m, Eigen::Index row) { return m.row(row).cwiseAbs().maxCoeff() == 0.0; }

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

bool Mdp::defined(int mode, int action) const { return !row_is_zero(transitions.at(action), mode); }

std::vector<int> Mdp::defined_actions(int mode) const {
  std::vector<int> out;
  for (int s = 0; s < num_actions(); ++s) {
    if (defined(mode, s)) out.push_back(s);
  }
  return out;
}

ValidationReport validate_system(const SwitchedLinearSystem& sys, const Mdp& mdp) {
  ValidationReport report;
  auto& v = report.violations;
  const int modes = sys.num_modes();

  if (sys.n <= 0) v.push_back("state dimension n must be positive");
  if (modes <= 0) v.push_back("system has no modes");
  for (int i = 0; i < modes; ++i) {
    if (sys.a[i].rows() != sys.n || sys.a[i].cols() != sys.n) {
      v.push_back("A_" + std::to_string(i + 1) + " has shape " + shape(sys.a[i]) + ", expected n x n");
    } else if (!sys.a[i].allFinite()) {
      v.push_back("A_" + std::to_string(i + 1) + " has non-finite entries");
    }
  }
  if (!sys.b.empty()) {
    if (static_cast<int>(sys.b.size()) != modes) v.push_back("B list length differs from the mode count");
    for (std::size_t i = 0; i < sys.b.size(); ++i) {
      if (sys.b[i].rows() != sys.n || sys.b[i].cols() != sys.m) {
        v.push_back("B_" + std::to_string(i + 1) + " has shape " + shape(sys.b[i]) + ", expected n x m");
      }
    }
  }

  if (mdp.num_modes != modes) {
    v.push_back("mode count mismatch: system has " + std::to_string(modes) + ", MDP has " +
                std::to_string(mdp.num_modes));
  }
  if (mdp.actions.empty()) v.push_back("MDP has no actions");
  if (mdp.transitions.size() != mdp.actions.size()) v.push_back("one transition matrix is required per action");
  if (mdp.initial_mode < 0 || mdp.initial_mode >= mdp.num_modes) v.push_back("initial mode out of range");

  const int nm = mdp.num_modes;
  for (std::size_t s = 0; s < mdp.transitions.size(); ++s) {
    const Matrix& t = mdp.transitions[s];
    const std::string name = s < mdp.actions.size() ? mdp.actions[s] : std::to_string(s);
    if (t.rows() != nm || t.cols() != nm) {
      v.push_back("T_" + name + " has shape " + shape(t) + ", expected N x N");
      continue;
    }
    for (int i = 0; i < nm; ++i) {
      if (!t.row(i).allFinite() || t.row(i).minCoeff() < 0.0 || t.row(i).maxCoeff() > 1.0) {
        v.push_back("T_" + name + " row " + std::to_string(i + 1) + " has entries outside [0,1]");
        continue;
      }
      const double sum = t.row(i).sum();
      if (sum != 0.0 && std::abs(sum - 1.0) > kStochasticTol) {
        std::ostringstream msg;
        msg << "T_" << name << " row " << i + 1 << " not stochastic (sums to " << sum << ")";
        v.push_back(msg.str());
      }
    }
  }
  if (v.empty()) {
    for (int i = 0; i < nm; ++i) {
      if (mdp.defined_actions(i).empty()) v.push_back("no action is defined at mode " + std::to_string(i + 1));
    }
  }
  return report;
}

std::vector<std::string> policy_violations(const Mdp& mdp, const Policy& policy) {
  std::vector<std::string> v;
  if (policy.pi.rows() != mdp.num_modes || policy.pi.cols() != mdp.num_actions()) {
    v.push_back("policy has shape " + shape(policy.pi) + ", expected N x |actions|");
    return v;
  }
  for (int i = 0; i < mdp.num_modes; ++i) {
    const auto row = policy.pi.row(i);
    if (!row.allFinite() || row.minCoeff() < 0.0) {
      v.push_back("policy row " + std::to_string(i + 1) + " has negative or non-finite entries");
    }
    if (std::abs(row.sum() - 1.0) > kStochasticTol) {
      std::ostringstream msg;
      msg << "policy row " << i + 1 << " not stochastic (sums to " << row.sum() << ")";
      v.push_back(msg.str());
    }
    for (int s = 0; s < mdp.num_actions(); ++s) {
      if (row(s) != 0.0 && !mdp.defined(i, s)) {
        v.push_back("policy places mass on undefined action " + mdp.actions[s] + " at mode " + std::to_string(i + 1));
      }
    }
  }
  return v;
}

std::vector<std::string> noise_violations(const NoiseSpec& noise, int m) {
  std::vector<std::string> v;
  if (noise.mean.size() != m) v.push_back("noise mean length differs from m");
  if (noise.covariance.rows() != m || noise.covariance.cols() != m) {
    v.push_back("noise covariance must be m x m");
    return v;
  }
  if ((noise.covariance - noise.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    v.push_back("noise covariance is not symmetric");
  }
  if (m > 0 && min_eig_symmetric(noise.covariance) < -1e-9) v.push_back("noise covariance is not PSD");
  return v;
}

Dtmc induce_dtmc(const Mdp& mdp, const Policy& policy) {
  const auto bad = policy_violations(mdp, policy);
  if (!bad.empty()) throw InvalidInput("invalid policy: " + bad.front());
  Dtmc out;
  out.initial_mode = mdp.initial_mode;
  out.p = Matrix::Zero(mdp.num_modes, mdp.num_modes);
  for (int s = 0; s < mdp.num_actions(); ++s) {
    out.p += policy.pi.col(s).asDiagonal() * mdp.transitions[s];
  }
  return out;
}

std::vector<Policy> enumerate_deterministic_policies(const Mdp& mdp, std::size_t max_count) {
  std::vector<std::vector<int>> choices(mdp.num_modes);
  std::size_t count = 1;
  for (int i = 0; i < mdp.num_modes; ++i) {
    choices[i] = mdp.defined_actions(i);
    if (choices[i].empty()) throw InvalidInput("no action is defined at mode " + std::to_string(i + 1));
    if (count > max_count / choices[i].size()) {
      throw InvalidInput("deterministic policy count exceeds the cap of " + std::to_string(max_count));
    }
    count *= choices[i].size();
  }

  std::vector<Policy> out;
  out.reserve(count);
  std::vector<std::size_t> digit(mdp.num_modes, 0);
  for (std::size_t k = 0; k < count; ++k) {
    Policy p{Matrix::Zero(mdp.num_modes, mdp.num_actions())};
    for (int i = 0; i < mdp.num_modes; ++i) p.pi(i, choices[i][digit[i]]) = 1.0;
    out.push_back(std::move(p));
    for (int i = mdp.num_modes - 1; i >= 0; --i) {
      if (++digit[i] < choices[i].size()) break;
      digit[i] = 0;
    }
  }
  return out;
}

Policy uniform_policy(const Mdp& mdp) {
  Policy p{Matrix::Zero(mdp.num_modes, mdp.num_actions())};
  for (int i = 0; i < mdp.num_modes; ++i) {
    const auto acts = mdp.defined_actions(i);
    for (int s : acts) p.pi(i, s) = 1.0 / static_cast<double>(acts.size());
  }
  return p;
}

void renormalize_rows(Matrix& rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    auto row = rows.row(i);
    if (!row.allFinite() || row.minCoeff() < -kStochasticTol) continue;
    const double sum = row.cwiseMax(0.0).sum();
    if (sum == 0.0 || std::abs(sum - 1.0) > kStochasticTol) continue;
    row = row.cwiseMax(0.0) / sum;
  }
}

}  // namespace mjls
