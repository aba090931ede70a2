#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mjls/model.hpp"

namespace mjls {

struct MomentTrace {
  int horizon = 0;                         ///< requested number of steps
  std::vector<Vector> mean_trace;          ///< E[x(k)], k = 0..horizon (shorter if diverged)
  std::vector<Matrix> second_moment_trace; ///< E[x(k) x(k)']
  int trials = 0;
  Vector mean_limit;    ///< tail-window average of mean_trace
  Matrix second_limit;  ///< tail-window average of second_moment_trace
  std::optional<int> diverged_at;  ///< first step with some |x| > kDivergenceBound

  int steps() const { return static_cast<int>(mean_trace.size()); }
};

inline constexpr double kDivergenceBound = 1e12;
inline constexpr int kDefaultWindow = 25;

struct SimulationOptions {
  int horizon = 100;
  int trials = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Monte-Carlo moments of x(k+1) = A_{s_k} x(k) + B_{s_k} w(k), s_0 the
/// chain's initial mode and w Gaussian with the given mean and covariance
/// (ignored when the system has no noise input). Trial t draws from a stream
/// seeded by (seed, t), so results do not depend on `threads`.
///
/// A trial whose state norm exceeds kDivergenceBound stops the run: the trace
/// is truncated before that step and diverged_at is set.
MomentTrace simulate_trajectories(const SwitchedLinearSystem& sys, const Dtmc& dtmc, const NoiseSpec& noise,
                                  const Vector& x0, const SimulationOptions& opts);

enum class EmpiricalVerdict { converging, diverging, inconclusive };

std::string to_string(EmpiricalVerdict v);

struct EmpiricalDiagnostic {
  EmpiricalVerdict verdict = EmpiricalVerdict::inconclusive;
  double relative_change = 0.0;
};

/// Compares the sup-norm of the mean and second-moment estimates between the
/// last two windows. Advisory only. Throws InvalidInput when the trace is
/// shorter than two windows (a diverged trace is reported as diverging).
EmpiricalDiagnostic mss_empirical_diagnostic(const MomentTrace& trace, double rel_tol = 0.1,
                                             int window = kDefaultWindow);

/// step, mean_1..mean_n, m_11, m_12, ..., m_nn (row-major).
void write_trace_csv(const MomentTrace& trace, std::ostream& out);

}  // namespace mjls
