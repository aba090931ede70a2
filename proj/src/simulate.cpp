#include "mjls/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include <Eigen/Cholesky>

#include "mjls/error.hpp"

namespace mjls {

namespace {

// Fixed chunking keeps floating-point summation order independent of the
// thread count.
constexpr int kChunk = 256;

struct Partial {
  std::vector<Vector> mean;
  std::vector<Matrix> second;
  int diverged_at = -1;  // first step of divergence within the chunk
};

struct Sampler {
  const SwitchedLinearSystem& sys;
  const Dtmc& dtmc;
  Matrix noise_factor;  // L with L L' = covariance
  Vector noise_mean;
  bool noisy = false;
};

int next_mode(const Matrix& p, int mode, double u) {
  double cum = 0.0;
  const auto n = static_cast<int>(p.cols());
  for (int j = 0; j < n; ++j) {
    cum += p(mode, j);
    if (u < cum) return j;
  }
  // Round-off in the row sum: fall back to the last reachable mode.
  for (int j = n - 1; j >= 0; --j) {
    if (p(mode, j) > 0.0) return j;
  }
  return mode;
}

void run_chunk(const Sampler& s, const Vector& x0, const SimulationOptions& opts, int first, int last, Partial& out) {
  const int n = s.sys.n;
  const int m = s.sys.m;
  out.mean.assign(opts.horizon + 1, Vector::Zero(n));
  out.second.assign(opts.horizon + 1, Matrix::Zero(n, n));
  Vector w(m);
  for (int t = first; t < last; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector x = x0;
    int mode = s.dtmc.initial_mode;
    for (int k = 0; k <= opts.horizon; ++k) {
      if (!(x.norm() <= kDivergenceBound)) {
        if (out.diverged_at < 0 || k < out.diverged_at) out.diverged_at = k;
        break;
      }
      out.mean[k] += x;
      out.second[k].noalias() += x * x.transpose();
      if (k == opts.horizon) break;
      Vector next = s.sys.a[mode] * x;
      if (s.noisy) {
        for (int q = 0; q < m; ++q) w(q) = gauss(rng);
        next += s.sys.b[mode] * (s.noise_mean + s.noise_factor * w);
      }
      x = std::move(next);
      mode = next_mode(s.dtmc.p, mode, unif(rng));
    }
  }
}

}  // namespace

std::string to_string(EmpiricalVerdict v) {
  switch (v) {
    case EmpiricalVerdict::converging: return "converging";
    case EmpiricalVerdict::diverging: return "diverging";
    case EmpiricalVerdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

MomentTrace simulate_trajectories(const SwitchedLinearSystem& sys, const Dtmc& dtmc, const NoiseSpec& noise,
                                  const Vector& x0, const SimulationOptions& opts) {
  if (opts.horizon < 1) throw InvalidInput("horizon must be at least 1");
  if (opts.trials < 1) throw InvalidInput("trials must be at least 1");
  if (opts.threads < 1) throw InvalidInput("threads must be at least 1");
  if (x0.size() != sys.n) throw InvalidInput("x0 has length " + std::to_string(x0.size()) + ", expected " + std::to_string(sys.n));
  if (dtmc.p.rows() != sys.num_modes() || dtmc.p.cols() != sys.num_modes()) {
    throw InvalidInput("chain size does not match the number of modes");
  }
  if (dtmc.initial_mode < 0 || dtmc.initial_mode >= sys.num_modes()) throw InvalidInput("initial mode out of range");

  Sampler s{sys, dtmc, {}, {}, false};
  if (sys.has_noise_input()) {
    const auto bad = noise_violations(noise, sys.m);
    if (!bad.empty()) throw InvalidInput("noise: " + bad.front());
    s.noisy = true;
    s.noise_mean = noise.mean;
    // LDLT tolerates a semidefinite covariance.
    Eigen::LDLT<Matrix> ldlt(noise.covariance);
    const Vector d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    Matrix l = ldlt.matrixL();
    s.noise_factor = ldlt.transpositionsP().transpose() * l * d.asDiagonal();
  }

  const int chunks = (opts.trials + kChunk - 1) / kChunk;
  std::vector<Partial> parts(chunks);
  auto work = [&](int worker) {
    for (int c = worker; c < chunks; c += opts.threads) {
      run_chunk(s, x0, opts, c * kChunk, std::min(opts.trials, (c + 1) * kChunk), parts[c]);
    }
  };
  if (opts.threads == 1 || chunks == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < std::min(opts.threads, chunks); ++t) pool.emplace_back(work, t);
  }

  int steps = opts.horizon + 1;
  for (const auto& part : parts) {
    if (part.diverged_at >= 0) steps = std::min(steps, part.diverged_at);
  }

  MomentTrace trace;
  trace.horizon = opts.horizon;
  trace.trials = opts.trials;
  if (steps <= opts.horizon) trace.diverged_at = steps;
  const double inv = 1.0 / static_cast<double>(opts.trials);
  for (int k = 0; k < steps; ++k) {
    Vector mean = Vector::Zero(sys.n);
    Matrix second = Matrix::Zero(sys.n, sys.n);
    for (const auto& part : parts) {
      mean += part.mean[k];
      second += part.second[k];
    }
    trace.mean_trace.push_back(mean * inv);
    trace.second_moment_trace.push_back(symmetrize(second * inv));
  }

  const int tail = std::min(kDefaultWindow, steps);
  trace.mean_limit = Vector::Zero(sys.n);
  trace.second_limit = Matrix::Zero(sys.n, sys.n);
  for (int k = steps - tail; k < steps; ++k) {
    trace.mean_limit += trace.mean_trace[k] / tail;
    trace.second_limit += trace.second_moment_trace[k] / tail;
  }
  return trace;
}

EmpiricalDiagnostic mss_empirical_diagnostic(const MomentTrace& trace, double rel_tol, int window) {
  if (window < 1) throw InvalidInput("window must be at least 1");
  if (!(rel_tol > 0.0)) throw InvalidInput("rel_tol must be positive");
  EmpiricalDiagnostic out;
  if (trace.diverged_at) {
    out.verdict = EmpiricalVerdict::diverging;
    out.relative_change = std::numeric_limits<double>::infinity();
    return out;
  }
  const int steps = trace.steps();
  if (steps < 2 * window) {
    throw InvalidInput("trace has " + std::to_string(steps) + " steps; need at least " + std::to_string(2 * window));
  }

  auto size_at = [&](int k) {
    return std::max(sup_norm(trace.mean_trace[k]), sup_norm(trace.second_moment_trace[k]));
  };
  double prev = 0.0;
  double last = 0.0;
  for (int k = steps - 2 * window; k < steps - window; ++k) prev += size_at(k) / window;
  for (int k = steps - window; k < steps; ++k) last += size_at(k) / window;

  constexpr double kNegligible = 1e-12;
  if (last <= kNegligible) {
    out.verdict = EmpiricalVerdict::converging;
    return out;
  }
  out.relative_change = (last - prev) / std::max(prev, kNegligible);
  if (out.relative_change <= rel_tol) {
    out.verdict = EmpiricalVerdict::converging;
  } else if (size_at(steps - 1) > size_at(steps - window)) {
    out.verdict = EmpiricalVerdict::diverging;
  } else {
    out.verdict = EmpiricalVerdict::inconclusive;
  }
  return out;
}

void write_trace_csv(const MomentTrace& trace, std::ostream& out) {
  if (trace.mean_trace.empty()) return;
  const auto n = trace.mean_trace.front().size();
  out << "step";
  for (Eigen::Index i = 0; i < n; ++i) out << ",mean_" << i + 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out << ",m_" << i + 1 << '_' << j + 1;
  }
  out << '\n';
  out.precision(17);
  for (int k = 0; k < trace.steps(); ++k) {
    out << k;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << trace.mean_trace[k](i);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) out << ',' << trace.second_moment_trace[k](i, j);
    }
    out << '\n';
  }
}

}  // namespace mjls
