#include "mjls/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mjls/casegen.hpp"
#include "mjls/error.hpp"
#include "mjls/io.hpp"
#include "mjls/simulate.hpp"
#include "mjls/stability.hpp"
#include "mjls/synthesis.hpp"

namespace mjls {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double x, int precision = 6) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << x;
  return ss.str();
}

std::string policy_string(const Policy& p) {
  std::ostringstream ss;
  ss << '[';
  for (Eigen::Index i = 0; i < p.pi.rows(); ++i) {
    ss << (i ? "; " : "");
    for (Eigen::Index s = 0; s < p.pi.cols(); ++s) ss << (s ? ", " : "") << fmt(p.pi(i, s), 4);
  }
  ss << ']';
  return ss.str();
}

// ---------------------------------------------------------------- check

struct CheckArgs {
  std::string model;
  std::string policy;
  std::string dump_sdp;
  double eps = 1e-6;
  double tau = 1e3;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const Instance inst = read_model_file(a.model);
  LyapunovOptions opts;
  opts.eps = a.eps;
  opts.tau = a.tau;

  std::optional<ResultFile> result;
  Policy policy;
  if (!a.policy.empty()) {
    policy = read_policy_file(a.policy);
    if (policy.pi.rows() != inst.mdp.num_modes || policy.pi.cols() != inst.mdp.num_actions()) {
      throw InvalidInput("policy must be " + std::to_string(inst.mdp.num_modes) + " x " +
                         std::to_string(inst.mdp.num_actions()));
    }
    try {
      std::ifstream in(a.policy);
      std::stringstream ss;
      ss << in.rdbuf();
      result = result_from_json(ss.str());
    } catch (const InvalidInput&) {
      // A bare policy file carries no certificate.
    }
  } else {
    policy = uniform_policy(inst.mdp);
    out << "no policy given; checking the uniform policy\n";
    std::size_t count = 1;
    for (int i = 0; i < inst.mdp.num_modes && count <= 64; ++i) count *= inst.mdp.defined_actions(i).size();
    if (count <= 64) {
      out << "deterministic policies:\n";
      for (const auto& d : enumerate_deterministic_policies(inst.mdp)) {
        const auto r = check_mss_spectral(induce_dtmc(inst.mdp, d), inst.sys);
        out << "  " << policy_string(d) << "  rho = " << fmt(*r.rho) << (r.stable ? "  stable" : "") << '\n';
      }
    }
  }

  const auto bad = policy_violations(inst.mdp, policy);
  if (!bad.empty()) throw InvalidInput("policy: " + bad.front());
  const Dtmc chain = induce_dtmc(inst.mdp, policy);
  if (!a.dump_sdp.empty()) {
    std::ofstream dump(a.dump_sdp);
    if (!dump) throw InvalidInput("cannot write " + a.dump_sdp);
    write_sparse_dump(lyapunov_sdp(chain, inst.sys, opts), dump);
  }

  const auto spectral = check_mss_spectral(chain, inst.sys);
  const auto lyap = check_mss_lyapunov(chain, inst.sys, opts);
  const auto diag = check_mss_diagonal(chain, inst.sys, opts);
  out << "policy   " << policy_string(policy) << '\n';
  out << "rho      " << fmt(*spectral.rho) << (spectral.stable ? "  (mean-square stable)" : "  (not mean-square stable)")
      << '\n';
  out << "lyapunov " << to_string(lyap.verdict) << '\n';
  out << "diagonal " << (diag.alpha ? "feasible" : to_string(diag.status)) << '\n';
  if (lyap.verdict != Verdict::inconclusive && lyap.stable != spectral.stable) {
    out << "warning: Lyapunov and spectral verdicts disagree\n";
  }
  if (result && result->certificate) {
    const bool ok = reverify_result(inst, *result);
    out << "certificate " << (ok ? "verified" : "REJECTED") << '\n';
    if (!ok) return kExitNotFound;
  }
  if (spectral.stable) return kExitOk;
  return kExitNotFound;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string model;
  std::string method = "cd";
  std::string output;
  std::string init = "uniform";
  double L = 1e-3;
  int max_iters = 50;
  double time_limit = 0.0;
  std::uint64_t seed = 0;
};

ResultFile to_result_file(const std::string& method, const SynthesisResult& r, std::uint64_t seed) {
  ResultFile f;
  f.method = method;
  f.status = to_string(r.status);
  f.policy = r.policy;
  f.rho = r.rho;
  f.certificate = r.certificate;
  f.gamma_trace = r.gamma_trace;
  f.iterations = r.iterations;
  f.wall_time_s = r.wall_time_s;
  f.seed = seed;
  return f;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const Instance inst = read_model_file(a.model);
  SynthesisResult r;
  if (a.method == "sdp") {
    r = synth_sdp_relaxation(inst.mdp, inst.sys);
  } else {
    CdParams p;
    p.L = a.L;
    p.max_iters = a.max_iters;
    p.time_limit_s = a.time_limit;
    p.init = a.init == "det" ? CdInit::deterministic : CdInit::uniform;
    r = synth_coordinate_descent(inst.mdp, inst.sys, p);
  }
  const ResultFile file = to_result_file(a.method, r, a.seed);
  const bool verified = r.status == SynthesisStatus::stabilized && reverify_result(inst, file);

  out << "method     " << a.method << '\n';
  out << "status     " << file.status << (r.message.empty() ? "" : " (" + r.message + ")") << '\n';
  out << "iterations " << r.iterations << '\n';
  out << "time       " << fmt(r.wall_time_s, 3) << " s\n";
  if (r.policy) out << "policy     " << policy_string(*r.policy) << '\n';
  if (r.rho) out << "rho        " << fmt(*r.rho) << '\n';
  if (r.status == SynthesisStatus::stabilized) out << "certificate " << (verified ? "verified" : "REJECTED") << '\n';
  if (!a.output.empty()) write_result_file(a.output, file);

  switch (r.status) {
    case SynthesisStatus::stabilized: return verified ? kExitOk : kExitNumerical;
    case SynthesisStatus::solver_failure: return kExitNumerical;
    default: return kExitNotFound;
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string model;
  std::string policy;
  std::string csv;
  std::vector<double> x0;
  SimulationOptions sim;
};

int cmd_simulate(SimulateArgs a, std::ostream& out) {
  const Instance inst = read_model_file(a.model);
  const Policy policy = read_policy_file(a.policy);
  const Dtmc chain = induce_dtmc(inst.mdp, policy);
  Vector x0 = Vector::Ones(inst.sys.n);
  if (!a.x0.empty()) {
    if (static_cast<int>(a.x0.size()) != inst.sys.n) throw InvalidInput("--x0 needs " + std::to_string(inst.sys.n) + " values");
    x0 = Eigen::Map<const Vector>(a.x0.data(), inst.sys.n);
  }
  NoiseSpec noise{Vector::Zero(inst.sys.m), Matrix::Zero(inst.sys.m, inst.sys.m)};
  if (inst.noise) noise = *inst.noise;

  const MomentTrace trace = simulate_trajectories(inst.sys, chain, noise, x0, a.sim);
  out << "trials  " << trace.trials << ", horizon " << trace.horizon << '\n';
  if (trace.diverged_at) out << "diverged at step " << *trace.diverged_at << '\n';
  const int last = trace.steps() - 1;
  out << "E|x x'| sup-norm at k=0: " << fmt(sup_norm(trace.second_moment_trace.front())) << ", at k=" << last << ": "
      << fmt(sup_norm(trace.second_moment_trace.back())) << '\n';
  if (trace.diverged_at || trace.steps() >= 2 * kDefaultWindow) {
    const auto diag = mss_empirical_diagnostic(trace);
    out << "empirical verdict (advisory): " << to_string(diag.verdict) << ", relative change "
        << fmt(diag.relative_change, 3) << '\n';
  }
  if (!a.csv.empty()) {
    std::ofstream f(a.csv);
    if (!f) throw InvalidInput("cannot write " + a.csv);
    write_trace_csv(trace, f);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string kind;
  std::string output;
  int n = 15;
  int modes = 2;
  int actions = 2;
  double lo = -0.5;
  double hi = 0.5;
  int nodes = 4;
  double rate = 1.0;
  double max_rate = -1.0;
  double ts = 0.1;
  bool euler = false;
  std::uint64_t seed = 1;
};

Instance generate(const GenArgs& a) {
  if (a.kind == "random") return gen_random_instance(a.n, a.modes, a.actions, {a.lo, a.hi}, a.seed);
  if (a.kind == "wireless") return build_wireless_model(random_wireless_spec(a.nodes, a.seed));
  if (a.kind == "transport") {
    TransportSpec spec = a.max_rate >= 0.0 ? random_transport_spec(a.max_rate, a.seed) : default_transport_spec(a.rate);
    spec.ts = a.ts;
    spec.euler = a.euler;
    return build_transportation_model(spec);
  }
  return counterexample_instance();
}

int cmd_gen(const GenArgs& a, std::ostream& out) {
  const Instance inst = generate(a);
  if (a.output.empty() || a.output == "-") {
    out << model_to_json(inst) << '\n';
  } else {
    write_model_file(a.output, inst);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string suite = "random";
  int count = 10;
  std::uint64_t seed = 1;
  double timeout = 300.0;
  int n = 15;
  int threads = 0;
  std::string csv;
};

struct BenchRun {
  int instance = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string status;
  bool verified = false;
  bool unsound = false;
  bool timed_out = false;
  double time_s = 0.0;
  std::optional<double> rho;
};

Instance bench_instance(const BenchArgs& a, std::uint64_t seed) {
  if (a.suite == "random") return gen_random_instance(a.n, 2, 2, {-0.5, 0.5}, seed);
  if (a.suite == "wireless") return build_wireless_model(random_wireless_spec(4, seed));
  return build_transportation_model(random_transport_spec(5.0, seed));
}

BenchRun bench_one(const Instance& inst, const std::string& method, double timeout) {
  BenchRun run;
  run.method = method;
  SynthesisResult r;
  try {
    if (method == "sdp") {
      r = synth_sdp_relaxation(inst.mdp, inst.sys);
    } else {
      CdParams p;
      p.time_limit_s = timeout;
      r = synth_coordinate_descent(inst.mdp, inst.sys, p);
    }
  } catch (const std::exception& e) {
    r.status = SynthesisStatus::solver_failure;
    r.message = e.what();
  }
  run.status = to_string(r.status);
  run.time_s = r.wall_time_s;
  run.rho = r.rho;
  run.timed_out = r.timed_out || r.wall_time_s > timeout;
  if (r.status == SynthesisStatus::stabilized) {
    const bool ok = reverify_result(inst, to_result_file(method, r, 0));
    run.verified = ok && !run.timed_out;
    run.unsound = !ok;
  }
  if (run.timed_out) run.status = "timeout";
  return run;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.suite != "random" && a.suite != "wireless" && a.suite != "transport") {
    throw InvalidInput("unknown suite " + a.suite);
  }
  if (a.count < 1) throw InvalidInput("--count must be at least 1");
  const std::vector<std::string> methods = {"sdp", "cd"};
  std::vector<BenchRun> runs(static_cast<std::size_t>(a.count) * methods.size());

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k; (k = next.fetch_add(1)) < a.count;) {
      const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(k);
      const Instance inst = bench_instance(a, seed);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        BenchRun run = bench_one(inst, methods[m], a.timeout);
        run.instance = k + 1;
        run.seed = seed;
        runs[static_cast<std::size_t>(k) * methods.size() + m] = std::move(run);
      }
    }
  };
  const int threads = std::max(1, std::min(a.count, a.threads > 0 ? a.threads
                                                                  : static_cast<int>(std::thread::hardware_concurrency())));
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  out << "suite " << a.suite;
  if (a.suite == "random") out << " (n=" << a.n << ", N=2, |Sigma|=2)";
  out << ", " << a.count << " instances, seed " << a.seed << ", timeout " << fmt(a.timeout) << " s\n";
  out << std::left << std::setw(8) << "method" << std::setw(10) << "solved" << std::setw(14) << "avg time (s)"
      << std::setw(10) << "timeouts" << "unsound\n";
  int unsound_total = 0;
  for (const auto& method : methods) {
    int solved = 0, timeouts = 0, unsound = 0;
    double total = 0.0;
    for (const auto& r : runs) {
      if (r.method != method) continue;
      if (r.verified) {
        ++solved;
        total += r.time_s;
      }
      timeouts += r.timed_out;
      unsound += r.unsound;
    }
    unsound_total += unsound;
    std::string upper = method;
    std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
    out << std::setw(8) << upper << std::setw(10) << (std::to_string(solved) + "/" + std::to_string(a.count))
        << std::setw(14) << (solved ? fmt(total / solved, 3) : std::string("-")) << std::setw(10) << timeouts << unsound
        << '\n';
  }
  out << std::right;

  if (!a.csv.empty()) {
    std::ofstream f(a.csv);
    if (!f) throw InvalidInput("cannot write " + a.csv);
    f << "suite,instance,seed,method,status,verified,time_s,rho\n";
    f << std::setprecision(17);
    for (const auto& r : runs) {
      f << a.suite << ',' << r.instance << ',' << r.seed << ',' << r.method << ',' << r.status << ','
        << (r.verified ? 1 : 0) << ',' << r.time_s << ',';
      if (r.rho) f << *r.rho;
      f << '\n';
    }
  }
  return unsound_total > 0 ? kExitNumerical : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean-square stability analysis and policy synthesis for MDP-switched linear systems", "mjls"};
  app.require_subcommand(1);

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Spectral, Lyapunov and diagonal tests for a policy");
  c->add_option("model", check.model, "Model JSON file")->required();
  c->add_option("--policy", check.policy, "Policy or result JSON file (default: uniform policy)");
  c->add_option("--eps", check.eps, "Strictness margin of the LMIs")->check(CLI::PositiveNumber);
  c->add_option("--tau", check.tau, "Upper bound on V_i")->check(CLI::PositiveNumber);
  c->add_option("--dump-sdp", check.dump_sdp, "Write the Lyapunov SDP in sparse text form");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Search for a stabilizing policy");
  s->add_option("model", synth.model, "Model JSON file")->required();
  s->add_option("--method", synth.method, "cd or sdp")->check(CLI::IsMember({"cd", "sdp"}));
  s->add_option("--L", synth.L, "Proximal weight")->check(CLI::PositiveNumber);
  s->add_option("--max-iters", synth.max_iters, "Coordinate-descent iteration cap")->check(CLI::PositiveNumber);
  s->add_option("--time-limit", synth.time_limit, "Wall-clock limit in seconds (0 = none)")->check(CLI::NonNegativeNumber);
  s->add_option("--seed", synth.seed, "Recorded in the result file");
  s->add_option("--init", synth.init, "Initial policy: uniform or det")->check(CLI::IsMember({"uniform", "det"}));
  s->add_option("-o,--output", synth.output, "Result JSON file");

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Monte-Carlo moments under a fixed policy");
  m->add_option("model", sim.model, "Model JSON file")->required();
  m->add_option("--policy", sim.policy, "Policy or result JSON file")->required();
  m->add_option("--trials", sim.sim.trials, "Number of trajectories")->check(CLI::PositiveNumber);
  m->add_option("--horizon", sim.sim.horizon, "Steps per trajectory")->check(CLI::PositiveNumber);
  m->add_option("--seed", sim.sim.seed, "Random seed");
  m->add_option("--threads", sim.sim.threads, "Worker threads")->check(CLI::PositiveNumber);
  m->add_option("--x0", sim.x0, "Initial state")->delimiter(',');
  m->add_option("--csv", sim.csv, "Write the moment trace as CSV");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a model file");
  g->add_option("kind", gen.kind, "random, wireless, transport or counterexample")
      ->required()
      ->check(CLI::IsMember({"random", "wireless", "transport", "counterexample"}));
  g->add_option("-o,--output", gen.output, "Output file (default: stdout)");
  g->add_option("--n", gen.n, "State dimension (random)")->check(CLI::PositiveNumber);
  g->add_option("--modes", gen.modes, "Number of modes (random)")->check(CLI::PositiveNumber);
  g->add_option("--actions", gen.actions, "Number of actions (random)")->check(CLI::PositiveNumber);
  g->add_option("--lo", gen.lo, "Lower entry bound (random)");
  g->add_option("--hi", gen.hi, "Upper entry bound (random)");
  g->add_option("--nodes", gen.nodes, "Node count (wireless)")->check(CLI::PositiveNumber);
  g->add_option("--rate", gen.rate, "Rate on every active link (transport)")->check(CLI::NonNegativeNumber);
  g->add_option("--max-rate", gen.max_rate, "Draw active rates uniformly on [0, max] (transport)");
  g->add_option("--ts", gen.ts, "Sampling time (transport)")->check(CLI::PositiveNumber);
  g->add_flag("--euler", gen.euler, "Forward-Euler discretization (transport)");
  g->add_option("--seed", gen.seed, "Random seed");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run SDP relaxation and coordinate descent over a generated batch");
  b->add_option("--suite", bench.suite, "random, wireless or transport")
      ->check(CLI::IsMember({"random", "wireless", "transport"}));
  b->add_option("--count", bench.count, "Number of instances")->check(CLI::PositiveNumber);
  b->add_option("--seed", bench.seed, "Seed of the first instance");
  b->add_option("--timeout", bench.timeout, "Per-instance time limit in seconds")->check(CLI::PositiveNumber);
  b->add_option("--n", bench.n, "State dimension (random suite)")->check(CLI::PositiveNumber);
  b->add_option("--threads", bench.threads, "Worker threads (default: hardware)");
  b->add_option("--csv", bench.csv, "Write per-run results as CSV");

  try {
    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (c->parsed()) return cmd_check(check, out);
    if (s->parsed()) return cmd_synth(synth, out);
    if (m->parsed()) return cmd_simulate(sim, out);
    if (g->parsed()) return cmd_gen(gen, out);
    if (b->parsed()) return cmd_bench(bench, out);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInvalid;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace mjls
