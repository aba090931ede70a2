#include "mjls/casegen.hpp"

#include <random>

#include "mjls/error.hpp"

namespace mjls {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

Matrix stochastic_matrix(int modes, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Matrix t(modes, modes);
  for (int i = 0; i < modes; ++i) {
    for (int j = 0; j < modes; ++j) t(i, j) = expo(rng);
    t.row(i) /= t.row(i).sum();
  }
  return t;
}

Mdp two_action_mdp(std::vector<Matrix> transitions) {
  Mdp mdp;
  mdp.num_modes = static_cast<int>(transitions.front().rows());
  for (std::size_t s = 0; s < transitions.size(); ++s) mdp.actions.push_back("sigma" + std::to_string(s + 1));
  mdp.transitions = std::move(transitions);
  return mdp;
}

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

void check_instance(const Instance& inst) {
  const auto report = validate_system(inst.sys, inst.mdp);
  if (!report.ok()) throw InvalidInput(report.violations.front());
}

}  // namespace

Instance gen_random_instance(int n, int modes, int num_actions, std::pair<double, double> entry_range,
                             std::uint64_t seed) {
  if (n < 1 || modes < 1 || num_actions < 1) throw InvalidInput("dimensions must be positive");
  if (!(entry_range.first <= entry_range.second)) throw InvalidInput("entry range is empty");
  auto rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> unif(entry_range.first, entry_range.second);

  Instance inst;
  inst.sys.n = n;
  inst.sys.m = n;
  for (int i = 0; i < modes; ++i) {
    Matrix a(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) a(r, c) = unif(rng);
    }
    inst.sys.a.push_back(std::move(a));
    inst.sys.b.push_back(Matrix::Identity(n, n));
  }
  std::vector<Matrix> transitions;
  for (int s = 0; s < num_actions; ++s) transitions.push_back(stochastic_matrix(modes, rng));
  inst.mdp = two_action_mdp(std::move(transitions));
  return inst;
}

std::vector<Matrix> wireless_reference_transitions() {
  return {from_rows({{0.9, 0.1}, {0.1, 0.9}}), from_rows({{0.3, 0.7}, {0.6, 0.4}})};
}

Instance build_wireless_model(const WirelessSpec& spec) {
  const int n = spec.nodes;
  if (n < 1) throw InvalidInput("wireless spec needs at least one node");
  if (spec.gains.empty()) throw InvalidInput("wireless spec needs at least one gain matrix");
  if (spec.sinr_target.size() != n || spec.step.size() != n || spec.noise.size() != n) {
    throw InvalidInput("wireless spec vectors must have one entry per node");
  }
  if (spec.transitions.empty()) throw InvalidInput("wireless spec has no transition matrices");
  for (int i = 0; i < n; ++i) {
    if (!(spec.step(i) > 0.0 && spec.step(i) <= 1.0)) throw InvalidInput("step sizes must lie in (0, 1]");
  }

  const Matrix lambda = spec.step.asDiagonal();
  Instance inst;
  inst.sys.n = n;
  inst.sys.m = n;
  for (const auto& g : spec.gains) {
    if (g.rows() != n || g.cols() != n) throw InvalidInput("gain matrix must be nodes x nodes");
    Matrix h = Matrix::Identity(n, n);
    Vector eta(n);
    for (int i = 0; i < n; ++i) {
      if (!(g(i, i) > 0.0)) throw InvalidInput("diagonal gain g_" + std::to_string(i + 1) + std::to_string(i + 1) + " must be positive");
      eta(i) = spec.sinr_target(i) / g(i, i);
      for (int j = 0; j < n; ++j) {
        if (j != i) h(i, j) = -spec.sinr_target(i) * g(j, i) / g(i, i);
      }
    }
    inst.sys.a.push_back(Matrix::Identity(n, n) - lambda * h);
    inst.sys.b.push_back(lambda * eta.asDiagonal());
  }
  inst.mdp = two_action_mdp(spec.transitions);
  inst.noise = NoiseSpec{spec.noise, Matrix::Zero(n, n)};
  check_instance(inst);
  return inst;
}

WirelessSpec random_wireless_spec(int nodes, std::uint64_t seed) {
  if (nodes < 1) throw InvalidInput("wireless spec needs at least one node");
  auto rng = make_rng(seed, 1);
  std::uniform_real_distribution<double> diag(0.5, 1.0), cross(0.0, 0.5), target(0.5, 1.5), step(0.5, 1.0);
  WirelessSpec spec;
  spec.nodes = nodes;
  for (int mode = 0; mode < 2; ++mode) {
    Matrix g(nodes, nodes);
    for (int i = 0; i < nodes; ++i) {
      for (int j = 0; j < nodes; ++j) g(i, j) = i == j ? diag(rng) : cross(rng);
    }
    spec.gains.push_back(std::move(g));
  }
  spec.sinr_target.resize(nodes);
  spec.step.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    spec.sinr_target(i) = target(rng);
    spec.step(i) = step(rng);
  }
  spec.noise = Vector::Constant(nodes, 0.1);
  spec.transitions = wireless_reference_transitions();
  return spec;
}

std::vector<Matrix> transport_reference_transitions() {
  return {from_rows({{0.5, 0.5}, {0.6, 0.4}}), from_rows({{0.8, 0.2}, {0.2, 0.8}})};
}

Matrix transport_continuous_matrix(const std::array<double, kNumLinks>& rates) {
  for (double r : rates) {
    if (!(r >= 0.0)) throw InvalidInput("transfer rates must be nonnegative");
  }
  const double l12 = rates[static_cast<int>(Link::l12)];
  const double l23 = rates[static_cast<int>(Link::l23)];
  const double l31 = rates[static_cast<int>(Link::l31)];
  const double l32 = rates[static_cast<int>(Link::l32)];
  const double l34 = rates[static_cast<int>(Link::l34)];
  const double l43 = rates[static_cast<int>(Link::l43)];
  Matrix a(4, 4);
  a << -1.0 - l31, l12, 0.0, 0.0,
       0.0, 2.0 - l12 - l32, l23, 0.0,
       l31, l32, 3.0 - l23 - l43, l34,
       0.0, 0.0, l43, -4.0 - l34;
  return a;
}

namespace {

std::array<double, kNumLinks> masked(std::array<double, kNumLinks> rates, int mode) {
  const auto zero = [&](Link l) { rates[static_cast<int>(l)] = 0.0; };
  if (mode == 0) {
    zero(Link::l12);
    zero(Link::l23);
    zero(Link::l31);
  } else {
    zero(Link::l32);
    zero(Link::l34);
    zero(Link::l43);
  }
  return rates;
}

}  // namespace

TransportSpec default_transport_spec(double rate) {
  TransportSpec spec;
  std::array<double, kNumLinks> all;
  all.fill(rate);
  spec.rates = {masked(all, 0), masked(all, 1)};
  spec.transitions = transport_reference_transitions();
  return spec;
}

TransportSpec random_transport_spec(double max_rate, std::uint64_t seed) {
  if (!(max_rate >= 0.0)) throw InvalidInput("max rate must be nonnegative");
  auto rng = make_rng(seed, 2);
  std::uniform_real_distribution<double> unif(0.0, max_rate);
  TransportSpec spec;
  for (int mode = 0; mode < 2; ++mode) {
    std::array<double, kNumLinks> r;
    for (auto& x : r) x = unif(rng);
    spec.rates.push_back(masked(r, mode));
  }
  spec.transitions = transport_reference_transitions();
  return spec;
}

Instance build_transportation_model(const TransportSpec& spec) {
  if (!(spec.ts > 0.0)) throw InvalidInput("sampling time must be positive");
  if (spec.rates.empty()) throw InvalidInput("transport spec has no modes");
  if (spec.transitions.empty()) throw InvalidInput("transport spec has no transition matrices");
  Instance inst;
  inst.sys.n = 4;
  inst.sys.m = 4;
  for (const auto& r : spec.rates) {
    const Matrix a = transport_continuous_matrix(r);
    inst.sys.a.push_back(spec.euler ? Matrix(Matrix::Identity(4, 4) + spec.ts * a) : expm(spec.ts * a));
    inst.sys.b.push_back(Matrix::Identity(4, 4));
  }
  inst.mdp = two_action_mdp(spec.transitions);
  check_instance(inst);
  return inst;
}

Instance counterexample_instance() {
  Instance inst;
  inst.sys.n = 2;
  inst.sys.a = {from_rows({{0.99, -0.56}, {-0.19, 0.73}}), from_rows({{0.38, -0.98}, {-0.66, -0.66}})};
  inst.mdp = two_action_mdp({from_rows({{0.21, 0.79}, {0.90, 0.10}}), from_rows({{0.71, 0.29}, {0.13, 0.87}})});
  return inst;
}

}  // namespace mjls
