#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mjls/model.hpp"

namespace mjls {

struct Instance {
  SwitchedLinearSystem sys;
  Mdp mdp;
  std::optional<NoiseSpec> noise;
};

/// A_i entries i.i.d. uniform on [lo, hi]; each T_sigma row uniform on the
/// simplex (normalized exponentials); B_i = I. Deterministic given seed.
Instance gen_random_instance(int n, int modes, int num_actions, std::pair<double, double> entry_range,
                             std::uint64_t seed);

struct WirelessSpec {
  int nodes = 0;
  std::vector<Matrix> gains;  ///< one nodes x nodes path-loss matrix per mode, entries in [0, 1]
  Vector sinr_target;         ///< gamma_i
  Vector step;                ///< lambda_i in (0, 1]
  Vector noise;               ///< receiver noise v_i (mean of the noise input)
  std::vector<Matrix> transitions;
};

/// T_sigma1 = [[0.9, 0.1], [0.1, 0.9]], T_sigma2 = [[0.3, 0.7], [0.6, 0.4]].
std::vector<Matrix> wireless_reference_transitions();

/// Per mode A = I - Lambda H, B = Lambda eta, with H_ii = 1,
/// H_ij = -gamma_i g_ji / g_ii and eta = diag(gamma_i / g_ii). The noise
/// input has mean v and zero covariance.
Instance build_wireless_model(const WirelessSpec& spec);

/// Random 2-mode wireless spec over the reference transitions: g_ii uniform on
/// [0.5, 1], g_ij (i != j) uniform on [0, 0.5], gamma_i uniform on [0.5, 1.5],
/// lambda_i uniform on [0.5, 1], v_i = 0.1.
WirelessSpec random_wireless_spec(int nodes, std::uint64_t seed);

/// Link order used by TransportSpec::rates.
enum class Link { l12, l23, l31, l32, l34, l43 };
inline constexpr int kNumLinks = 6;

struct TransportSpec {
  std::vector<std::array<double, kNumLinks>> rates;  ///< per mode, indexed by Link
  double ts = 0.1;
  bool euler = false;  ///< forward Euler I + Ts A instead of expm(Ts A)
  std::vector<Matrix> transitions;
};

/// T_sigma1 = [[0.5, 0.5], [0.6, 0.4]], T_sigma2 = [[0.8, 0.2], [0.2, 0.8]].
std::vector<Matrix> transport_reference_transitions();

/// Continuous-time 4-buffer matrix for one rate assignment.
Matrix transport_continuous_matrix(const std::array<double, kNumLinks>& rates);

/// Two modes: mode 1 with l12 = l23 = l31 = 0, mode 2 with l32 = l34 = l43 = 0,
/// every other link at `rate`. The rate values are repository defaults; the
/// source example does not publish them.
TransportSpec default_transport_spec(double rate = 1.0);

/// Same masks as the default spec with active rates uniform on [0, max_rate].
TransportSpec random_transport_spec(double max_rate, std::uint64_t seed);

/// A_d = expm(Ts A) per mode (or I + Ts A with euler), B_d = I.
Instance build_transportation_model(const TransportSpec& spec);

/// The two-mode, two-action system for which no deterministic policy is
/// mean-square stabilizing but a randomized one is.
Instance counterexample_instance();

}  // namespace mjls
