#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mjls/casegen.hpp"
#include "mjls/stability.hpp"

namespace mjls {

// Model files:
//   {"n", "N", "m", "actions": [names], "modes": [{"A": [[...]], "B": [[...]]?}],
//    "transitions": {name: [[...]]}, "initial_mode": 1-based,
//    "noise": {"mean": [...], "covariance": [[...]]}?}
// Matrices are row-major nested lists. Numbers are written in shortest
// round-trip decimal form.

/// Throws InvalidInput on malformed JSON or when the pair fails validation.
Instance model_from_json(const std::string& text);
std::string model_to_json(const Instance& inst);

Instance read_model_file(const std::filesystem::path& path);
void write_model_file(const std::filesystem::path& path, const Instance& inst);

struct ResultFile {
  std::string method;  ///< "cd", "sdp" or "cert"
  std::string status;
  std::optional<Policy> policy;
  std::optional<double> rho;
  std::optional<LyapunovCertificate> certificate;
  std::vector<double> gamma_trace;
  int iterations = 0;
  double wall_time_s = 0.0;
  std::optional<std::uint64_t> seed;
};

ResultFile result_from_json(const std::string& text);
std::string result_to_json(const ResultFile& result);

ResultFile read_result_file(const std::filesystem::path& path);
void write_result_file(const std::filesystem::path& path, const ResultFile& result);

/// Reads the "policy" entry of any JSON document (a result file or a bare
/// {"policy": [[...]]}).
Policy read_policy_file(const std::filesystem::path& path);

/// Re-checks a stabilized result against the model with no solver: the
/// policy must be valid, the certificate must pass verify_policy_certificate
/// and the induced chain must pass the spectral test.
bool reverify_result(const Instance& inst, const ResultFile& result);

}  // namespace mjls
