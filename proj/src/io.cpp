#include "mjls/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mjls/error.hpp"

namespace mjls {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw InvalidInput(what + ": expected a number");
  return j.get<double>();
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw InvalidInput(what + ": expected a non-empty list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw InvalidInput(what + ": expected a list of rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidInput(what + ": row " + std::to_string(r + 1) + " has the wrong length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidInput(what + ": expected a list");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

int integer(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) throw InvalidInput(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

std::string text_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw InvalidInput(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("malformed JSON: ") + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text << '\n';
}

}  // namespace

Instance model_from_json(const std::string& text) {
  const json j = parse(text);
  Instance inst;
  inst.sys.n = integer(j, "n");
  const int modes = integer(j, "N");
  inst.sys.m = j.contains("m") ? integer(j, "m") : 0;

  const auto& actions = field(j, "actions");
  if (!actions.is_array()) throw InvalidInput("\"actions\" must be a list of names");
  for (const auto& a : actions) {
    if (!a.is_string()) throw InvalidInput("action names must be strings");
    inst.mdp.actions.push_back(a.get<std::string>());
  }

  const auto& mode_list = field(j, "modes");
  if (!mode_list.is_array()) throw InvalidInput("\"modes\" must be a list");
  for (std::size_t i = 0; i < mode_list.size(); ++i) {
    const std::string where = "mode " + std::to_string(i + 1);
    inst.sys.a.push_back(matrix_from_json(field(mode_list[i], "A"), where + " A"));
    if (mode_list[i].contains("B") && !mode_list[i].at("B").is_null()) {
      inst.sys.b.push_back(matrix_from_json(mode_list[i].at("B"), where + " B"));
    }
  }
  if (!inst.sys.b.empty() && inst.sys.b.size() != inst.sys.a.size()) {
    throw InvalidInput("either every mode or no mode must give B");
  }

  const auto& trans = field(j, "transitions");
  if (!trans.is_object()) throw InvalidInput("\"transitions\" must map action names to matrices");
  for (const auto& name : inst.mdp.actions) {
    if (!trans.contains(name)) throw InvalidInput("no transition matrix for action \"" + name + "\"");
    inst.mdp.transitions.push_back(matrix_from_json(trans.at(name), "transitions " + name));
  }
  if (trans.size() != inst.mdp.actions.size()) throw InvalidInput("transition matrix given for an unknown action");

  inst.mdp.num_modes = modes;
  const int initial = j.contains("initial_mode") ? integer(j, "initial_mode") : 1;
  inst.mdp.initial_mode = initial - 1;

  if (j.contains("noise") && !j.at("noise").is_null()) {
    const auto& nz = j.at("noise");
    inst.noise = NoiseSpec{vector_from_json(field(nz, "mean"), "noise mean"),
                           matrix_from_json(field(nz, "covariance"), "noise covariance")};
    const auto bad = noise_violations(*inst.noise, inst.sys.m);
    if (!bad.empty()) throw InvalidInput("noise: " + bad.front());
  }

  const auto report = validate_system(inst.sys, inst.mdp);
  if (!report.ok()) {
    std::string msg = "invalid model:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw InvalidInput(msg);
  }
  return inst;
}

std::string model_to_json(const Instance& inst) {
  json j;
  j["n"] = inst.sys.n;
  j["N"] = inst.sys.num_modes();
  j["m"] = inst.sys.m;
  j["actions"] = inst.mdp.actions;
  json modes = json::array();
  for (int i = 0; i < inst.sys.num_modes(); ++i) {
    json mode;
    mode["A"] = matrix_to_json(inst.sys.a[i]);
    if (inst.sys.has_noise_input()) mode["B"] = matrix_to_json(inst.sys.b[i]);
    modes.push_back(std::move(mode));
  }
  j["modes"] = std::move(modes);
  json trans = json::object();
  for (int s = 0; s < inst.mdp.num_actions(); ++s) trans[inst.mdp.actions[s]] = matrix_to_json(inst.mdp.transitions[s]);
  j["transitions"] = std::move(trans);
  j["initial_mode"] = inst.mdp.initial_mode + 1;
  if (inst.noise) {
    j["noise"] = {{"mean", vector_to_json(inst.noise->mean)}, {"covariance", matrix_to_json(inst.noise->covariance)}};
  }
  return j.dump(2);
}

Instance read_model_file(const std::filesystem::path& path) { return model_from_json(slurp(path)); }

void write_model_file(const std::filesystem::path& path, const Instance& inst) { spit(path, model_to_json(inst)); }

ResultFile result_from_json(const std::string& text) {
  const json j = parse(text);
  ResultFile r;
  r.method = text_field(j, "method");
  r.status = text_field(j, "status");
  if (j.contains("policy") && !j.at("policy").is_null()) r.policy = Policy{matrix_from_json(j.at("policy"), "policy")};
  if (j.contains("rho") && !j.at("rho").is_null()) r.rho = number(j.at("rho"), "rho");
  if (j.contains("certificate") && !j.at("certificate").is_null()) {
    const auto& c = j.at("certificate");
    LyapunovCertificate cert;
    const auto& vs = field(c, "V");
    if (!vs.is_array()) throw InvalidInput("certificate V must be a list of matrices");
    for (const auto& v : vs) cert.v.push_back(matrix_from_json(v, "certificate V"));
    cert.epsilon = number(field(c, "epsilon"), "certificate epsilon");
    r.certificate = std::move(cert);
  }
  if (j.contains("gamma_trace")) {
    const Vector g = vector_from_json(j.at("gamma_trace"), "gamma_trace");
    r.gamma_trace.assign(g.data(), g.data() + g.size());
  }
  if (j.contains("iterations")) r.iterations = integer(j, "iterations");
  if (j.contains("wall_time_s")) r.wall_time_s = number(j.at("wall_time_s"), "wall_time_s");
  if (j.contains("seed") && !j.at("seed").is_null()) {
    if (!j.at("seed").is_number_unsigned()) throw InvalidInput("seed must be a nonnegative integer");
    r.seed = j.at("seed").get<std::uint64_t>();
  }
  return r;
}

std::string result_to_json(const ResultFile& r) {
  json j;
  j["method"] = r.method;
  j["status"] = r.status;
  j["policy"] = r.policy ? matrix_to_json(r.policy->pi) : json(nullptr);
  j["rho"] = r.rho ? json(*r.rho) : json(nullptr);
  if (r.certificate) {
    json vs = json::array();
    for (const auto& v : r.certificate->v) vs.push_back(matrix_to_json(v));
    j["certificate"] = {{"V", std::move(vs)}, {"epsilon", r.certificate->epsilon}};
  } else {
    j["certificate"] = nullptr;
  }
  j["gamma_trace"] = r.gamma_trace;
  j["iterations"] = r.iterations;
  j["wall_time_s"] = r.wall_time_s;
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  return j.dump(2);
}

ResultFile read_result_file(const std::filesystem::path& path) { return result_from_json(slurp(path)); }

void write_result_file(const std::filesystem::path& path, const ResultFile& result) {
  spit(path, result_to_json(result));
}

Policy read_policy_file(const std::filesystem::path& path) {
  const json j = parse(slurp(path));
  return Policy{matrix_from_json(field(j, "policy"), "policy")};
}

bool reverify_result(const Instance& inst, const ResultFile& result) {
  if (!result.policy || !result.certificate) return false;
  if (result.policy->pi.rows() != inst.mdp.num_modes || result.policy->pi.cols() != inst.mdp.num_actions()) return false;
  if (!policy_violations(inst.mdp, *result.policy).empty()) return false;
  if (static_cast<int>(result.certificate->v.size()) != inst.sys.num_modes()) return false;
  for (const auto& v : result.certificate->v) {
    if (v.rows() != inst.sys.n || v.cols() != inst.sys.n) return false;
  }
  if (!verify_policy_certificate(inst.mdp, inst.sys, *result.policy, *result.certificate)) return false;
  return check_mss_spectral(induce_dtmc(inst.mdp, *result.policy), inst.sys).stable;
}

}  // namespace mjls
