#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "mjls/error.hpp"
#include "mjls/io.hpp"
#include "mjls/synthesis.hpp"

using namespace mjls;

namespace {

void expect_same(const Instance& a, const Instance& b) {
  ASSERT_EQ(a.sys.n, b.sys.n);
  ASSERT_EQ(a.sys.m, b.sys.m);
  ASSERT_EQ(a.sys.a.size(), b.sys.a.size());
  for (std::size_t i = 0; i < a.sys.a.size(); ++i) EXPECT_EQ(a.sys.a[i], b.sys.a[i]);
  ASSERT_EQ(a.sys.b.size(), b.sys.b.size());
  for (std::size_t i = 0; i < a.sys.b.size(); ++i) EXPECT_EQ(a.sys.b[i], b.sys.b[i]);
  EXPECT_EQ(a.mdp.actions, b.mdp.actions);
  for (std::size_t s = 0; s < a.mdp.transitions.size(); ++s) EXPECT_EQ(a.mdp.transitions[s], b.mdp.transitions[s]);
  EXPECT_EQ(a.mdp.initial_mode, b.mdp.initial_mode);
  ASSERT_EQ(a.noise.has_value(), b.noise.has_value());
  if (a.noise) {
    EXPECT_EQ(a.noise->mean, b.noise->mean);
    EXPECT_EQ(a.noise->covariance, b.noise->covariance);
  }
}

const char* kSmallModel = R"({
  "n": 1, "N": 2, "m": 0,
  "actions": ["a", "b"],
  "modes": [{"A": [[0.5]]}, {"A": [[1.2]]}],
  "transitions": {"a": [[0.5, 0.5], [0.5, 0.5]], "b": [[1, 0], [1, 0]]},
  "initial_mode": 2
})";

}  // namespace

TEST(ModelJson, ParsesDocumentedFormat) {
  const Instance inst = model_from_json(kSmallModel);
  EXPECT_EQ(inst.sys.n, 1);
  EXPECT_EQ(inst.sys.num_modes(), 2);
  EXPECT_EQ(inst.mdp.initial_mode, 1);  // 1-based in the file
  EXPECT_EQ(inst.sys.a[1](0, 0), 1.2);
  EXPECT_EQ(inst.mdp.transitions[1](1, 0), 1.0);
  EXPECT_FALSE(inst.sys.has_noise_input());
}

TEST(ModelJson, RejectsMalformedDocuments) {
  EXPECT_THROW(model_from_json("{"), InvalidInput);
  EXPECT_THROW(model_from_json("[]"), InvalidInput);
  std::string bad = kSmallModel;
  bad.replace(bad.find("[[0.5, 0.5], [0.5, 0.5]]"), 24, "[[0.5, 0.4], [0.5, 0.5]]");
  EXPECT_THROW(model_from_json(bad), InvalidInput);
  bad = kSmallModel;
  bad.replace(bad.find("\"b\": [[1, 0]"), 4, "\"c\"");
  EXPECT_THROW(model_from_json(bad), InvalidInput);
  bad = kSmallModel;
  bad.replace(bad.find("\"N\": 2"), 6, "\"N\": 3");
  EXPECT_THROW(model_from_json(bad), InvalidInput);
}

TEST(ModelJson, RoundTripProperty) {
  std::mt19937_64 rng(81);
  for (int trial = 0; trial < 100; ++trial) {
    Instance inst = fixtures::random_small_instance(rng, 4, 3, 3);
    if (trial % 3 == 0) {
      std::normal_distribution<double> g;
      Matrix c(inst.sys.m, inst.sys.m);
      for (int i = 0; i < c.rows(); ++i) {
        for (int j = 0; j < c.cols(); ++j) c(i, j) = g(rng);
      }
      inst.noise = NoiseSpec{Vector::Constant(inst.sys.m, g(rng)), c * c.transpose()};
    }
    const std::string text = model_to_json(inst);
    const Instance back = model_from_json(text);
    expect_same(inst, back);
    EXPECT_EQ(model_to_json(back), text);
  }
}

TEST(ModelJson, GeneratedFamiliesRoundTrip) {
  for (const Instance& inst : {counterexample_instance(), build_transportation_model(default_transport_spec()),
                               build_wireless_model(random_wireless_spec(3, 5))}) {
    expect_same(inst, model_from_json(model_to_json(inst)));
  }
}

TEST(ModelFile, WriteAndRead) {
  const auto path = std::filesystem::temp_directory_path() / "mjls_io_model_test.json";
  write_model_file(path, counterexample_instance());
  expect_same(counterexample_instance(), read_model_file(path));
  std::filesystem::remove(path);
  EXPECT_THROW(read_model_file(path), InvalidInput);
}

TEST(ResultJson, RoundTripAndReverify) {
  const Instance inst = counterexample_instance();
  const auto r = synth_coordinate_descent(inst.mdp, inst.sys);
  ASSERT_EQ(r.status, SynthesisStatus::stabilized);
  ResultFile file;
  file.method = "cd";
  file.status = to_string(r.status);
  file.policy = r.policy;
  file.rho = r.rho;
  file.certificate = r.certificate;
  file.gamma_trace = r.gamma_trace;
  file.iterations = r.iterations;
  file.wall_time_s = r.wall_time_s;
  file.seed = 42;
  const ResultFile back = result_from_json(result_to_json(file));
  EXPECT_EQ(back.method, "cd");
  EXPECT_EQ(back.policy->pi, file.policy->pi);
  EXPECT_EQ(back.gamma_trace, file.gamma_trace);
  EXPECT_EQ(*back.seed, 42u);
  for (std::size_t i = 0; i < back.certificate->v.size(); ++i) {
    EXPECT_EQ(back.certificate->v[i], file.certificate->v[i]);
  }
  EXPECT_TRUE(reverify_result(inst, back));

  // Tampering with the policy breaks re-verification.
  ResultFile tampered = back;
  tampered.policy = fixtures::policy_from({{1, 0}, {1, 0}});
  EXPECT_FALSE(reverify_result(inst, tampered));
  ResultFile no_cert = back;
  no_cert.certificate.reset();
  EXPECT_FALSE(reverify_result(inst, no_cert));
}

TEST(ResultJson, RejectsBadFields) {
  EXPECT_THROW(result_from_json(R"({"status": "stabilized"})"), InvalidInput);
  EXPECT_THROW(result_from_json(R"({"method": "cd", "status": "x", "seed": -1})"), InvalidInput);
}

TEST(PolicyFile, ReadsPolicyKey) {
  const auto path = std::filesystem::temp_directory_path() / "mjls_io_policy_test.json";
  {
    std::ofstream out(path);
    out << R"({"policy": [[1, 0], [0.27, 0.73]]})";
  }
  const Policy p = read_policy_file(path);
  EXPECT_EQ(p.pi(1, 0), 0.27);
  std::filesystem::remove(path);
}
