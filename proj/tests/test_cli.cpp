#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "mjls/cli.hpp"
#include "mjls/io.hpp"

using namespace mjls;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mjls_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Outcome run(std::vector<std::string> args) const {
    args.insert(args.begin(), "mjls");
    std::ostringstream out, err;
    Outcome r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream f(path(name));
    f << text;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SynthCdOnCounterexampleReverifies) {
  ASSERT_EQ(run({"gen", "counterexample", "-o", path("ce.json")}).code, kExitOk);
  const Outcome r = run({"synth", path("ce.json"), "--method", "cd", "-o", path("res.json")});
  ASSERT_EQ(r.code, kExitOk) << r.out << r.err;
  const ResultFile res = read_result_file(path("res.json"));
  EXPECT_EQ(res.status, "stabilized");
  ASSERT_TRUE(res.rho.has_value());
  EXPECT_LT(*res.rho, 1.0);
  EXPECT_TRUE(reverify_result(read_model_file(path("ce.json")), res));

  // The result file doubles as a policy file for check.
  const Outcome c = run({"check", path("ce.json"), "--policy", path("res.json")});
  EXPECT_EQ(c.code, kExitOk) << c.out << c.err;
}

TEST_F(CliTest, CheckDeterministicPolicyIsUnstable) {
  ASSERT_EQ(run({"gen", "counterexample", "-o", path("ce.json")}).code, kExitOk);
  write("det_s1s1.json", R"({"policy": [[1, 0], [1, 0]]})");
  const Outcome r = run({"check", path("ce.json"), "--policy", path("det_s1s1.json")});
  EXPECT_EQ(r.code, kExitNotFound);
  EXPECT_NE(r.out.find("1.04"), std::string::npos) << r.out;
}

TEST_F(CliTest, SynthSdpInfeasibleOnCounterexample) {
  ASSERT_EQ(run({"gen", "counterexample", "-o", path("ce.json")}).code, kExitOk);
  const Outcome r = run({"synth", path("ce.json"), "--method", "sdp", "-o", path("res.json")});
  EXPECT_EQ(r.code, kExitNotFound) << r.out << r.err;
  EXPECT_EQ(read_result_file(path("res.json")).status, "converged_infeasible");
}

TEST_F(CliTest, InvalidInputsExitTwo) {
  EXPECT_EQ(run({"frobnicate"}).code, kExitInvalid);
  EXPECT_EQ(run({"check", path("missing.json")}).code, kExitInvalid);
  write("broken.json", "{\"n\": 2");
  const Outcome r = run({"check", path("broken.json")});
  EXPECT_EQ(r.code, kExitInvalid);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run({"synth", path("broken.json"), "--method", "bogus"}).code, kExitInvalid);
  ASSERT_EQ(run({"gen", "counterexample", "-o", path("ce.json")}).code, kExitOk);
  write("bad_policy.json", R"({"policy": [[0.5, 0.6], [1, 0]]})");
  EXPECT_EQ(run({"check", path("ce.json"), "--policy", path("bad_policy.json")}).code, kExitInvalid);
}

TEST_F(CliTest, SimulateWritesCsv) {
  ASSERT_EQ(run({"gen", "counterexample", "-o", path("ce.json")}).code, kExitOk);
  write("pol.json", R"({"policy": [[1, 0], [0.27, 0.73]]})");
  const Outcome r = run({"simulate", path("ce.json"), "--policy", path("pol.json"), "--trials", "200", "--horizon", "60",
                     "--x0", "1,1", "--csv", path("trace.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream f(path("trace.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  EXPECT_EQ(rows, 62);  // header + steps 0..60
}

TEST_F(CliTest, GenRoundTripIsBitExact) {
  for (const std::vector<std::string> kind : {std::vector<std::string>{"random", "--n", "3", "--seed", "9"},
                                              std::vector<std::string>{"wireless", "--nodes", "3"},
                                              std::vector<std::string>{"transport", "--max-rate", "4"}}) {
    std::vector<std::string> args = {"gen"};
    args.insert(args.end(), kind.begin(), kind.end());
    args.push_back("-o");
    args.push_back(path("m.json"));
    ASSERT_EQ(run(args).code, kExitOk);
    const Instance inst = read_model_file(path("m.json"));
    const std::string once = model_to_json(inst);
    EXPECT_EQ(model_to_json(model_from_json(once)), once);
    std::ifstream f(path("m.json"));
    std::stringstream ss;
    ss << f.rdbuf();
    std::string file_text = ss.str();
    while (!file_text.empty() && file_text.back() == '\n') file_text.pop_back();
    EXPECT_EQ(file_text, once);
  }
}

TEST_F(CliTest, BenchCountsMatchVerifiedRuns) {
  const Outcome r = run({"bench", "--suite", "random", "--n", "2", "--count", "4", "--seed", "3", "--timeout", "60",
                     "--threads", "2", "--csv", path("bench.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.out << r.err;
  std::ifstream f(path("bench.csv"));
  std::string line;
  std::getline(f, line);
  int verified_cd = 0, verified_sdp = 0, rows = 0;
  while (std::getline(f, line)) {
    ++rows;
    const bool ok = line.find(",1,") != std::string::npos && line.find("stabilized") != std::string::npos;
    if (ok && line.find(",cd,") != std::string::npos) ++verified_cd;
    if (ok && line.find(",sdp,") != std::string::npos) ++verified_sdp;
  }
  EXPECT_EQ(rows, 8);
  const std::regex cd_row(R"(CD\s+(\d+)/4)"), sdp_row(R"(SDP\s+(\d+)/4)");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, cd_row)) << r.out;
  EXPECT_EQ(std::stoi(m[1]), verified_cd);
  ASSERT_TRUE(std::regex_search(r.out, m, sdp_row)) << r.out;
  EXPECT_EQ(std::stoi(m[1]), verified_sdp);
}
