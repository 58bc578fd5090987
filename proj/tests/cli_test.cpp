#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rlfdc/io_util.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("rlfdc_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunResult run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string(RLFDC_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = rlfdc::read_file(out.string());
    r.err = rlfdc::read_file(err.string());
    return r;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static int line_count(const std::string& text) {
    int n = 0;
    for (char c : text)
      if (c == '\n') ++n;
    return n;
  }

  fs::path dir_;
};

TEST_F(CliTest, BenchWritesDatasetsAndManifest) {
  const RunResult r = run("bench --faults 2 --seed 7 --out " + path("bench"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "subcommand=bench status=ok artifacts=3 seed=7\n");
  EXPECT_TRUE(fs::exists(path("bench/fault_000.json")));
  EXPECT_TRUE(fs::exists(path("bench/fault_001.json")));
  EXPECT_TRUE(fs::exists(path("bench/manifest.json")));
}

TEST_F(CliTest, SelectTraceHasElevenRows) {
  ASSERT_EQ(run("bench --faults 1 --seed 3 --out " + path("d")).status, 0);
  const RunResult r = run("select --data " + path("d/fault_000.json") +
                          " --metric tfd --k 10 --trace " + path("t.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "subcommand=select status=ok artifacts=1 seed=0\n");
  const std::string csv = rlfdc::read_file(path("t.csv"));
  EXPECT_EQ(line_count(csv), 12);  // header + k = 0..10
}

TEST_F(CliTest, SelectIsIdempotentAndDoesNotMutateInput) {
  ASSERT_EQ(run("bench --faults 1 --seed 5 --out " + path("d")).status, 0);
  const std::string input_before = rlfdc::read_file(path("d/fault_000.json"));
  ASSERT_EQ(run("select --data " + path("d/fault_000.json") +
                " --metric random --seed 11 --k 5 --trace " + path("a.csv"))
                .status,
            0);
  ASSERT_EQ(run("select --data " + path("d/fault_000.json") +
                " --metric random --seed 11 --k 5 --trace " + path("b.csv"))
                .status,
            0);
  EXPECT_EQ(rlfdc::read_file(path("a.csv")), rlfdc::read_file(path("b.csv")));
  EXPECT_EQ(rlfdc::read_file(path("d/fault_000.json")), input_before);
}

TEST_F(CliTest, EvalReportRowCount) {
  ASSERT_EQ(run("bench --faults 3 --seed 9 --out " + path("d")).status, 0);
  const RunResult r = run("eval --data " + path("d") +
                          " --metrics tfd,cover,random --seed 2 --k 10 --report " +
                          path("r.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  const std::string csv = rlfdc::read_file(path("r.csv"));
  EXPECT_EQ(line_count(csv), 34);  // header + 3 metrics x k = 0..10
}

TEST_F(CliTest, EvalParallelMatchesSequential) {
  ASSERT_EQ(run("bench --faults 4 --seed 12 --out " + path("d")).status, 0);
  ASSERT_EQ(run("eval --data " + path("d") + " --metrics tfd,random --seed 3 --k 6 " +
                "--jobs 1 --report " + path("seq.csv"))
                .status,
            0);
  ASSERT_EQ(run("eval --data " + path("d") + " --metrics tfd,random --seed 3 --k 6 " +
                "--jobs 4 --report " + path("par.csv"))
                .status,
            0);
  EXPECT_EQ(rlfdc::read_file(path("seq.csv")), rlfdc::read_file(path("par.csv")));
}

TEST_F(CliTest, TrainThenSelectWithModel) {
  ASSERT_EQ(run("bench --faults 3 --tests 20 --seed 1 --out " + path("d")).status, 0);
  const RunResult t = run("train --data " + path("d") + " --epochs 2 --seed 4 --out " +
                          path("m.json"));
  ASSERT_EQ(t.status, 0) << t.err;
  EXPECT_EQ(t.out, "subcommand=train status=ok artifacts=1 seed=4\n");
  const RunResult t2 = run("train --data " + path("d") + " --epochs 2 --seed 4 --out " +
                           path("m2.json"));
  ASSERT_EQ(t2.status, 0) << t2.err;
  EXPECT_EQ(rlfdc::read_file(path("m.json")), rlfdc::read_file(path("m2.json")));

  const RunResult s = run("select --data " + path("d/fault_000.json") +
                          " --metric rlfdc --model " + path("m.json") +
                          " --k 5 --trace " + path("t.csv"));
  ASSERT_EQ(s.status, 0) << s.err;
  EXPECT_EQ(line_count(rlfdc::read_file(path("t.csv"))), 7);
}

TEST_F(CliTest, GenerateEmitsLabeledFragment) {
  ASSERT_EQ(run("bench --faults 1 --seed 2 --out " + path("d")).status, 0);
  const RunResult r = run("generate --data " + path("d/fault_000.json") +
                          " --fitness tfd --generations 5 --pop 10 --count 4 --seed 6 --out " +
                          path("gen.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const std::string doc = rlfdc::read_file(path("gen.json"));
  EXPECT_NE(doc.find("\"tests\""), std::string::npos);
  EXPECT_NE(doc.find("\"outcome\""), std::string::npos);
}

TEST_F(CliTest, MetricPrintsSuiteAndCandidateValues) {
  ASSERT_EQ(run("bench --faults 1 --seed 8 --out " + path("d")).status, 0);
  const RunResult suite = run("metric --data " + path("d/fault_000.json") + " --metric ddu");
  ASSERT_EQ(suite.status, 0) << suite.err;
  EXPECT_NE(suite.out.find("suite value="), std::string::npos);

  const RunResult cand = run("metric --data " + path("d/fault_000.json") + " --metric cover");
  ASSERT_EQ(cand.status, 0) << cand.err;
  EXPECT_NE(cand.out.find("candidate=0 value="), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run("select --no-such-flag").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
}

TEST_F(CliTest, DomainErrorsExitOne) {
  EXPECT_EQ(run("select --data " + path("missing.json") + " --metric tfd --trace " +
                path("t.csv"))
                .status,
            1);
  // rlfdc without a model is a construction error.
  ASSERT_EQ(run("bench --faults 1 --seed 8 --out " + path("d")).status, 0);
  EXPECT_EQ(run("select --data " + path("d/fault_000.json") + " --metric rlfdc --trace " +
                path("t.csv"))
                .status,
            1);
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run("--help").status, 0); }

}  // namespace
