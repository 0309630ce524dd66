// Copyright 2026 The AXIMS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#ifndef AXIMS_CLI_PATH
#error "AXIMS_CLI_PATH must point at the axims executable"
#endif

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string output;  // stdout and stderr together
};

CliRun run(const std::string& args, const fs::path& cwd) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" AXIMS_CLI_PATH "' " + args + " 2>&1";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (const std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.output.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// One scratch directory per test binary, with a small corpus generated once.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("axims_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "mix.txt") << "# small mix\nAwlenOverflow = 40\nAwsizeInvalid = 30\n";
    const CliRun g = run("gen --normal 800 --attack-mix mix.txt -o d", dir_);
    ASSERT_EQ(g.code, 0) << g.output;
    const CliRun p = run("preprocess -i d/dataset.csv -o d", dir_);
    ASSERT_EQ(p.code, 0) << p.output;
    const CliRun q = run("quantize -i d/features.csv --epochs 10 -o d/q.json", dir_);
    ASSERT_EQ(q.code, 0) << q.output;
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static fs::path dir_;
};

fs::path Cli::dir_;

TEST_F(Cli, GenWritesAllArtifacts) {
  for (const char* f : {"dataset.csv", "trace.vcd", "trace.raw"}) EXPECT_TRUE(fs::exists(dir_ / "d" / f)) << f;
  const CliRun r = run("gen --normal 10 --attack-mix none -o tiny", dir_);
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("malicious 0"), std::string::npos) << r.output;
}

TEST_F(Cli, SeedMayFollowTheSubcommand) {
  const CliRun a = run("--seed 7 gen --normal 50 --attack-mix none -o s1", dir_);
  const CliRun b = run("gen --normal 50 --attack-mix none -o s2 --seed 7", dir_);
  const CliRun c = run("gen --normal 50 --attack-mix none -o s3 --seed 8", dir_);
  ASSERT_EQ(a.code, 0) << a.output;
  ASSERT_EQ(b.code, 0) << b.output;
  ASSERT_EQ(c.code, 0) << c.output;
  EXPECT_EQ(slurp(dir_ / "s1/dataset.csv"), slurp(dir_ / "s2/dataset.csv"));
  EXPECT_NE(slurp(dir_ / "s1/dataset.csv"), slurp(dir_ / "s3/dataset.csv"));
}

TEST_F(Cli, PreprocessPrintsTheReductionTable) {
  const CliRun r = run("preprocess -i d/dataset.csv -o p", dir_);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("Raw captured features"), std::string::npos);
  EXPECT_NE(r.output.find("Post-correlation analysis"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "p/transform.json"));
}

TEST_F(Cli, TrainAndEval) {
  const CliRun t = run("train -i d/features.csv --epochs 5 -o d/f.json", dir_);
  ASSERT_EQ(t.code, 0) << t.output;
  const CliRun e = run("eval --model d/q.json -i d/features.csv --json d/e.json", dir_);
  ASSERT_EQ(e.code, 0) << e.output;
  const auto j = nlohmann::json::parse(slurp(dir_ / "d/e.json"));
  EXPECT_TRUE(j.contains("accuracy"));
  const CliRun f = run("eval --model d/f.json -i d/features.csv", dir_);
  EXPECT_EQ(f.code, 0) << f.output;
}

TEST_F(Cli, MonitorWritesJsonLines) {
  const CliRun r = run("monitor --transform d/transform.json --model d/q.json --cycles 5000 --attack-mix mix.txt -o v.jsonl",
                    dir_);
  ASSERT_EQ(r.code, 0) << r.output;
  std::ifstream is(dir_ / "v.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);
    ASSERT_EQ(j["sample_index"].get<std::size_t>(), n);
    ASSERT_TRUE(j["decision"] == "malicious" || j["decision"] == "normal");
    ++n;
  }
  EXPECT_GT(n, 0u);
}

TEST_F(Cli, BenchWritesCsv) {
  const CliRun r = run("bench --transform d/transform.json --model d/q.json --duration 2000 --loads 25,50 --reps 1 -o b.csv",
                    dir_);
  ASSERT_EQ(r.code, 0) << r.output;
  std::istringstream is(slurp(dir_ / "b.csv"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) ++n;
  EXPECT_EQ(n, 3u);
}

TEST_F(Cli, CorruptCsvIsAnInputError) {
  std::string csv = slurp(dir_ / "d/dataset.csv");
  std::istringstream is(csv);
  std::ostringstream out;
  std::string line;
  for (int i = 1; std::getline(is, line) && i <= 10; ++i) out << (i == 4 ? "1,2,three" : line) << '\n';
  std::ofstream(dir_ / "bad.csv") << out.str();
  const CliRun r = run("preprocess -i bad.csv -o bad", dir_);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("line 4"), std::string::npos) << r.output;
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--help", dir_).code, 0);
  EXPECT_EQ(run("", dir_).code, 2);
  EXPECT_EQ(run("gen --no-such-flag", dir_).code, 2);
  EXPECT_EQ(run("gen --normal 0 -o z", dir_).code, 2);
  EXPECT_EQ(run("gen --attack-mix missing.txt -o z", dir_).code, 1);
  EXPECT_EQ(run("quantize -i d/features.csv --fmt 8,9 -o z.json", dir_).code, 2);
  EXPECT_EQ(run("train -i nowhere.csv", dir_).code, 1);
  std::ofstream(dir_ / "badmix.txt") << "Nonsense = 3\n";
  const CliRun m = run("gen --attack-mix badmix.txt -o z", dir_);
  EXPECT_EQ(m.code, 2);
  EXPECT_NE(m.output.find("badmix.txt:1"), std::string::npos) << m.output;
}

}  // namespace
