/*
 * Copyright 2026 The pgossip Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "pgossip/io.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell; `redirect` selects which streams are kept.
Result cli(const std::string& args, const std::string& redirect = "2>&1") {
  const std::string cmd = std::string("'") + PGOSSIP_CLI + "' " + args + " " + redirect;
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string golden(const std::string& name) { return std::string(PGOSSIP_GOLDEN_DIR) + "/" + name; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pgossip-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, RunTextMatchesReferenceTable) {
  const auto r = cli("run --n 4", "2>/dev/null");
  ASSERT_EQ(r.code, 0);
  std::ifstream fixture(golden("identity_n4.txt"));
  EXPECT_EQ(pgossip::io::parse_text(r.out).grid, pgossip::io::parse_text(fixture).grid);
  EXPECT_NE(r.out.find("# lambda=18 mu=2.22 epsilon=44.44%"), std::string::npos);
}

TEST_F(CliTest, RunOptimizedCaption) {
  const auto r = cli("run --n 7 --strategy identity --optimize");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("# lambda=19 mu=5.89 epsilon=73.68%"), std::string::npos);
}

TEST_F(CliTest, RunCustomPermutations) {
  const auto r = cli("run --strategy custom:'" + golden("random_n5.perm") + "'");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("# lambda=24 mu=2.50 epsilon=41.67%"), std::string::npos);
  EXPECT_EQ(cli("run --n 4 --strategy custom:'" + golden("random_n5.perm") + "'").code, 2);
  EXPECT_EQ(cli("run --strategy custom:/nonexistent/file").code, 2);
}

TEST_F(CliTest, RunBadCustomPermutationsExitTwo) {
  std::ofstream(path("bad.perm")) << "0: 1,2\n1: 0,2\n2: 0,0\n";
  const auto r = cli("run --strategy custom:" + path("bad.perm"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("duplicate"), std::string::npos);
}

TEST_F(CliTest, RunSessionsReportsThroughput) {
  const auto r = cli("run --n 4 --strategy pipelined --sessions 10");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("# lambda=102"), std::string::npos);
  EXPECT_NE(r.out.find("steps_per_gossip=2.00"), std::string::npos);
}

TEST_F(CliTest, RunFormatsToFiles) {
  ASSERT_EQ(cli("run --n 3 --format csv --out " + path("t.csv")).code, 0);
  EXPECT_EQ(slurp(path("t.csv")).rfind("id,1,2,", 0), 0u);

  ASSERT_EQ(cli("run --n 3 --strategy random --seed 4 --format json --out " + path("t.json")).code, 0);
  const auto j = nlohmann::json::parse(slurp(path("t.json")));
  EXPECT_EQ(j.at("n"), 3);
  EXPECT_TRUE(j.at("metrics").contains("epsilon"));

  ASSERT_EQ(cli("run --n 1 --format pgm --out " + path("t.pgm")).code, 0);
  const std::string expect = std::string("P5\n2 2\n255\n") + '\0' + '\x80' + '\x80' + '\0';
  EXPECT_EQ(slurp(path("t.pgm")), expect);
}

TEST_F(CliTest, RandomRunsAreReproducible) {
  const auto a = cli("run --n 9 --strategy random --seed 77", "2>/dev/null");
  const auto b = cli("run --n 9 --strategy random --seed 77", "2>/dev/null");
  const auto c = cli("run --n 9 --strategy random --seed 78", "2>/dev/null");
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  const auto zero = cli("run --n 0");
  EXPECT_EQ(zero.code, 2);
  EXPECT_NE(zero.out.find("n must be"), std::string::npos);
  EXPECT_EQ(cli("run").code, 2);
  EXPECT_EQ(cli("run --n 3 --bogus").code, 2);
  EXPECT_EQ(cli("run --n 3 --strategy spiral").code, 2);
  EXPECT_EQ(cli("run --n 3 --format gif").code, 2);
  EXPECT_EQ(cli("run --n 3 --format pgm").code, 2);
  EXPECT_EQ(cli("run --n 3 --sessions 0").code, 2);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("sweep --n-min 5 --n-max 2").code, 2);
  EXPECT_EQ(cli("sweep --n-min 1").code, 2);
}

TEST_F(CliTest, HelpExitsZero) {
  const auto r = cli("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("run"), std::string::npos);
  EXPECT_EQ(cli("run --help").code, 0);
}

TEST_F(CliTest, RunawayExitsThreeWithPartialTable) {
  const auto r = cli("run --n 3 --max-steps 2");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("partial run-table written to"), std::string::npos);
}

TEST_F(CliTest, UnwritableOutputExitsFour) {
  EXPECT_EQ(cli("run --n 3 --out " + path("missing/dir/t.txt")).code, 4);
  EXPECT_EQ(cli("sweep --n-min 1 --n-max 2 --out " + path("missing/dir/s.csv")).code, 4);
}

TEST_F(CliTest, SweepCsv) {
  const auto r = cli("sweep --strategy random --n-min 2 --n-max 4 --seeds 2,1", "2>/dev/null");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "strategy,n,seed,lambda,mu,epsilon");
  EXPECT_EQ(lines[1].rfind("random,2,1,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("random,2,2,", 0), 0u);

  const auto opt = cli("sweep --strategy identity --optimize --n-min 7 --n-max 7", "2>/dev/null");
  EXPECT_NE(opt.out.find("identity+opt,7,,19,5.894737,0.736842"), std::string::npos);
}

TEST_F(CliTest, ValidatePasses) {
  const auto r = cli("validate --n-max 30 --golden --fixtures '" + std::string(PGOSSIP_GOLDEN_DIR) + "'");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("0 mismatches"), std::string::npos);
  EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
}

TEST_F(CliTest, ValidateFailsOnMissingFixtures) {
  const auto r = cli("validate --n-max 5 --golden --fixtures " + path("nothing"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("CHECKS FAILED"), std::string::npos);
}

TEST_F(CliTest, ValidateFailsOnWrongFixture) {
  fs::copy(PGOSSIP_GOLDEN_DIR, dir_ / "golden");
  {
    std::ofstream out(dir_ / "golden" / "identity_n4.txt");
    out << "# run-table n=1 sessions=1\n# lambda=2 mu=2.00 epsilon=100.00%\n# nu=2,2\n"
        << "0: S1 R1\n1: R0 S0\n";
  }
  const auto r = cli("validate --n-max 2 --golden --fixtures " + (dir_ / "golden").string());
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, ConjectureIsReportOnly) {
  const auto r = cli("validate --n-max 20 --conjecture");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("not a proof"), std::string::npos);
  EXPECT_NE(r.out.find("pipelined: 20 points"), std::string::npos);
}

}  // namespace
