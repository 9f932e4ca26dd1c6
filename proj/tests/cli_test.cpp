// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(POISREC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("poisrec_cli_test_" + name);
}

TEST(Cli, UnknownSuiteExitsWithUsageErrorAndWritesNothing) {
  const auto out = temp_file("unknown.csv");
  fs::remove(out);
  EXPECT_EQ(run_cli("verify nonsense --out " + out.string()), 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, MissingSubcommandAndBadFlagsAreUsageErrors) {
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("verify"), 2);
  EXPECT_EQ(run_cli("trace --lambda -3 --out /tmp/x.csv"), 2);
  EXPECT_EQ(run_cli("verify stirling --format yaml"), 2);
}

TEST(Cli, TraceIsDeterministicAcrossRuns) {
  const auto a = temp_file("trace_a.csv");
  const auto b = temp_file("trace_b.csv");
  const std::string args = "trace --lambda 1 --horizon 20 --seed 9 --grid 64";
  ASSERT_EQ(run_cli(args + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli(args + " --out " + b.string()), 0);
  const auto text = slurp(a);
  EXPECT_EQ(text, slurp(b));
  EXPECT_EQ(text.rfind("s,N,I_next,C,W\n", 0), 0u);
}

TEST(Cli, UnwritableOutputIsAnIoError) {
  EXPECT_EQ(run_cli("trace --horizon 1 --out /nonexistent-dir/x.csv"), 3);
  EXPECT_EQ(run_cli("verify stirling --reps 100 --out /nonexistent-dir/x.csv"), 3);
}

TEST(Cli, PassingSuiteExitsZeroAndFailingSuiteExitsOne) {
  const auto out = temp_file("stirling.csv");
  EXPECT_EQ(run_cli("verify stirling --reps 5000 --seed 3 --out " + out.string()),
            0);
  EXPECT_TRUE(fs::exists(out));
  // two replicates cannot approximate the law of A_6 to 1% total variation
  EXPECT_EQ(run_cli("verify stirling --reps 2 --seed 3 --out " + out.string()),
            1);
}

TEST(Cli, JsonReportParsesAndCarriesTheConfig) {
  const auto out = temp_file("report.json");
  ASSERT_EQ(run_cli("verify perpetuity --reps 5000 --seed 4 --format json --out " +
                    out.string()),
            0);
  const auto doc = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(doc.at("config").at("suite"), "perpetuity");
  EXPECT_EQ(doc.at("config").at("seed"), 4);
  EXPECT_GE(doc.at("results").size(), 2u);
  for (const auto& row : doc.at("results")) EXPECT_TRUE(row.at("pass").get<bool>());
}

TEST(Cli, WorkerCountLeavesReportBytesUnchanged) {
  const auto serial = temp_file("workers1.csv");
  const auto parallel = temp_file("workers4.csv");
  const std::string args = "verify indicators --reps 20000 --seed 11";
  ASSERT_EQ(run_cli(args + " --workers 1 --out " + serial.string()), 0);
  ASSERT_EQ(run_cli(args + " --workers 4 --out " + parallel.string()), 0);
  EXPECT_EQ(slurp(serial), slurp(parallel));
}

TEST(Cli, ConfigFileProvidesDefaultsAndFlagsWin) {
  const auto config = temp_file("config.json");
  const auto from_config = temp_file("from_config.csv");
  const auto overridden = temp_file("overridden.csv");
  {
    std::ofstream out(config);
    out << R"({"replicates": 4000, "seed": 17, "format": "csv"})";
  }
  ASSERT_EQ(run_cli("verify indicators --config " + config.string() + " --out " +
                    from_config.string()),
            0);
  const auto text = slurp(from_config);
  EXPECT_NE(text.find("# replicates=4000\n"), std::string::npos);
  EXPECT_NE(text.find("# seed=17\n"), std::string::npos);

  ASSERT_EQ(run_cli("verify indicators --config " + config.string() +
                    " --seed 23 --out " + overridden.string()),
            0);
  EXPECT_NE(slurp(overridden).find("# seed=23\n"), std::string::npos);

  EXPECT_EQ(run_cli("verify indicators --config /nonexistent.json"), 2);
  {
    std::ofstream out(config);
    out << "{not json";
  }
  EXPECT_EQ(run_cli("verify indicators --config " + config.string()), 2);
}

TEST(Cli, RescaledEmitsPerReplicateGrid) {
  const auto out = temp_file("rescaled.csv");
  ASSERT_EQ(run_cli("rescaled --scale 4 --reps 3 --grid 17 --seed 2 --out " +
                    out.string()),
            0);
  const auto text = slurp(out);
  EXPECT_EQ(text.rfind("rep,t,c_tilde,w_tilde\n", 0), 0u);
  // 3 replicates x 17 grid points + header
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3 * 17 + 1);
}

}  // namespace
