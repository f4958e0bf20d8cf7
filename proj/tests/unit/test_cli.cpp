#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mora_cli/cli.hpp"
#include "mora_cli/instance_json.hpp"
#include "mora_cli/verify.hpp"

namespace fs = std::filesystem;
using namespace mora;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result mora_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mora");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mora_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

const std::vector<std::string> kTwoUsers{
    "--set", "layout.rings=0",        "--set", "operators.count=2",   "--set", "users.density=0.6667",
    "--set", "mobility.model=static", "--set", "events.arrival_rate=0", "--set", "sim.duration=5"};

std::vector<std::string> with(std::vector<std::string> base, const std::vector<std::string>& more) {
  base.insert(base.end(), more.begin(), more.end());
  return base;
}

}  // namespace

TEST(FormatNumber, NineSignificantDigits) {
  EXPECT_EQ(cli::format_number(1.0), "1");
  EXPECT_EQ(cli::format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(cli::format_number(123456789012.0), "1.23456789e+11");
  EXPECT_EQ(cli::format_number(-0.0), "0");
  EXPECT_EQ(cli::format_number(NAN), "nan");
  EXPECT_EQ(cli::format_number(INFINITY), "inf");
}

TEST_F(TempDir, CsvHeaderAndQuoting) {
  Table t{{"a", "b"}, {{1.5, std::string("x,y")}}, true};
  cli::write_csv(path("t.csv"), t);
  EXPECT_EQ(slurp(path("t.csv")), "# schema=1\na,b\n1.5,\"x,y\"\n");
  EXPECT_THROW(cli::write_csv(dir_ / "missing" / "t.csv", t), ConfigError);
}

TEST_F(TempDir, RunMatchesLibraryAtNineDigits) {
  const auto r = mora_cli(with(kTwoUsers, {"--policy", "brute", "--seed", "4", "--out", path("o")}));
  ASSERT_EQ(r.code, 0) << r.err;

  ScenarioConfig c;
  for (std::size_t i = 1; i < kTwoUsers.size(); i += 2) apply_override(c, kTwoUsers[i]);
  c.seed = 4;
  c.policy = "brute";
  const auto rec = run_scenario(c, Policy::brute);
  const std::string summary = slurp(path("o/summary.csv"));
  EXPECT_EQ(summary.rfind("# schema=1\npolicy,seed,mean_W,mean_U_0,mean_U_1,total_reassociations,snapshots\n", 0), 0u)
      << summary;
  EXPECT_NE(summary.find("brute,4," + cli::format_number(rec.mean_utility) + ","), std::string::npos) << summary;

  const std::string metrics = slurp(path("o/metrics.csv"));
  EXPECT_EQ(metrics.rfind("# schema=1\ntime_s,W,U_0,U_1,users,outage,reassociations,idle_operator\n", 0), 0u);
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 2 + static_cast<long>(rec.snapshots.size()));
}

TEST_F(TempDir, RepeatedRunsAreByteIdentical) {
  const auto args = [&](const std::string& d) {
    return std::vector<std::string>{"--set", "layout.rings=0", "--set", "sim.duration=20", "--out", path(d)};
  };
  ASSERT_EQ(mora_cli(args("a")).code, 0);
  ASSERT_EQ(mora_cli(args("b")).code, 0);
  EXPECT_EQ(slurp(path("a/metrics.csv")), slurp(path("b/metrics.csv")));
  EXPECT_EQ(slurp(path("a/summary.csv")), slurp(path("b/summary.csv")));
}

TEST_F(TempDir, ConfigFileAndOverridesCombine) {
  std::ofstream(path("s.cfg")) << "# small\nlayout.rings = 0\nsim.duration = 8\n";
  const auto r = mora_cli({"--config", path("s.cfg"), "--set", "sim.duration=4", "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("over 5 snapshots"), std::string::npos) << r.out;
}

TEST_F(TempDir, ExitCodes) {
  EXPECT_EQ(mora_cli({"--help"}).code, 0);
  EXPECT_EQ(mora_cli({"--bogus"}).code, 2);
  EXPECT_EQ(mora_cli({"--set", "no.such.key=1", "--out", path("o")}).code, 2);
  EXPECT_EQ(mora_cli({"--policy", "oracle", "--out", path("o")}).code, 2);
  EXPECT_EQ(mora_cli({"--config", path("absent.cfg")}).code, 2);

  std::ofstream(path("file")) << "x";
  EXPECT_EQ(mora_cli({"--set", "layout.rings=0", "--out", path("file")}).code, 2);

  const auto guard = mora_cli({"--set", "layout.rings=0", "--set", "users.density=10", "--set",
                               "sim.duration=2", "--policy", "brute", "--out", path("o")});
  EXPECT_EQ(guard.code, 3);
  EXPECT_NE(guard.err.find("guard"), std::string::npos);

  EXPECT_EQ(mora_cli({"--experiment", "fig99", "--out", path("o")}).code, 2);
  EXPECT_EQ(mora_cli({"--experiment", "fig1", "--verify", "all"}).code, 2);
  EXPECT_EQ(mora_cli({"--self-test"}).code, 2);
}

TEST_F(TempDir, PaperScaleNeedsConfirmation) {
  const auto r = mora_cli({"--experiment", "fig4", "--scale", "paper", "--out", path("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--confirm-long"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("o/fig4.csv")));
}

TEST_F(TempDir, ExperimentWritesTable) {
  const auto r = mora_cli({"--experiment", "fig5", "--replications", "2", "--out", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("o/fig5.csv"));
  EXPECT_EQ(csv.rfind("# schema=1\ns_o,n_o_per_b,delta_measured,delta_eq8\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
}

TEST_F(TempDir, VerifyPassesAndSelfTestIsCaught) {
  const auto ok = mora_cli({"--verify", "all", "--instances", "30", "--out", path("v")});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_FALSE(fs::exists(path("v/counterexample.json")));

  const auto bad = mora_cli({"--verify", "theorems", "--instances", "30", "--self-test", "--out", path("s")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("FAIL allocation_sums"), std::string::npos) << bad.out;
  ASSERT_TRUE(fs::exists(path("s/counterexample.json")));

  // The corruption lives in the allocation, not the instance, so the
  // replayed instance is clean.
  const auto replay = mora_cli({"--replay", path("s/counterexample.json")});
  EXPECT_EQ(replay.code, 0) << replay.out;

  std::ofstream(path("junk.json")) << "{\"suite\": 3}";
  EXPECT_EQ(mora_cli({"--replay", path("junk.json")}).code, 2);
}

TEST(CounterexampleJson, RoundTrip) {
  std::mt19937_64 rng(5);
  NetworkState state = cli::random_instance(rng, 6, 3, 2);
  Association x = distributed_greedy(state, Association{}, SolverParams{}).final_association;
  const cli::Counterexample c{.suite = "oracle",
                              .property = "pareto",
                              .seed = 9,
                              .instance = 3,
                              .detail = "d",
                              .state = std::move(state),
                              .association = std::move(x)};
  const auto back = cli::counterexample_from_json(cli::counterexample_to_json(c));
  EXPECT_EQ(back.property, c.property);
  EXPECT_EQ(back.seed, c.seed);
  ASSERT_EQ(back.state.num_users(), c.state.num_users());
  for (std::size_t u = 0; u < c.state.num_users(); ++u) {
    EXPECT_EQ(back.association[u], c.association[u]);
    for (std::uint32_t b = 0; b < c.state.num_stations(); ++b) {
      EXPECT_EQ(back.state.rate(u, StationId{b}), c.state.rate(u, StationId{b}));
    }
  }
  EXPECT_FALSE(cli::recheck("pareto", back.state, back.association).has_value());
}
