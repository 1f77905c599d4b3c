#include <gtest/gtest.h>

#include <sstream>

#include "roboinspect/cli.hpp"
#include "test_support.hpp"

using namespace roboinspect;
using roboinspect::testing::scratch_dir;
using roboinspect::testing::slurp;
using roboinspect::testing::source_dir;
using roboinspect::testing::spit;

namespace {

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "inspect");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string config(const char* name) { return (source_dir() / "configs" / name).string(); }

std::string strip_timing(const std::string& jsonl) {
  std::istringstream in(jsonl);
  std::string line, out;
  while (std::getline(in, line)) out += roboinspect::testing::without_timing(TrialRecord::from_json(json::parse(line))) + "\n";
  return out;
}

}  // namespace

TEST(Cli, HelpMatchesSnapshot) {
  auto r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, slurp(source_dir() / "tests" / "cli_help.txt"));
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"report", "--bogus"}).code, 2);
  EXPECT_EQ(cli({"report"}).code, 2);
  EXPECT_EQ(cli({"report", "--records", "x", "--format", "xml"}).code, 2);
  EXPECT_EQ(cli({"classify", "-", "--task", "Grasp"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
}

TEST(Cli, DomainErrorsExitOne) {
  auto r = cli({"report", "--records", "/nonexistent/records.jsonl"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("inspect: "), std::string::npos);
  EXPECT_EQ(cli({"run", "--config", "/nonexistent.json"}).code, 1);
}

TEST(Cli, ParseNonsenseIsAResultNotAnError) {
  auto dir = scratch_dir("cli-parse");
  spit(dir / "c.txt", "Sure! Here is the code.\nimport numpy as np\n");
  auto r = cli({"parse", (dir / "c.txt").string()});
  EXPECT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["kind"], "NonsenseRejection");
}

TEST(Cli, VersionAndSchema) {
  auto v = json::parse(cli({"--version"}).out);
  EXPECT_EQ(v["name"], "roboinspect");
  EXPECT_EQ(v["record_schema"], kRecordSchema);
  auto s = json::parse(cli({"--schema"}).out);
  EXPECT_EQ(s, record_json_schema());
}

TEST(Cli, RunTwiceIsIdenticalModuloTiming) {
  auto dir = scratch_dir("cli-run");
  auto a = (dir / "a.jsonl").string(), b = (dir / "b.jsonl").string();
  ASSERT_EQ(cli({"run", "--config", config("mock-default.json"), "--trials", "3", "--seed", "9", "--out", a}).code, 0);
  auto r = cli({"run", "--config", config("mock-default.json"), "--trials", "3", "--seed", "9", "--concurrency", "3"});
  ASSERT_EQ(r.code, 0);
  spit(b, r.out);
  EXPECT_EQ(strip_timing(slurp(a)), strip_timing(r.out));
  EXPECT_NE(r.err.find("72 trials"), std::string::npos);

  auto rep = cli({"report", "--records", a, "--format", "csv"});
  ASSERT_EQ(rep.code, 0);
  EXPECT_EQ(parse_csv(rep.out).size(), 24u);
}

TEST(Cli, ReportWithBaselineAddsPairedSection) {
  auto dir = scratch_dir("cli-paired");
  auto with = (dir / "with.jsonl").string(), without = (dir / "without.jsonl").string();
  ASSERT_EQ(cli({"run", "--config", config("mock-weak.json"), "--trials", "4", "--out", with}).code, 0);
  ASSERT_EQ(cli({"run", "--config", config("mock-weak.json"), "--trials", "4", "--no-feedback", "--out", without}).code, 0);
  auto md = cli({"report", "--records", with, "--baseline", without});
  ASSERT_EQ(md.code, 0);
  EXPECT_NE(md.out.find("## Feedback (paired)"), std::string::npos);
  auto js = json::parse(cli({"report", "--records", with, "--baseline", without, "--format", "json"}).out);
  EXPECT_EQ(js["paired"].size(), 8u);
}

TEST(Cli, ReconcileSummaryLine) {
  auto r = cli({"reconcile"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("/168 cells within 0.01"), std::string::npos);
  auto j = json::parse(cli({"reconcile", "--format", "json"}).out);
  EXPECT_EQ(j["cells"], 168);
  EXPECT_GE(j["fraction_within"].get<double>(), 0.95);
}

TEST(Cli, ClassifyRawCompletion) {
  auto dir = scratch_dir("cli-classify");
  const auto& h = roboinspect::testing::harness();
  spit(dir / "golden.txt", h.simulator().catalog().golden_text("PutRubbishInBin"));
  auto r = cli({"classify", (dir / "golden.txt").string(), "--task", "PutRubbishInBin", "--level", "P", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["outcome"]["kind"], "Success");
  EXPECT_EQ(cli({"classify", (dir / "golden.txt").string(), "--task", "Nope", "--level", "A"}).code, 1);
}

TEST(Cli, ClassifyAndReplayRecords) {
  auto dir = scratch_dir("cli-replay");
  auto recs = (dir / "r.jsonl").string();
  ASSERT_EQ(cli({"run", "--config", config("mock-weak.json"), "--trials", "2", "--out", recs}).code, 0);
  auto c = cli({"classify", recs, "--config", config("mock-weak.json")});
  ASSERT_EQ(c.code, 0) << c.err;
  std::istringstream in(c.out);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    EXPECT_TRUE(json::parse(line)["matches_record"].get<bool>()) << line;
    ++n;
  }
  EXPECT_EQ(n, 48);
  auto one = cli({"classify", recs, "--config", config("mock-weak.json"), "--line", "5"});
  EXPECT_EQ(json::parse(one.out)["line"], 5);

  auto r = cli({"replay", recs, "--config", config("mock-weak.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.find("MISMATCH"), std::string::npos);
  EXPECT_NE(r.out.find("  step 1 ee "), std::string::npos);
  EXPECT_EQ(cli({"replay", recs, "--line", "999"}).code, 1);
}
