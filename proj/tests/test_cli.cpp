#include "../tools/run_support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("bplan_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Outcome run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" + BPLAN_EXE + "' " + args + " 2>stderr.txt";
    Outcome r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
  }

  json read_json(const std::string& name) const { return json::parse(bplan::read_file(path(name))); }

  fs::path dir_;
};

const std::string kPlan = std::string(BEHAVIORPLAN_SOURCE_DIR) + "/data/examples/two_step_plan.json";

}  // namespace

TEST(RunSupport, Sha256KnownAnswers) {
  EXPECT_EQ(bplan::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(bplan::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--version").code, 0);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("generate --bogus").code, 2);
  EXPECT_EQ(run("generate --summary walk --C abc --out m.jsonl").code, 2);
  EXPECT_EQ(run("generate --out m.jsonl").code, 2);
  EXPECT_EQ(run("generate --summary 'fly away' --out m.jsonl").code, 1);
  EXPECT_EQ(run("validate --motion missing.jsonl").code, 1);
  EXPECT_EQ(run("parse '" + kPlan + "'").code, 0);
  EXPECT_FALSE(fs::exists(path("m.jsonl")));
}

TEST_F(Cli, ParseFlagsBrokenPlanUnlessLenient) {
  std::FILE* f = std::fopen(path("bad.json").c_str(), "w");
  std::fputs(R"({"summary":"s","description":"d","steps":[{"keyframe":"The person flaps.","transition":""}]})", f);
  std::fclose(f);
  EXPECT_EQ(run("parse bad.json").code, 1);
  EXPECT_EQ(run("parse bad.json --lenient").code, 0);
  EXPECT_NE(bplan::read_file(path("stderr.txt")).find("step[0].keyframe["), std::string::npos);
}

TEST_F(Cli, GenerateIsIndependentOfJobs) {
  const std::string base = "generate --summary 'walk forward' --repetitions 3 --C 12 --seed 5 --perturbation 0.01";
  ASSERT_EQ(run(base + " --jobs 1 --out a.jsonl").code, 0);
  ASSERT_EQ(run(base + " --jobs 8 --out b.jsonl").code, 0);
  EXPECT_EQ(bplan::read_file(path("a.jsonl")), bplan::read_file(path("b.jsonl")));
}

TEST_F(Cli, FlagBeatsConfigBeatsDefault) {
  std::FILE* f = std::fopen(path("cfg.json").c_str(), "w");
  std::fputs(R"({"C": 5, "summary": "walk", "repetitions": 1})", f);
  std::fclose(f);
  // walk with one repetition has 3 keyframes and 2 gaps.
  ASSERT_EQ(run("generate --config cfg.json --out a.jsonl").code, 0);
  EXPECT_EQ(read_json("a.jsonl.report.json")["frames"], 2 * 5 + 3);
  ASSERT_EQ(run("generate --config cfg.json --C 7 --out b.jsonl").code, 0);
  EXPECT_EQ(read_json("b.jsonl.report.json")["frames"], 2 * 7 + 3);
  ASSERT_EQ(run("generate --summary walk --repetitions 1 --out c.jsonl").code, 0);
  EXPECT_EQ(read_json("c.jsonl.report.json")["frames"], 2 * 30 + 3);
  const json m = read_json("b.jsonl.manifest.json");
  EXPECT_EQ(m["config"]["C"], 7);
  EXPECT_EQ(m["config"]["summary"], "walk");
}

TEST_F(Cli, UnknownConfigKeyForPipelineIsRejected) {
  std::FILE* f = std::fopen(path("cfg.json").c_str(), "w");
  std::fputs(R"({"weights": {"nonsense": 1}})", f);
  std::fclose(f);
  EXPECT_EQ(run("generate --config cfg.json --summary stand --out a.jsonl").code, 1);
}

TEST_F(Cli, ManifestRecordsInputDigestsAndOutputs) {
  ASSERT_EQ(run("generate --planner file --plan '" + kPlan + "' --C 4 --out m.jsonl").code, 0);
  const json m = read_json("m.jsonl.manifest.json");
  EXPECT_EQ(m["command"], "generate");
  EXPECT_EQ(m["version"], BEHAVIORPLAN_VERSION);
  ASSERT_EQ(m["inputs"].size(), 1u);
  const std::string bytes = bplan::read_file(kPlan);
  EXPECT_EQ(m["inputs"][0]["sha256"], bplan::sha256_hex(bytes));
  EXPECT_EQ(m["inputs"][0]["bytes"], bytes.size());
  EXPECT_EQ(m["outputs"], json::array({"m.jsonl", "m.jsonl.report.json"}));
  EXPECT_FALSE(m["stages"].empty());
  for (const auto& e : fs::directory_iterator(dir_))
    EXPECT_EQ(e.path().string().find(".tmp."), std::string::npos) << e.path();
}

TEST_F(Cli, SkeletonFromEnvironmentAndFlag) {
  const std::string skel = std::string(BEHAVIORPLAN_SOURCE_DIR) + "/data/skeleton.json";
  ASSERT_EQ(run("generate --summary stand --C 2 --out m.jsonl").code, 0);
  EXPECT_EQ(run("export --motion m.jsonl --out a.csv", "BEHAVIORPLAN_SKELETON='" + skel + "'").code, 0);
  EXPECT_EQ(run("export --motion m.jsonl --out b.csv", "BEHAVIORPLAN_SKELETON=missing.json").code, 1);
  EXPECT_EQ(run("export --motion m.jsonl --out c.csv --skeleton '" + skel + "'",
                "BEHAVIORPLAN_SKELETON=missing.json").code, 0);
  const json m = read_json("a.csv.manifest.json");
  ASSERT_EQ(m["inputs"].size(), 2u);
  const bool recorded = m["inputs"][0]["path"] == skel || m["inputs"][1]["path"] == skel;
  EXPECT_TRUE(recorded);
  EXPECT_EQ(bplan::read_file(path("a.csv")), bplan::read_file(path("c.csv")));
}

TEST_F(Cli, ExportWritesOneRowPerFrame) {
  ASSERT_EQ(run("generate --summary stand --C 3 --out m.jsonl").code, 0);
  ASSERT_EQ(run("export --motion m.jsonl --out m.csv").code, 0);
  const std::string csv = bplan::read_file(path("m.csv"));
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  EXPECT_EQ(lines, 1 + (3 + 2));
  EXPECT_EQ(csv.rfind("frame,t,", 0), 0u);
}

TEST_F(Cli, ValidateSignalsConstraintViolation) {
  ASSERT_EQ(run("generate --summary stand --C 3 --out m.jsonl").code, 0);
  EXPECT_EQ(run("validate --motion m.jsonl").code, 0);
  EXPECT_EQ(run("validate --motion m.jsonl --weights '{\"eps_M\": -1}'").code, 1);
}

TEST_F(Cli, SolvePoseRoundTripsThroughInit) {
  const Outcome a = run("solve-pose --text 'The left knee is slightly bent.' --out p.json");
  ASSERT_EQ(a.code, 0);
  const json p = read_json("p.json");
  EXPECT_TRUE(p["converged"].get<bool>());
  const Outcome b = run("solve-pose --text 'The left knee is slightly bent.' --init p.json");
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(json::parse(b.out)["sweeps"], 0);
}

TEST_F(Cli, PlanThenGenerateFromFile) {
  ASSERT_EQ(run("plan --summary squat --repetitions 1 --out plan.json").code, 0);
  EXPECT_EQ(read_json("plan.json")["steps"].size(), 3u);
  EXPECT_EQ(run("generate --planner file --plan plan.json --C 6 --out m.jsonl").code, 0);
  EXPECT_EQ(read_json("m.jsonl.report.json")["frames"], 2 * 6 + 3);
}

TEST_F(Cli, MetricsOverDirectory) {
  fs::create_directories(path("motions"));
  ASSERT_EQ(run("generate --summary stand --C 3 --out motions/a.jsonl").code, 0);
  ASSERT_EQ(run("generate --summary walk --repetitions 1 --C 3 --out motions/b.jsonl").code, 0);
  ASSERT_EQ(run("metrics --motions motions --report r.json").code, 0);
  const json r = read_json("r.json");
  EXPECT_EQ(r["count"], 2);
  EXPECT_EQ(run("metrics --motions motions --report r.json --skate_mode bogus").code, 2);
}
