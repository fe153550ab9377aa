#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "gwsim/environment.hpp"
#include "gwsim/simulator.hpp"
#include "test_support.hpp"

namespace gwsim {
namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string strip_timing(const std::string& trace) {
    std::istringstream in(trace);
    std::string line, out;
    while (std::getline(in, line)) {
        auto doc = nlohmann::json::parse(line);
        if (doc.contains("summary")) {
            doc["summary"].erase("MTI");
        } else {
            doc.erase("ms");
        }
        out += doc.dump() + "\n";
    }
    return out;
}

class CliTest : public ::testing::Test {
protected:
    testing::TempDir dir;

    std::string make_env() {
        const auto path = (dir / "es20m5.env").string();
        const auto r = call({"gen-env", "--size", "20", "--magnitudes", "5", "--seed", "7", "--out", path});
        EXPECT_EQ(r.code, 0) << r.err;
        return path;
    }
};

TEST_F(CliTest, GenEnvWritesNamedEnvironment) {
    const auto path = make_env();
    ASSERT_TRUE(std::filesystem::exists(path));
    const auto loaded = load_environment(std::filesystem::path(path));
    EXPECT_EQ(loaded.environment.id(), "ES20M5");
    EXPECT_EQ(loaded.environment.size(), 20);
    EXPECT_EQ(loaded.profile.size(), 5u);
    // Same flags, same file.
    const auto again = (dir / "again.env").string();
    EXPECT_EQ(call({"gen-env", "--size", "20", "--magnitudes", "5", "--seed", "7", "--out", again}).code, 0);
    EXPECT_EQ(read_file(path), read_file(again));
}

TEST_F(CliTest, GenEnvHeatmap) {
    const auto heat = (dir / "heat.csv").string();
    const auto r = call({"gen-env", "--size", "6", "--magnitudes", "2", "--seed", "1", "--out",
                         (dir / "e.env").string(), "--heatmap", heat, "--heatmap-magnitude", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string text = read_file(heat);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
}

TEST_F(CliTest, GenEnvBadDimensionsIsUsageError) {
    EXPECT_EQ(call({"gen-env", "--size", "1", "--magnitudes", "5", "--seed", "1", "--out", (dir / "x").string()}).code,
              2);
}

TEST_F(CliTest, RunRejectsThresholdOrdering) {
    const auto env = make_env();
    const auto cfg = (dir / "bad.json").string();
    std::ofstream(cfg) << R"({"critical_threshold": 4.5, "risk_threshold": 4.5})";
    const auto r = call({"run", "--env", env, "--config", cfg, "--seed", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("critical_threshold"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("risk_threshold"), std::string::npos) << r.err;
}

TEST_F(CliTest, RunIsReproducible) {
    const auto env = make_env();
    const auto a = (dir / "a.jsonl").string();
    const auto b = (dir / "b.jsonl").string();
    ASSERT_EQ(call({"run", "--env", env, "--seed", "3", "--trace", a}).code, 0);
    ASSERT_EQ(call({"run", "--env", env, "--seed", "3", "--trace", b}).code, 0);
    EXPECT_EQ(strip_timing(read_file(a)), strip_timing(read_file(b)));
    EXPECT_FALSE(read_file(a).empty());
}

TEST_F(CliTest, RunRequiresSeed) {
    const auto env = make_env();
    EXPECT_EQ(call({"run", "--env", env}).code, 2);
}

TEST_F(CliTest, SnapshotResumeMatchesFullRun) {
    const auto env = make_env();
    const auto full = (dir / "full.jsonl").string();
    const auto snap = (dir / "snap.json").string();
    const auto rest = (dir / "rest.jsonl").string();
    ASSERT_EQ(call({"run", "--env", env, "--seed", "4", "--trace", full}).code, 0);
    ASSERT_EQ(call({"run", "--env", env, "--seed", "4", "--stop-after", "50", "--snapshot", snap}).code, 0);
    ASSERT_EQ(call({"run", "--env", env, "--resume", snap, "--trace", rest}).code, 0);
    EXPECT_EQ(strip_timing(read_file(full)), strip_timing(read_file(rest)));
}

TEST_F(CliTest, UnknownFlagIsUsageErrorWithHelp) {
    const auto r = call({"run", "--bogus", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--env"), std::string::npos);
    EXPECT_EQ(call({}).code, 2);
    EXPECT_EQ(call({"frobnicate"}).code, 2);
}

TEST_F(CliTest, HelpListsConfigKeysWithDefaults) {
    const auto r = call({"--help"});
    EXPECT_EQ(r.code, 0);
    for (const auto& k : config_keys()) {
        EXPECT_NE(r.out.find(k), std::string::npos) << k;
    }
    EXPECT_NE(r.out.find("risk_threshold = 4.5"), std::string::npos);
}

TEST_F(CliTest, SuiteSweepReport) {
    const auto spec = (dir / "spec.json").string();
    std::ofstream(spec) << R"({"sizes": [20], "magnitudes": [5, 20], "master_seed": 3,
                               "config": {"max_iterations": 40}})";
    const auto out = (dir / "suite").string();
    const auto s = call({"suite", "--spec", spec, "--out", out, "--jobs", "2"});
    ASSERT_EQ(s.code, 0) << s.err;
    for (const char* f : {"metrics.csv", "series.csv", "runs.jsonl"}) {
        EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(out) / f)) << f;
    }
    EXPECT_EQ(s.out, read_file(std::filesystem::path(out) / "metrics.csv"));

    const auto rep = call({"report", "--in", out, "--format", "csv"});
    ASSERT_EQ(rep.code, 0) << rep.err;
    EXPECT_EQ(rep.out, s.out);
    EXPECT_EQ(call({"report", "--in", out, "--format", "xml"}).code, 2);

    const auto sw = call({"sweep", "--spec", spec, "--param", "attentional_limit", "--values", "1,2,3", "--out",
                          (dir / "sweep").string()});
    ASSERT_EQ(sw.code, 0) << sw.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "sweep" / "sweep_attentional_limit.csv"));
    EXPECT_EQ(call({"sweep", "--spec", spec, "--param", "nope", "--values", "1", "--out", (dir / "s2").string()}).code,
              2);
}

TEST_F(CliTest, MissingReportDirIsRuntimeError) {
    const auto r = call({"report", "--in", (dir / "missing").string()});
    EXPECT_EQ(r.code, 1);
}

} // namespace
} // namespace gwsim
