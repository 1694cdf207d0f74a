#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spn_cli/cli.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "spn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = spn::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("spn-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    fs::path dir;
};

TEST_F(Cli, ValidateExample) {
    const auto r = run({"validate", "--example", "psn-a2"});
    EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, ValidateRejectsSharedProcessorPartition) {
    ASSERT_EQ(run({"--out", dir.string(), "example", "rybko-stolyar"}).code, 0);
    auto text = slurp(dir / "rybko-stolyar.yaml");
    text.replace(text.find("partition: [[1, 4], [2, 3]]"), 27, "partition: [[1, 2], [3, 4]]");
    std::ofstream(dir / "bad.toml") << text;
    const auto r = run({"validate", "--spec", (dir / "bad.toml").string()});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("PartitionNotProcessorIndependent"), std::string::npos) << r.err;
}

TEST_F(Cli, InputErrorsExitThree) {
    EXPECT_EQ(run({"validate", "--example", "nope"}).code, 3);
    EXPECT_EQ(run({"validate"}).code, 3);
    EXPECT_EQ(run({"simulate", "--example", "tandem"}).code, 3);  // no seed
    EXPECT_EQ(run({"--seed", "1", "--out", dir.string(), "simulate", "--example", "tandem", "--horizon", "-1"}).code,
              3);
    EXPECT_EQ(run({"--bogus"}).code, 3);
    EXPECT_EQ(run({"--format", "xml", "validate", "--example", "tandem"}).code, 3);
    EXPECT_EQ(run({"validate", "--spec", (dir / "missing.yaml").string()}).code, 3);
}

TEST_F(Cli, CertifyRybkoStolyar) {
    const auto r = run({"--out", dir.string(), "certify", "--example", "rybko-stolyar", "--epsilon", "0.1",
                        "--max-slack", "--condition", "C2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = slurp(dir / "rybko-stolyar.certify.txt");
    EXPECT_NE(report.find("holds = true"), std::string::npos);
    EXPECT_NE(report.find("eta = 0.46"), std::string::npos);
    EXPECT_NE(report.find("max_slack = 0.42857142857142"), std::string::npos);
}

TEST_F(Cli, CertifyViolationExitsTwo) {
    const auto r = run({"--out", dir.string(), "certify", "--example", "rybko-stolyar", "--epsilon", "0.5"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(slurp(dir / "rybko-stolyar.certify.txt").find("holds = false"), std::string::npos);
}

TEST_F(Cli, CertifyEveryConstructibleExample) {
    for (const char* name : {"rybko-stolyar", "tandem", "single-server-2buf", "psn-a2", "reentrant-line",
                             "switch-2x2", "wireless-fig4"}) {
        EXPECT_EQ(run({"--out", dir.string(), "certify", "--example", name, "--samples", "2000"}).code, 0) << name;
    }
}

TEST_F(Cli, SimulateWritesTrajectoryAndVerdict) {
    const auto r = run({"--seed", "7", "--out", dir.string(), "simulate", "--example", "rybko-stolyar", "--policy",
                        "static-priority", "--expect-stable"});
    EXPECT_EQ(r.code, 2);
    const auto csv = slurp(dir / "rybko-stolyar.seed7.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,norm,Q_1,Q_2,Q_3,Q_4,V_1,V_2,V_3,V_4");
    EXPECT_NE(slurp(dir / "rybko-stolyar.simulate.txt").find("verdict = diverging"), std::string::npos);
}

TEST_F(Cli, SimulateIsByteIdentical) {
    const auto a = dir / "a";
    const auto b = dir / "b";
    for (const auto& d : {a, b}) {
        ASSERT_EQ(run({"--seed", "3", "--out", d.string(), "--format", "tsv", "simulate", "--example", "psn-a2",
                       "--horizon", "300", "--replications", "2", "--lyapunov"})
                      .code,
                  0);
    }
    for (const char* f : {"psn-a2.seed3.tsv", "psn-a2.seed4.tsv"}) {
        const auto x = slurp(a / f);
        EXPECT_FALSE(x.empty());
        EXPECT_EQ(x, slurp(b / f));
        EXPECT_NE(x.find("\tLglo\n"), std::string::npos);
    }
}

TEST_F(Cli, AnalyzeReadsTrajectories) {
    ASSERT_EQ(run({"--seed", "1", "--out", dir.string(), "simulate", "--example", "tandem", "--horizon", "500"}).code,
              0);
    const auto r = run({"--out", dir.string(), "analyze", (dir / "tandem.seed1.csv").string(), "--expect-stable"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(slurp(dir / "analysis.txt").find("verdict = bounded-evidence"), std::string::npos);
}

TEST_F(Cli, ExampleListAndWrite) {
    const auto r = run({"example", "--list"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("wireless-fig4"), std::string::npos);
    ASSERT_EQ(run({"--out", dir.string(), "example", "wireless-fig4"}).code, 0);
    EXPECT_EQ(run({"validate", "--spec", (dir / "wireless-fig4.yaml").string()}).code, 0);
}

}  // namespace
