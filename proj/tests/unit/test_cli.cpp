#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xml_check.hpp"

namespace fs = std::filesystem;

namespace {

const std::string fixtures = MESOMEM_FIXTURES;

struct Outcome {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("mesomem_cli_" + std::string(info->name()) + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Outcome run(const std::string& args) {
        const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
        const std::string cmd = std::string("\"") + MESOMEM_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                                err.string() + "\"";
        const int status = std::system(cmd.c_str());
        Outcome r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    std::vector<std::vector<std::string>> csv(const fs::path& p) {
        std::vector<std::vector<std::string>> rows;
        std::ifstream in(p);
        for (std::string line; std::getline(in, line);) {
            std::vector<std::string> row;
            std::stringstream ss(line);
            for (std::string cell; std::getline(ss, cell, ',');) row.push_back(cell);
            rows.push_back(row);
        }
        return rows;
    }

    std::string out_dir(const std::string& name) { return "--out \"" + (dir_ / name).string() + "\""; }
    fs::path path(const std::string& rel) const { return dir_ / rel; }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpAndUnknownCommand) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("profile --c 1 --eps 0.04 --bogus 3").code, 2);
}

TEST_F(Cli, ProfileTable) {
    const Outcome r = run("profile --c 1 --eps 0.04 --rmin -0.5 --rmax 0.5 --n 1001 " + out_dir("p"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv(path("p/profile.csv"));
    ASSERT_EQ(rows.size(), 1002u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"r", "q", "q_slope", "equipartition_residual"}));
    EXPECT_EQ(std::stod(rows[501][0]), 0.0);
    EXPECT_NEAR(std::stod(rows[501][1]), 0.888889, 1e-6);
    EXPECT_TRUE(oracle::well_formed_xml(slurp(path("p/profile.svg"))));
}

TEST_F(Cli, ProfileConstantWithoutAsymmetry) {
    ASSERT_EQ(run("profile --c 0 --eps 0.04 --n 50 " + out_dir("p")).code, 0);
    const auto rows = csv(path("p/profile.csv"));
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_EQ(std::stod(rows[k][1]), 1.0);
}

TEST_F(Cli, ProfileUsageErrors) {
    const Outcome missing = run("profile --c 1 " + out_dir("p"));
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("--eps"), std::string::npos);
    const Outcome domain = run("profile --c 1 --eps 2 " + out_dir("p"));
    EXPECT_EQ(domain.code, 2);
    EXPECT_FALSE(domain.err.empty());
}

TEST_F(Cli, GridSweepHalfInterval) {
    const Outcome r = run("grid-sweep --dim 1 --c 1 --eps-list 0.04,0.01,0.0025 --phase half " + out_dir("s"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv(path("s/sweep.csv"));
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0][0], "eps");
    EXPECT_LE(std::stod(rows[3][4]), 0.03);
    const auto j = nlohmann::json::parse(slurp(path("s/sweep.json")));
    EXPECT_EQ(j["records"].size(), 3u);
    EXPECT_TRUE(oracle::well_formed_xml(slurp(path("s/sweep.svg"))));
}

TEST_F(Cli, GridSweepPhaseFileOfOnes) {
    const Outcome r = run("grid-sweep --dim 1 --eps-list 0.04,0.02 --phase file:" + fixtures + "/phase_ones_1d.txt " +
                      out_dir("s"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv(path("s/sweep.csv"));
    for (std::size_t k = 1; k < rows.size(); ++k) {
        EXPECT_NEAR(std::stod(rows[k][1]), 0.0, 1e-12);
        EXPECT_EQ(std::stod(rows[k][3]), 0.0);
    }
}

TEST_F(Cli, GridSweepErrors) {
    EXPECT_EQ(run("grid-sweep --dim 1 --eps-list 0.04 --phase file:/nonexistent " + out_dir("s")).code, 2);
    EXPECT_EQ(run("grid-sweep --dim 3 --eps-list 0.04 " + out_dir("s")).code, 2);
    EXPECT_EQ(run("grid-sweep --dim 1 --eps-list 0.01,0.04 " + out_dir("s")).code, 2);
    EXPECT_EQ(run("grid-sweep --dim 1 --eps-list 0.04,abc " + out_dir("s")).code, 2);
}

TEST_F(Cli, CurveEnergyCircle) {
    const Outcome r = run("curve-energy --config " + fixtures + "/circle_r1.cfg --c 1 --eps 0.1 " + out_dir("e"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(path("e/curve_energy.json")));
    EXPECT_EQ(nlohmann::json::parse(r.out), j);
    const auto& c = j["configurations"][0];
    EXPECT_LE(std::abs(c["F_tilde_minus_F"].get<double>()), 1e-8);
    EXPECT_NEAR(c["G"].get<double>(), 1.5707963, 1e-6);
    EXPECT_NEAR(c["F"].get<double>(), 12.5820786, 1e-6);
    for (const char* key : {"nodes", "length", "E", "G", "rescaled", "F", "F_tilde", "F_tilde_minus_F", "m1", "m2",
                            "embedding"})
        EXPECT_TRUE(c.contains(key)) << key;
}

TEST_F(Cli, CurveEnergyFamily) {
    const Outcome r = run("curve-energy --config " + fixtures + "/circle_r1.cfg --config " + fixtures +
                      "/circle_r3.cfg --eps 0.05 --targets 0,25.132741228718345 " + out_dir("e"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(path("e/curve_energy.json")));
    EXPECT_TRUE(j["family"]["overlap"]["pass"].get<bool>());
    const double sum = j["configurations"][0]["F"].get<double>() + j["configurations"][1]["F"].get<double>();
    EXPECT_NEAR(j["family"]["value"].get<double>(), sum, 1e-12);
    EXPECT_NEAR(j["family"]["residuals"]["m2"].get<double>(), 0.0, 1e-10);

    const Outcome near = run("curve-energy --config " + fixtures + "/circle_r1.cfg --config " + fixtures +
                         "/circle_r1_01.cfg --eps 0.5 " + out_dir("f"));
    ASSERT_EQ(near.code, 0) << near.err;
    const auto k = nlohmann::json::parse(slurp(path("f/curve_energy.json")));
    EXPECT_FALSE(k["family"]["overlap"]["pass"].get<bool>());
}

TEST_F(Cli, CurveEnergyErrors) {
    const Outcome bad = run("curve-energy --config " + fixtures + "/bad_transversality.cfg --eps 0.1 " + out_dir("e"));
    EXPECT_NE(bad.code, 0);
    EXPECT_NE(bad.err.find("node 17"), std::string::npos) << bad.err;
    const Outcome malformed = run("curve-energy --config " + fixtures + "/malformed.cfg --eps 0.1 " + out_dir("e"));
    EXPECT_EQ(malformed.code, 2);
    EXPECT_NE(malformed.err.find("malformed.cfg"), std::string::npos);
    EXPECT_EQ(run("curve-energy --eps 0.1 " + out_dir("e")).code, 2);
}

TEST_F(Cli, RecoveryHalfCircle) {
    const Outcome r = run("recovery --curve circle:1 --arcs 0:3.14159265 --c 1 --eps-list 0.1,0.01 --deterministic " +
                      out_dir("r"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv(path("r/recovery.csv"));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].size(), 11u);
    EXPECT_EQ(rows[0][0], "eps");
    EXPECT_EQ(rows[0][10], "gap");
    for (std::size_t k = 1; k < rows.size(); ++k) {
        EXPECT_LE(std::abs(std::stod(rows[k][3])), 1e-10);
        EXPECT_LE(std::abs(std::stod(rows[k][4])), 1e-10);
        EXPECT_NEAR(std::stod(rows[k][8]), 2.2779031, 1e-6);
    }
    const auto j = nlohmann::json::parse(slurp(path("r/recovery.json")));
    EXPECT_EQ(j["records"].size(), 2u);
    EXPECT_TRUE(oracle::well_formed_xml(slurp(path("r/recovery_curve.svg"))));
    EXPECT_TRUE(oracle::well_formed_xml(slurp(path("r/recovery_energy.svg"))));
}

TEST_F(Cli, RecoveryIsDeterministic) {
    const std::string args = "recovery --curve ellipse:1:0.6 --arcs 0:2.0 --eps-list 0.1,0.02 --deterministic ";
    ASSERT_EQ(run(args + out_dir("a")).code, 0);
    ASSERT_EQ(run(args + "--threads 3 " + out_dir("b")).code, 0);
    EXPECT_EQ(slurp(path("a/recovery.csv")), slurp(path("b/recovery.csv")));
    EXPECT_EQ(slurp(path("a/recovery.json")), slurp(path("b/recovery.json")));
    const auto rows = csv(path("a/recovery.csv"));
    for (std::size_t k = 1; k < rows.size(); ++k) {
        EXPECT_LE(std::abs(std::stod(rows[k][3])), 1e-10);
        EXPECT_LE(std::abs(std::stod(rows[k][4])), 1e-10);
    }
}

TEST_F(Cli, RecoveryWithoutAsymmetry) {
    ASSERT_EQ(run("recovery --curve circle:1 --c 0 --eps-list 0.1,0.01 --no-embedding " + out_dir("r")).code, 0);
    const auto rows = csv(path("r/recovery.csv"));
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_EQ(std::stod(rows[k][7]), std::stod(rows[k][6]));
}

TEST_F(Cli, RecoveryAllFailedExitsOne) {
    // 3 eps exceeds the jump gap for every entry
    const Outcome r = run("recovery --curve circle:1 --arcs 1:1.5 --delta 0.05 --eps-list 0.3,0.2 " + out_dir("r"));
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(fs::exists(path("r/recovery.csv")));
}

TEST_F(Cli, ConfigFile) {
    const Outcome r = run("recovery --config-file " + fixtures + "/recovery.conf --no-embedding " + out_dir("r"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(csv(path("r/recovery.csv")).size(), 3u);
    // flags given after the file override its values
    ASSERT_EQ(run("recovery --config-file " + fixtures + "/recovery.conf --eps-list 0.1 --no-embedding " +
                  out_dir("s"))
                  .code,
              0);
    EXPECT_EQ(csv(path("s/recovery.csv")).size(), 2u);
    const Outcome unknown = run("recovery --config-file " + fixtures + "/unknown_key.conf --eps-list 0.1 " + out_dir("u"));
    EXPECT_EQ(unknown.code, 2);
    EXPECT_NE(unknown.err.find("bogus"), std::string::npos) << unknown.err;
    EXPECT_EQ(run("recovery --config-file /nonexistent.conf " + out_dir("u")).code, 2);
}
