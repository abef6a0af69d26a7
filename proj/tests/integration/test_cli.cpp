#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sgbh/noise.hpp"
#include "sgbh/trajectory_io.hpp"

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("sgbh_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(const std::string& args) const {
        const std::string cmd = std::string(SGBH_CLI) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                                " 2> " + (dir_ / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string out(const std::string& name) const { return (dir_ / name).string(); }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    static nlohmann::json json_of(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

    static std::string preset(const std::string& name) { return std::string(SGBH_CONFIG_DIR) + "/" + name + ".ini"; }

    fs::path dir_;
};

TEST_F(Cli, ZeroInitialDataGivesZeroNorms) {
    ASSERT_EQ(run("simulate --solver deterministic --set model.initial_amplitude=0 --out " + out("z")), 0);
    std::ifstream in(dir_ / "z" / "norms.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "time,l2,lp");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(line.substr(line.find(',')), ",0,0");
    }
    EXPECT_EQ(rows, 251);
    EXPECT_TRUE(fs::exists(dir_ / "z" / "trajectory.bin"));
    EXPECT_TRUE(fs::exists(dir_ / "z" / "config.ini"));
}

TEST_F(Cli, SameSeedGivesByteIdenticalTrajectories) {
    ASSERT_EQ(run("simulate --solver spde --seed 7 --out " + out("a")), 0);
    ASSERT_EQ(run("simulate --solver spde --seed 7 --out " + out("b")), 0);
    ASSERT_EQ(run("simulate --solver spde --seed 8 --out " + out("c")), 0);
    const auto a = slurp(dir_ / "a" / "trajectory.bin");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir_ / "b" / "trajectory.bin"));
    EXPECT_NE(a, slurp(dir_ / "c" / "trajectory.bin"));
    EXPECT_EQ(slurp(dir_ / "a" / "noise.bin"), slurp(dir_ / "b" / "noise.bin"));
}

TEST_F(Cli, SkeletonWithZeroControlIsZero) {
    sgbh::save_control(dir_ / "ctl.bin", sgbh::ControlPath::zeros(32, 250, 1e-3));
    ASSERT_EQ(run("simulate --solver skeleton --control " + out("ctl.bin") + " --out " + out("s")), 0);
    const auto traj = sgbh::load_trajectory(dir_ / "s" / "trajectory.bin");
    for (double v : traj.coeffs) EXPECT_EQ(v, 0.0);
}

TEST_F(Cli, ResolvedConfigRoundTripsThroughTheBinary) {
    ASSERT_EQ(run("--set model.delta=2 --seed 11 simulate --solver deterministic --out " + out("r")), 0);
    const auto written = slurp(dir_ / "r" / "config.ini");
    EXPECT_NE(written.find("delta = 2"), std::string::npos);
    EXPECT_NE(written.find("seed = 11"), std::string::npos);
    ASSERT_EQ(run("--config " + out("r/config.ini") + " show-config"), 0);
    EXPECT_EQ(slurp(dir_ / "stdout.txt"), written);
}

TEST_F(Cli, HeatOraclePresetPasses) {
    ASSERT_EQ(run("--config " + preset("heat_oracle") + " --set experiment.paths=400 --set solver.dt=1e-3 experiment --out " +
                  out("h")),
              0);
    const auto j = json_of(dir_ / "h" / "report.json");
    EXPECT_EQ(j["pass"], "pass");
    EXPECT_GE(j["fraction_variance_within_3"].get<double>(), 0.95);
}

TEST_F(Cli, LinearPresetProp31SlopeIsExact) {
    ASSERT_EQ(run("--config " + preset("linear") + " --set experiment.paths=20 experiment prop31 --out " + out("p")), 0);
    const auto j = json_of(dir_ / "p" / "report.json");
    EXPECT_NEAR(j["slope"].get<double>(), 4.0, 0.05);
    EXPECT_EQ(j["pass"], "pass");
}

TEST_F(Cli, DegenerateCltIsSkipped) {
    ASSERT_EQ(run("experiment clt --paths 1 --set 'experiment.eps=[0.01]' --out " + out("c")), 0);
    const auto j = json_of(dir_ / "c" / "report.json");
    EXPECT_EQ(j["pass"], "skipped");
    EXPECT_TRUE(fs::exists(dir_ / "c" / "report.csv"));
}

TEST_F(Cli, RateZeroFeasibleAndQuadratic) {
    const std::string cfg = "--config " + preset("rate") + " ";
    {
        std::ofstream t(dir_ / "zero.txt");
        for (int k = 0; k < 8; ++k) t << "0\n";
    }
    ASSERT_EQ(run(cfg + "rate --target " + out("zero.txt") + " --out " + out("r0")), 0);
    EXPECT_EQ(json_of(dir_ / "r0" / "rate.json")["value"].get<double>(), 0.0);

    auto h = sgbh::ControlPath::zeros(8, 250, 1e-3);
    for (std::size_t i = 0; i < h.hdot.size(); ++i) h.hdot[i] = std::sin(0.37 * static_cast<double>(i));
    sgbh::save_control(dir_ / "h.bin", h);
    ASSERT_EQ(run(cfg + "simulate --solver skeleton --control " + out("h.bin") + " --out " + out("sk")), 0);
    ASSERT_EQ(run(cfg + "rate --target " + out("sk/trajectory.bin") + " --out " + out("r1")), 0);
    const auto r1 = json_of(dir_ / "r1" / "rate.json");
    EXPECT_TRUE(r1["converged"].get<bool>());
    EXPECT_LE(r1["value"].get<double>(), sgbh::action(h) + 1e-8);
    const auto ctl = sgbh::load_control(dir_ / "r1" / "control.bin");
    EXPECT_NEAR(sgbh::action(ctl), r1["value"].get<double>(), 1e-12);

    const auto endpoint = sgbh::load_trajectory(dir_ / "sk" / "trajectory.bin").final_state();
    {
        std::ofstream t(dir_ / "double.txt");
        t.precision(17);
        for (double v : endpoint) t << 2.0 * v << "\n";
    }
    ASSERT_EQ(run(cfg + "rate --target " + out("double.txt") + " --out " + out("r2")), 0);
    const double v2 = json_of(dir_ / "r2" / "rate.json")["value"].get<double>();
    EXPECT_NEAR(v2 / r1["value"].get<double>(), 4.0, 4e-6);
}

TEST_F(Cli, UnreachableTargetIsAScientificFailure) {
    {
        std::ofstream t(dir_ / "t.txt");
        t << "1 0 0 0 0 0 0 0\n";
    }
    EXPECT_EQ(run("--config " + preset("rate") + " --set noise.kappa0=0 --set noise.kappa1=0 rate --target " +
                  out("t.txt") + " --out " + out("u")),
              1);
    EXPECT_FALSE(json_of(dir_ / "u" / "rate.json")["converged"].get<bool>());
}

TEST_F(Cli, ExitCodeContract) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("experiment prop32 --out " + out("x")), 2);
    EXPECT_EQ(run("--set model.gama=0.3 show-config"), 2);
    EXPECT_NE(slurp(dir_ / "stderr.txt").find("did you mean 'gamma'"), std::string::npos);
    {
        std::ofstream bad(dir_ / "bad.ini");
        bad << "[model]\nnu = 0.1\n\ngama = 0.4\n";
    }
    EXPECT_EQ(run("--config " + out("bad.ini") + " show-config"), 2);
    EXPECT_NE(slurp(dir_ / "stderr.txt").find("line 4"), std::string::npos);
    EXPECT_EQ(run("rate --target " + out("missing.txt") + " --out " + out("m")), 2);
    EXPECT_EQ(run("simulate --solver skeleton --out " + out("s")), 2);
    // A tiny blow-up threshold stops the path: numerical abort.
    EXPECT_EQ(run("simulate --solver spde --eps 1 --set solver.blowup_threshold=0.87 --out " + out("b")), 3);
    EXPECT_EQ(json_of(dir_ / "b" / "summary.json")["status"], "blowup");
    {
        std::ofstream t(dir_ / "t.txt");
        for (int k = 0; k < 32; ++k) t << "0.1\n";
    }
    EXPECT_EQ(run("rate --set solver.blowup_threshold=0.5 --target " + out("t.txt") + " --out " + out("n")), 3);
    // A failed scientific check exits 1: demand an impossible slope.
    EXPECT_EQ(run("--config " + preset("linear") +
                  " --set experiment.paths=5 --set experiment.slope_tolerance=-1 experiment prop31 --out " + out("f")),
              1);
}

TEST_F(Cli, ValidateKernelPasses) {
    ASSERT_EQ(run("validate-kernel --out " + out("k")), 0);
    const auto j = json_of(dir_ / "k" / "kernel_estimates.json");
    ASSERT_EQ(j.size(), 3u);
    for (const auto& r : j) EXPECT_TRUE(r["pass"].get<bool>());
    EXPECT_EQ(run("validate-kernel --set 'kernel.times=[0.0]' --out " + out("k0")), 2);
}

}  // namespace
