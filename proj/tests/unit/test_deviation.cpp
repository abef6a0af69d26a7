#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include <json.hpp>

#include "sgbh/deviation.hpp"

namespace sgbh {
namespace {

SolverContext make_context(int modes, int points, ModelParams params, NoiseCoefficient g, double t_end = 0.25,
                           double dt = 1e-3) {
    SolverConfig cfg;
    cfg.n_modes = modes;
    cfg.n_points = points;
    cfg.t_end = t_end;
    cfg.dt = dt;
    return SolverContext(params, g, NoiseSpec(modes, 0.3), cfg);
}

class DeviationTest : public ::testing::Test {
protected:
    void build(int modes, int points, ModelParams params, NoiseCoefficient g) {
        ctx_ = std::make_unique<SolverContext>(make_context(modes, points, params, g));
        ref_ = std::make_unique<ReferenceSolution>(*ctx_, solve_deterministic(*ctx_, ctx_->sine_initial_condition(1.0)));
    }
    void SetUp() override { build(8, 64, ModelParams{}, NoiseCoefficient::affine(1.0, 0.5)); }

    ControlPath random_control(unsigned seed, double scale = 1.0) const {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        auto h = ControlPath::zeros(ctx_->n_noise_modes(), ctx_->n_steps(), ctx_->dt());
        for (double& v : h.hdot) v = scale * normal(rng);
        return h;
    }

    std::vector<double> random_vector(unsigned seed) const {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        std::vector<double> v(static_cast<std::size_t>(ctx_->n_modes()));
        for (double& x : v) x = normal(rng);
        return v;
    }

    std::unique_ptr<SolverContext> ctx_;
    std::unique_ptr<ReferenceSolution> ref_;
};

TEST_F(DeviationTest, ZeroTargetIsFree) {
    const std::vector<double> zero(8, 0.0);
    const auto r = rate_function_endpoint(*ctx_, *ref_, zero);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 0);
    for (double v : r.control.hdot) EXPECT_EQ(v, 0.0);
}

TEST_F(DeviationTest, ValueIsActionOfControl) {
    const auto r = rate_function_endpoint(*ctx_, *ref_, random_vector(1));
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, action(r.control), 1e-12 * std::max(1.0, r.value));
    EXPECT_LE(r.endpoint_residual, 1e-8 * std::sqrt(8.0) * 3.0);
}

TEST_F(DeviationTest, AdjointInnerProduct) {
    const ControlToEndpointMap phi(*ctx_, *ref_);
    for (unsigned seed = 0; seed < 5; ++seed) {
        const auto h = random_control(seed);
        const auto w = random_vector(100 + seed);
        const auto endpoint = phi.forward(h);
        const auto back = phi.adjoint(w);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) lhs += endpoint[i] * w[i];
        for (std::size_t i = 0; i < h.hdot.size(); ++i) rhs += h.hdot[i] * back.hdot[i];
        rhs *= ctx_->dt();
        EXPECT_NEAR(lhs, rhs, 1e-10) << "seed " << seed;
    }
}

TEST_F(DeviationTest, ForwardMapMatchesSkeletonEndpoint) {
    const ControlToEndpointMap phi(*ctx_, *ref_);
    const auto h = random_control(3);
    const auto endpoint = phi.forward(h);
    const auto z = solve_skeleton(*ctx_, *ref_, h);
    const auto last = z.final_state();
    for (std::size_t i = 0; i < endpoint.size(); ++i) EXPECT_EQ(endpoint[i], last[i]);
}

TEST_F(DeviationTest, QuadraticHomogeneity) {
    const auto psi = random_vector(7);
    std::vector<double> scaled(psi.size());
    for (double c : {2.0, 0.3, -1.7}) {
        for (std::size_t i = 0; i < psi.size(); ++i) scaled[i] = c * psi[i];
        const double base = rate_function_endpoint(*ctx_, *ref_, psi).value;
        const double value = rate_function_endpoint(*ctx_, *ref_, scaled).value;
        EXPECT_NEAR(value / (c * c * base), 1.0, 1e-6) << "c = " << c;
    }
}

TEST_F(DeviationTest, MatchesDenseGramianPseudoinverse) {
    const auto G = controllability_gramian(*ctx_, *ref_, 8);
    for (unsigned seed = 0; seed < 3; ++seed) {
        const auto psi = random_vector(seed);
        const auto r = rate_function_endpoint(*ctx_, *ref_, psi);
        const double oracle = gramian_rate_value(G, psi);
        EXPECT_NEAR(r.value, oracle, 1e-8 * std::max(1.0, oracle)) << "seed " << seed;
    }
}

TEST_F(DeviationTest, FeasibleControlDominates) {
    for (unsigned seed = 0; seed < 5; ++seed) {
        const auto h = random_control(seed, 0.5);
        const auto z = solve_skeleton(*ctx_, *ref_, h);
        const auto r = rate_function_endpoint(*ctx_, *ref_, z.final_state());
        EXPECT_TRUE(r.converged);
        EXPECT_LE(r.value, action(h) + 1e-8);
        double norm = 0.0;
        for (double v : z.final_state()) norm += v * v;
        EXPECT_LE(r.endpoint_residual, 1e-8 * std::sqrt(norm));
    }
}

TEST_F(DeviationTest, GramianIsSymmetricPsd) {
    const auto G = controllability_gramian(*ctx_, *ref_, 8);
    EXPECT_LT((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-12 * G.cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (G + G.transpose()));
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
}

TEST_F(DeviationTest, GramianModeCapValidated) {
    EXPECT_THROW(controllability_gramian(*ctx_, *ref_, 0), std::invalid_argument);
    EXPECT_THROW(controllability_gramian(*ctx_, *ref_, 9), std::invalid_argument);
}

TEST_F(DeviationTest, ZeroCoefficientGivesZeroGramianAndUnreachableTargets) {
    build(8, 64, ModelParams{}, NoiseCoefficient::constant(0.0));
    const auto G = controllability_gramian(*ctx_, *ref_, 8);
    EXPECT_EQ(G.cwiseAbs().maxCoeff(), 0.0);
    const auto psi = random_vector(2);
    const auto r = rate_function_endpoint(*ctx_, *ref_, psi);
    EXPECT_FALSE(r.converged);
    double norm = 0.0;
    for (double v : psi) norm += v * v;
    EXPECT_NEAR(r.endpoint_residual, std::sqrt(norm), 1e-12);
}

TEST_F(DeviationTest, DiagonalGramianMatchesScalarIntegral) {
    ModelParams linear;
    linear.alpha = linear.beta = 0.0;
    build(16, 64, linear, NoiseCoefficient::constant(1.0));
    const auto G = controllability_gramian(*ctx_, *ref_, 16);
    const double T = 0.25, dt = ctx_->dt();
    for (int j = 0; j < 16; ++j) {
        const double q = ctx_->noise_spec().weight(j);
        const double rate = linear.nu * ctx_->basis().eigenvalue(j);
        const double continuum = q * q * (-std::expm1(-2.0 * rate * T)) / (2.0 * rate);
        const double x = rate * dt;
        // The exponential Euler step integrates the forcing with phi1, which
        // shrinks each entry by tanh(x/2)/(x/2) = 1 - x^2/12 + O(x^4).
        EXPECT_NEAR(G(j, j) / continuum, std::tanh(x / 2) / (x / 2), 1e-12) << "mode " << j + 1;
        EXPECT_NEAR(G(j, j) / continuum, 1.0, x * x / 12.0 * 1.01 + 1e-14) << "mode " << j + 1;
        for (int k = 0; k < 16; ++k) {
            if (k != j) EXPECT_NEAR(G(j, k), 0.0, 1e-15);
        }
    }
}

TEST(Wilson, KnownIntervals) {
    auto [lo0, hi0] = wilson_interval(0, 10);
    EXPECT_EQ(lo0, 0.0);
    EXPECT_NEAR(hi0, 0.2775, 1e-4);
    auto [lo5, hi5] = wilson_interval(5, 10);
    EXPECT_NEAR(lo5, 0.2366, 1e-4);
    EXPECT_NEAR(hi5, 0.7634, 1e-4);
    EXPECT_THROW(wilson_interval(0, 0), std::invalid_argument);
}

TEST(Tail, ExtremesAndMonotonicity) {
    std::vector<TailSample> samples;
    std::mt19937_64 rng(5);
    std::exponential_distribution<double> expo(1.0);
    for (double eps : {1e-1, 1e-2}) {
        for (int i = 0; i < 200; ++i) samples.push_back({eps, expo(rng)});
    }
    samples.push_back({1e-2, std::numeric_limits<double>::infinity()});
    const std::vector<double> rhos{1e6, 0.0, 0.5, 1.0, 2.0};
    const auto report = mdp_tail_estimate(samples, rhos);
    ASSERT_EQ(report.eps.size(), 2u);
    ASSERT_EQ(report.rhos.front(), 0.0);
    EXPECT_TRUE(report.monotone_in_rho);
    for (std::size_t e = 0; e < 2; ++e) {
        EXPECT_EQ(report.at(e, 0).probability, 1.0);
        for (std::size_t r = 1; r < report.rhos.size(); ++r) {
            EXPECT_LE(report.at(e, r).probability, report.at(e, r - 1).probability);
            EXPECT_LE(report.at(e, r).lower, report.at(e, r).probability);
            EXPECT_GE(report.at(e, r).upper, report.at(e, r).probability);
        }
    }
    EXPECT_EQ(report.at(0, 4).probability, 0.0);
    EXPECT_EQ(report.at(1, 4).n_exceed, 1);  // the stopped path exceeds every level
    EXPECT_EQ(report.sup_over_eps.front(), 1.0);
    const auto j = nlohmann::json::parse(to_json(report));
    EXPECT_TRUE(j["monotone_in_rho"].get<bool>());
    EXPECT_EQ(j["estimates"].size(), 10u);
}

TEST(Tail, RejectsEmptyEnsemble) {
    const std::vector<TailSample> none;
    const std::vector<double> rhos{1.0};
    EXPECT_THROW(mdp_tail_estimate(none, rhos), std::invalid_argument);
}

TEST(RateJson, HasDeclaredKeys) {
    RateFunctionResult r;
    r.value = 1.5;
    r.iterations = 4;
    r.converged = true;
    const auto j = nlohmann::json::parse(to_json(r, "control.bin"));
    for (const char* key : {"value", "endpoint_residual", "iterations", "converged", "control_file"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["control_file"], "control.bin");
}

}  // namespace
}  // namespace sgbh
