#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "sgbh/noise.hpp"

namespace sgbh {
namespace {

constexpr double pi = std::numbers::pi;

double pooled_variance(const NoiseRealization& r) {
    double s = 0.0, s2 = 0.0;
    for (double v : r.increments) {
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(r.increments.size());
    return (s2 - s * s / n) / (n - 1.0);
}

TEST(NoiseSpec, WeightsAndValidation) {
    const NoiseSpec spec(4, 0.3);
    for (int k = 0; k < 4; ++k) {
        EXPECT_DOUBLE_EQ(spec.weight(k), std::pow((k + 1) * (k + 1) * pi * pi, -0.3));
    }
    EXPECT_THROW(NoiseSpec(4, 0.25), std::invalid_argument);
    EXPECT_THROW(NoiseSpec(0, 0.3), std::invalid_argument);
}

TEST(NoiseSpec, TraceTailMatchesZetaLimit) {
    const double eta = 0.3;
    const NoiseSpec spec(8, eta);
    const double limit = std::pow(pi, -4.0 * eta) * std::riemann_zeta(4.0 * eta);
    std::vector<double> logJ, logTail;
    double prev = 0.0;
    for (int J = 16; J <= 4096; J *= 2) {
        const double s = spec.trace_partial_sum(J);
        EXPECT_GT(s, prev);
        EXPECT_LT(s, limit);
        prev = s;
        logJ.push_back(std::log(J));
        logTail.push_back(std::log(limit - s));
    }
    const double slope = (logTail.back() - logTail.front()) / (logJ.back() - logJ.front());
    const double expected = -(4.0 * eta - 1.0);
    EXPECT_NEAR(slope, expected, 0.15 * std::abs(expected));
}

TEST(SampleNoise, DeterministicAndCorrectVariance) {
    const NoiseSpec spec(32, 0.3);
    const auto a = sample_noise(spec, 1e-3, 1000, 99);
    const auto b = sample_noise(spec, 1e-3, 1000, 99);
    EXPECT_EQ(a.increments, b.increments);
    EXPECT_NE(a.increments, sample_noise(spec, 1e-3, 1000, 100).increments);
    EXPECT_NE(a.increments, sample_noise(spec, 1e-3, 1000, 99, 1).increments);
    const double var = pooled_variance(a);
    EXPECT_GT(var, 1e-3 * 0.95);
    EXPECT_LT(var, 1e-3 * 1.05);
    EXPECT_THROW(sample_noise(spec, 0.0, 10, 1), std::invalid_argument);
}

TEST(SampleNoise, PrefixStable) {
    // A longer horizon extends, rather than reshuffles, a path.
    const NoiseSpec spec(4, 0.3);
    const auto shorter = sample_noise(spec, 1e-2, 10, 5);
    const auto longer = sample_noise(spec, 1e-2, 20, 5);
    for (int k = 0; k < 4; ++k) {
        for (int n = 0; n < 10; ++n) EXPECT_EQ(shorter(k, n), longer(k, n));
    }
}

TEST(WienerField, CovarianceMatchesModeSum) {
    const NoiseSpec spec(16, 0.3);
    const int paths = 2000, steps = 50;
    const double dt = 0.01;
    double sxx = 0, syy = 0, sxy = 0, sx = 0, sy = 0;
    for (int p = 0; p < paths; ++p) {
        const auto r = sample_noise(spec, dt, steps, 2024, static_cast<std::uint32_t>(p));
        const double x = wiener_field(r, spec, steps, 0.5);
        const double y = wiener_field(r, spec, steps, 0.25);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double n = paths;
    const double cxx = sxx / n - (sx / n) * (sx / n);
    const double cyy = syy / n - (sy / n) * (sy / n);
    const double cxy = sxy / n - (sx / n) * (sy / n);
    double exact_xx = 0, exact_xy = 0;
    for (int k = 0; k < 16; ++k) {
        const int j = k + 1;
        const double q2 = spec.weight(k) * spec.weight(k);
        exact_xx += 0.5 * q2 * 2.0 * std::pow(std::sin(j * pi * 0.5), 2);
        exact_xy += 0.5 * q2 * 2.0 * std::sin(j * pi * 0.5) * std::sin(j * pi * 0.25);
    }
    EXPECT_NEAR(cxx, exact_xx, 3.0 * std::sqrt(2.0 / n) * exact_xx);
    EXPECT_NEAR(cxy, exact_xy, 3.0 * std::sqrt((cxx * cyy + cxy * cxy) / n));
    const auto r = sample_noise(spec, dt, steps, 1);
    EXPECT_EQ(wiener_field(r, spec, 0, 0.3), 0.0);
    EXPECT_THROW(wiener_field(r, spec, steps + 1, 0.3), std::out_of_range);
}

TEST(Bridge, GroupSumsAreExact) {
    const NoiseSpec spec(8, 0.3);
    const auto coarse = sample_noise(spec, 1e-2, 25, 3);
    const auto fine = refine_noise(coarse, 4);
    ASSERT_EQ(fine.n_steps, 100);
    EXPECT_DOUBLE_EQ(fine.dt, 2.5e-3);
    EXPECT_EQ(fine.refinement, 4u);
    for (int k = 0; k < 8; ++k) {
        for (int n = 0; n < 25; ++n) {
            double s = 0.0;
            for (int i = 0; i < 4; ++i) s += fine(k, 4 * n + i);
            EXPECT_NEAR(s, coarse(k, n), 1e-15);
        }
    }
    EXPECT_THROW(refine_noise(coarse, 1), std::invalid_argument);
}

TEST(Bridge, RefinedVarianceAndZeroBridge) {
    const NoiseSpec spec(32, 0.3);
    const auto fine = refine_noise(sample_noise(spec, 1e-3, 1000, 8), 4);
    const double var = pooled_variance(fine);
    EXPECT_NEAR(var, 2.5e-4, 0.05 * 2.5e-4);

    const auto zero = refine_noise(NoiseRealization::zeros(4, 10, 0.1), 5);
    double energy = 0.0;
    for (double v : zero.increments) energy += v * v;
    EXPECT_GT(energy, 0.0);
    for (int k = 0; k < 4; ++k) {
        for (int n = 0; n < 10; ++n) {
            double s = 0.0;
            for (int i = 0; i < 5; ++i) s += zero(k, 5 * n + i);
            EXPECT_NEAR(s, 0.0, 1e-15);
        }
    }
}

TEST(Bridge, RefineThenCoarsenRecoversPath) {
    const NoiseSpec spec(8, 0.3);
    const auto coarse = sample_noise(spec, 1e-2, 30, 12);
    const auto back = coarsen_noise(refine_noise(coarse, 6), 6);
    ASSERT_EQ(back.n_steps, coarse.n_steps);
    EXPECT_DOUBLE_EQ(back.dt, coarse.dt);
    for (std::size_t i = 0; i < coarse.increments.size(); ++i) {
        EXPECT_NEAR(back.increments[i], coarse.increments[i], 1e-15);
    }
    EXPECT_THROW(coarsen_noise(coarse, 7), std::invalid_argument);
}

TEST(Control, ActionAndEnergy) {
    auto h = ControlPath::zeros(3, 100, 0.01);
    EXPECT_EQ(action(h), 0.0);
    for (int n = 0; n < 100; ++n) h(0, n) = 1.0;
    EXPECT_NEAR(action(h), 0.5, 1e-14);
    EXPECT_NEAR(h.energy(), 1.0, 1e-14);
    EXPECT_TRUE(h.within_energy(1.0 + 1e-12));
    EXPECT_FALSE(h.within_energy(0.5));
    for (int n = 0; n < 100; ++n) h(2, n) = std::sin(n);
    const double base = action(h);
    for (double& v : h.hdot) v *= 2.0;
    EXPECT_NEAR(action(h) / base, 4.0, 1e-12);
}

TEST(Files, NoiseAndControlRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "sgbh_noise_io";
    std::filesystem::create_directories(dir);
    const NoiseSpec spec(5, 0.3);
    const auto noise = sample_noise(spec, 1e-2, 17, 77);
    save_noise(dir / "n.bin", noise);
    const auto loaded = load_noise(dir / "n.bin");
    EXPECT_EQ(loaded.increments, noise.increments);
    EXPECT_EQ(loaded.seed, 77u);
    EXPECT_EQ(loaded.dt, noise.dt);
    EXPECT_EQ(std::filesystem::file_size(dir / "n.bin"), 32u + 8u * 5u * 17u);

    auto h = ControlPath::zeros(2, 9, 0.1);
    for (std::size_t i = 0; i < h.hdot.size(); ++i) h.hdot[i] = 0.1 * static_cast<double>(i);
    save_control(dir / "c.bin", h);
    const auto hc = load_control(dir / "c.bin");
    EXPECT_EQ(hc.hdot, h.hdot);
    EXPECT_EQ(hc.n_modes, 2);
    EXPECT_EQ(hc.n_steps, 9);

    std::filesystem::resize_file(dir / "c.bin", 20);
    EXPECT_THROW(load_control(dir / "c.bin"), std::runtime_error);
    EXPECT_THROW(load_noise(dir / "missing.bin"), std::runtime_error);
    std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sgbh
