#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "sgbh/heat_kernel.hpp"

namespace sgbh {
namespace {

constexpr double pi = std::numbers::pi;

TEST(HeatKernel, CrossMethodAgreement) {
    const Grid1D grid(63);
    for (double t : {0.01, 0.05, 0.1, 0.25, 0.5}) {
        const auto images = heat_kernel(t, grid, KernelMethod::images, 10);
        const auto eigen = heat_kernel(t, grid, KernelMethod::eigen, 200);
        double worst = 0.0;
        for (std::size_t i = 0; i < images.values.size(); ++i) {
            worst = std::max(worst, std::abs(images.values[i] - eigen.values[i]));
        }
        EXPECT_LT(worst, 1e-8) << "t = " << t;
        EXPECT_FALSE(images.truncation_warning);
    }
}

TEST(HeatKernel, DiagonalValueFromImageSum) {
    // At x=y=1/2 the m=0 term is (4 pi t)^(-1/2); the next image pair lies a
    // distance 1 away.
    const double t = 0.05;
    const double free = 1.0 / std::sqrt(4.0 * pi * t);
    double direct = 0.0;
    for (int m = -5; m <= 5; ++m) {
        direct += std::exp(-std::pow(2.0 * m, 2) / (4.0 * t)) - std::exp(-std::pow(1.0 - 2.0 * m, 2) / (4.0 * t));
    }
    direct *= free;
    EXPECT_NEAR(heat_kernel_images(t, 0.5, 0.5, 5), direct, 1e-14);
    EXPECT_LT(direct, free);
    EXPECT_NEAR(direct, free, 0.02 * free);
}

TEST(HeatKernel, SymmetryAndPositivity) {
    const Grid1D grid(49);
    for (double t : {0.001, 0.02, 0.3}) {
        const auto k = heat_kernel(t, grid, KernelMethod::images, 10);
        for (int i = 0; i < 49; ++i) {
            for (int j = 0; j < 49; ++j) {
                EXPECT_NEAR(k(i, j), k(j, i), 1e-10);
                EXPECT_GE(k(i, j), -1e-12);
            }
        }
    }
    EXPECT_DOUBLE_EQ(heat_kernel_images(0.1, 0.25, 0.75), heat_kernel_images(0.1, 0.75, 0.25));
}

TEST(HeatKernel, SubStochasticOnLattice) {
    for (int a = 0; a < 50; ++a) {
        const double t = 1e-3 * std::pow(500.0, a / 49.0);
        for (int b = 0; b < 50; ++b) {
            const double x = (b + 0.5) / 50.0;
            const double mass = heat_kernel_mass(t, x);
            EXPECT_LE(mass, 1.0 + 1e-10);
            EXPECT_GE(mass, -1e-12);
        }
    }
}

TEST(HeatKernel, MassMatchesEigenSeries) {
    // int_0^1 phi_j = sqrt2 (1 - (-1)^j) / (j pi)
    const double t = 0.1, x = 0.3;
    double series = 0.0;
    for (int j = 1; j <= 400; j += 2) {
        series += std::exp(-j * j * pi * pi * t) * 2.0 * std::sin(j * pi * x) * 2.0 / (j * pi);
    }
    EXPECT_NEAR(heat_kernel_mass(t, x), series, 1e-12);
}

TEST(HeatKernel, GradientMatchesFiniteDifference) {
    const double h = 1e-5;
    for (double t : {0.01, 0.1}) {
        for (double y : {0.2, 0.45, 0.9}) {
            const double fd = (heat_kernel_images(t, 0.4, y + h) - heat_kernel_images(t, 0.4, y - h)) / (2.0 * h);
            EXPECT_NEAR(heat_kernel_dy(t, 0.4, y), fd, 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(HeatKernel, RejectsBadArguments) {
    const Grid1D grid(15);
    EXPECT_THROW(heat_kernel(0.0, grid, KernelMethod::images, 10), std::invalid_argument);
    EXPECT_THROW(heat_kernel(-1.0, grid, KernelMethod::eigen, 10), std::invalid_argument);
    EXPECT_THROW(heat_kernel(0.1, grid, KernelMethod::images, 0), std::invalid_argument);
}

TEST(HeatKernel, WarnsOnShortEigenTruncation) {
    const Grid1D grid(31);
    EXPECT_TRUE(heat_kernel(1e-3, grid, KernelMethod::eigen, 5).truncation_warning);
    EXPECT_FALSE(heat_kernel(1e-3, grid, KernelMethod::eigen, 400).truncation_warning);
}

TEST(HeatKernel, SemigroupMatchesKernelQuadrature) {
    const SpectralBasis basis(16, Grid1D(255));
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    std::vector<double> c(16);
    for (double& v : c) v = normal(rng);
    const double nu_t = 0.01;
    const auto evolved = basis.to_grid(apply_semigroup(c, nu_t));
    const auto f = basis.to_grid(c);
    const auto k = heat_kernel(nu_t, basis.grid(), KernelMethod::images, 10);
    std::vector<double> row(255);
    for (int i = 0; i < 255; ++i) {
        for (int j = 0; j < 255; ++j) row[static_cast<std::size_t>(j)] = k(i, j) * f[static_cast<std::size_t>(j)];
        EXPECT_NEAR(basis.grid().integrate(row), evolved[static_cast<std::size_t>(i)], 1e-8) << "node " << i;
    }
}

TEST(KernelEstimates, FitsAndPasses) {
    const Grid1D grid(63);
    const std::vector<double> ts{0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
    const auto reports = validate_kernel_estimates(ts, grid);
    ASSERT_EQ(reports.size(), 3u);
    EXPECT_EQ(reports[0].estimate_id, "A1");
    EXPECT_EQ(reports[1].estimate_id, "A2");
    EXPECT_EQ(reports[2].estimate_id, "A7");
    for (const auto& r : reports) {
        EXPECT_TRUE(r.pass) << r.estimate_id;
        EXPECT_TRUE(std::isfinite(r.fitted_C)) << r.estimate_id;
        EXPECT_LE(r.max_violation, 1e-12) << r.estimate_id;
    }
    // The diagonal of the free kernel alone forces C >= (4 pi)^(-1/2) in the first bound.
    EXPECT_GE(reports[0].fitted_C, 0.9 / std::sqrt(4.0 * pi));
    const auto j = nlohmann::json::parse(to_json(reports));
    for (const char* key : {"estimate_id", "fitted_C", "fitted_a", "max_violation", "pass"}) {
        EXPECT_TRUE(j[0].contains(key)) << key;
    }
}

TEST(KernelEstimates, SingleTimeDiagonal) {
    const Grid1D grid(63);
    const std::vector<double> ts{0.01};
    const auto reports = validate_kernel_estimates(ts, grid);
    double diag = 0.0;
    for (double x : grid.nodes()) diag = std::max(diag, heat_kernel_images(0.01, x, x));
    EXPECT_GE(reports[0].fitted_C, diag * std::sqrt(0.01) * (1.0 - 1e-12));
    EXPECT_NEAR(diag * std::sqrt(0.01), 1.0 / std::sqrt(4.0 * pi), 1e-3);
    EXPECT_THROW(validate_kernel_estimates(std::vector<double>{1.5}, grid), std::invalid_argument);
}

TEST(KernelEstimates, GaussianNormClosedForm) {
    for (double tau : {0.01, 0.1, 0.5, 1.0}) {
        const double closed = std::sqrt(std::sqrt(pi * tau / 2.0) * std::erf(std::sqrt(2.0 / tau)));
        EXPECT_NEAR(gaussian_lp_norm(tau, 1.0, 2.0), closed, 0.05 * closed);
        EXPECT_NEAR(gaussian_lp_norm(tau, 1.0, 2.0), closed, 1e-8);
    }
}

}  // namespace
}  // namespace sgbh
