#pragma once

#include <span>
#include <string>
#include <vector>

#include "sgbh/spectral.hpp"

namespace sgbh {

enum class KernelMethod { images, eigen };

inline constexpr int kDefaultImagePairs = 10;
inline constexpr int kDefaultKernelModes = 200;

/// Dirichlet heat kernel on [0,1] (unit diffusivity) by the method of images,
/// summing m = -image_pairs..image_pairs.
double heat_kernel_images(double t, double x, double y, int image_pairs = kDefaultImagePairs);

/// Same kernel from the truncated eigen-expansion sum_j exp(-lambda_j t) phi_j(x) phi_j(y).
double heat_kernel_eigen(double t, double x, double y, int n_modes = kDefaultKernelModes);

/// dG/dy by analytic differentiation of the image sum.
double heat_kernel_dy(double t, double x, double y, int image_pairs = kDefaultImagePairs);

/// int_0^1 G(t,x,y) dy, exact per image term via erf.
double heat_kernel_mass(double t, double x, int image_pairs = kDefaultImagePairs);

/// Kernel sampled on all grid pairs (x_i, y_k).
struct HeatKernelEval {
    double t = 0.0;
    KernelMethod method = KernelMethod::images;
    int truncation = 0;
    int n_points = 0;
    std::vector<double> values;  // n_points x n_points, row i = x_i
    double tail_bound = 0.0;     // crude bound on the truncated remainder
    bool truncation_warning = false;

    double operator()(int i, int k) const {
        return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_points) +
                      static_cast<std::size_t>(k)];
    }
};

/// Throws std::invalid_argument for t <= 0 or truncation < 1. Sets
/// truncation_warning when tail_bound exceeds warn_tolerance.
HeatKernelEval heat_kernel(double t, const Grid1D& grid, KernelMethod method, int truncation,
                           double warn_tolerance = 1e-12);

struct EstimateFitReport {
    std::string estimate_id;  // "A1", "A2" or "A7"
    double fitted_C = 0.0;
    double fitted_a = 0.0;
    double max_violation = 0.0;  // max(lhs / bound) - 1 over the samples
    bool pass = false;
};

struct KernelEstimateOptions {
    std::vector<double> a_candidates{2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0, 24.0, 32.0};
    int image_pairs = kDefaultImagePairs;
    double gaussian_p = 2.0;  // L^p exponent for the Gaussian-norm estimate
    double gaussian_a = 1.0;
    int gaussian_quadrature_points = 20001;
};

/// Empirical constants for the pointwise Gaussian bounds on G and dG/dy and
/// for the L^p norm of exp(-|z|^2 / (a tau)) on z in [-1,1].
///
/// For the pointwise bounds the exponent a is chosen from the candidate list
/// to minimise C * sqrt(a), i.e. the integrated size of the bound; C is then
/// the smallest constant that dominates every sample.
std::vector<EstimateFitReport> validate_kernel_estimates(std::span<const double> t_samples,
                                                         const Grid1D& grid,
                                                         const KernelEstimateOptions& options = {});

/// (int_{-1}^{1} exp(-p z^2 / (a tau)) dz)^(1/p) by the trapezoid rule.
double gaussian_lp_norm(double tau, double a, double p, int quadrature_points = 20001);

std::string to_json(std::span<const EstimateFitReport> reports);

}  // namespace sgbh
