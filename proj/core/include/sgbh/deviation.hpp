#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sgbh/noise.hpp"
#include "sgbh/solvers.hpp"

namespace sgbh {

/// Phi: hdot -> Z_h(T) for the discrete skeleton, and its adjoint with
/// respect to the control inner product <h, k> = dt sum_{j,n} h_{j,n} k_{j,n}.
/// The adjoint integrates the transposed step backwards on the same grid.
class ControlToEndpointMap {
public:
    ControlToEndpointMap(const SolverContext& ctx, const ReferenceSolution& ref);

    const SolverContext& context() const noexcept { return ctx_; }
    int n_state() const noexcept { return ctx_.n_modes(); }
    int n_control_modes() const noexcept { return ctx_.n_noise_modes(); }
    int n_steps() const noexcept { return ctx_.n_steps(); }

    std::vector<double> forward(const ControlPath& h) const;
    ControlPath adjoint(std::span<const double> endpoint_weights) const;
    /// out = Phi Phi* y
    std::vector<double> gramian_apply(std::span<const double> y) const;

private:
    const SolverContext& ctx_;
    LinearizedPropagator prop_;
};

struct RateOptions {
    double tolerance = 1e-8;  // relative endpoint residual
    long max_iterations = 0;  // 0: 10 * (control modes * steps)
};

struct RateFunctionResult {
    double value = 0.0;  // action(control)
    ControlPath control;
    double endpoint_residual = 0.0;  // ||Z_h(T) - target||_2 over coefficients
    long iterations = 0;
    bool converged = false;
};

/// Minimum-energy control reaching `target` at T; value is
/// 1/2 target^T G^+ target with G = Phi Phi*. Conjugate gradients on
/// G mu = target, control = Phi* mu. converged means the true endpoint
/// residual is within tolerance * ||target||.
RateFunctionResult rate_function_endpoint(const SolverContext& ctx, const ReferenceSolution& ref,
                                          std::span<const double> target, const RateOptions& options = {});

/// Dense Phi Phi* restricted to the first mode_cap state modes (mode_cap <= 16).
Eigen::MatrixXd controllability_gramian(const SolverContext& ctx, const ReferenceSolution& ref, int mode_cap);

/// 1/2 target^T G^+ target with eigenvalues below rel_cutoff * max dropped.
double gramian_rate_value(const Eigen::MatrixXd& gramian, std::span<const double> target,
                          double rel_cutoff = 1e-12);

/// {value, endpoint_residual, iterations, converged, control_file}
std::string to_json(const RateFunctionResult& result, const std::string& control_file);

/// Wilson score interval for k successes in n trials.
std::pair<double, double> wilson_interval(long k, long n, double z = 1.959963984540054);

struct TailSample {
    double eps = 0.0;
    double sup_norm = 0.0;  // sup_t ||Z_eps(t)||_{L^p}; +inf for stopped paths
};

struct TailEstimate {
    double eps = 0.0;
    double rho = 0.0;
    long n_paths = 0;
    long n_exceed = 0;
    double probability = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct TailReport {
    std::vector<double> eps;   // distinct values, order of first appearance
    std::vector<double> rhos;  // ascending
    std::vector<TailEstimate> estimates;  // eps-major
    std::vector<double> sup_over_eps;     // per rho: max_eps probability
    bool monotone_in_rho = true;

    const TailEstimate& at(std::size_t eps_index, std::size_t rho_index) const {
        return estimates[eps_index * rhos.size() + rho_index];
    }
};

/// Empirical P(sup_t ||Z_eps||_{L^p} > rho) per eps with Wilson 95% intervals.
TailReport mdp_tail_estimate(std::span<const TailSample> ensemble, std::span<const double> rhos);

/// Convenience overload: sup norms computed from stored trajectories.
TailReport mdp_tail_estimate(const SolverContext& ctx, std::span<const std::pair<double, Trajectory>> ensemble,
                             std::span<const double> rhos);

std::string to_json(const TailReport& report);

}  // namespace sgbh
