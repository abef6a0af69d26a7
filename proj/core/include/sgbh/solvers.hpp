#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sgbh/model.hpp"
#include "sgbh/noise.hpp"
#include "sgbh/spectral.hpp"

namespace sgbh {

/// A run that cannot continue for numerical reasons (blow-up of a reference
/// path, non-finite linearised state). Distinct from bad input and I/O.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    double dt = 1e-3;
    double t_end = 0.25;
    int n_modes = 32;
    int n_points = 256;
    double blowup_threshold = 1e3;  // BlowupGuard level M on the L^p norm

    /// t_end / dt rounded; validate() rejects non-integral ratios.
    int n_steps() const;
    void validate() const;
};

enum class SolveStatus { completed, blowup, non_finite };

/// Spectral coefficients at t_k = k dt, k = 0..n_stored()-1.
struct Trajectory {
    double dt = 0.0;
    int n_modes = 0;
    int n_points = 0;
    std::vector<double> times;
    std::vector<double> coeffs;  // row-major, one row per stored time
    SolveStatus status = SolveStatus::completed;
    std::optional<double> stopped_at;

    int n_stored() const noexcept { return static_cast<int>(times.size()); }
    int n_steps() const noexcept { return n_stored() - 1; }
    bool completed() const noexcept { return status == SolveStatus::completed; }

    std::span<const double> at(int k) const noexcept {
        return {coeffs.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(n_modes),
                static_cast<std::size_t>(n_modes)};
    }
    std::span<const double> final_state() const noexcept { return at(n_stored() - 1); }
};

/// Stopping rule tau = inf{t : ||u(t)||_{L^p} > M}.
class BlowupGuard {
public:
    explicit BlowupGuard(double threshold) : threshold_(threshold) {}

    double threshold() const noexcept { return threshold_; }
    std::optional<double> tripped_at() const noexcept { return tripped_at_; }

    /// Returns true (and latches the time) the first time norm > threshold.
    bool check(double norm, double t) noexcept {
        if (!tripped_at_ && norm > threshold_) tripped_at_ = t;
        return tripped_at_.has_value();
    }

private:
    double threshold_;
    std::optional<double> tripped_at_;
};

/// Immutable problem description shared by all solvers and ensemble workers.
///
/// Time stepping is the exponential Euler scheme in the sine basis. With
/// x_k = nu lambda_k dt the per-mode update is
///
///   z_k <- e^{-x_k} z_k + dt phi1(x_k) F_k + sigma(x_k) N_k
///
/// where F collects drift and control forcing frozen at the left endpoint,
/// N is the projected noise increment (Ito, left point), phi1(x) = (1-e^{-x})/x
/// and sigma(x) = sqrt((1-e^{-2x})/(2x)). Both weights make the scheme exact
/// for the linear heat part: constant forcing reproduces the continuum
/// response and additive noise reproduces the exact Ornstein-Uhlenbeck
/// variance per step.
class SolverContext {
public:
    SolverContext(ModelParams params, NoiseCoefficient coefficient, NoiseSpec noise, SolverConfig config);

    const ModelParams& params() const noexcept { return params_; }
    const NoiseCoefficient& coefficient() const noexcept { return coefficient_; }
    const NoiseSpec& noise_spec() const noexcept { return noise_; }
    const SolverConfig& config() const noexcept { return config_; }
    const SpectralBasis& basis() const noexcept { return basis_; }

    int n_modes() const noexcept { return basis_.n_modes(); }
    int n_noise_modes() const noexcept { return noise_.n_modes(); }
    int n_points() const noexcept { return basis_.n_points(); }
    int n_steps() const noexcept { return n_steps_; }
    double dt() const noexcept { return config_.dt; }

    bool has_advection() const noexcept { return params_.alpha != 0.0; }
    bool has_reaction() const noexcept { return params_.beta != 0.0; }
    bool has_nonlinearity() const noexcept { return has_advection() || has_reaction(); }

    std::span<const double> decay() const noexcept { return decay_; }
    std::span<const double> drift_weight() const noexcept { return drift_weight_; }
    std::span<const double> noise_weight() const noexcept { return noise_weight_; }

    /// L^p norm (p = params().p_norm) of the field with these coefficients.
    double lp_norm(std::span<const double> coeffs) const;
    double lp_norm(std::span<const double> coeffs, double p) const;

    /// Coefficients of A sin(pi x) (band-limited, mode 1 only).
    std::vector<double> sine_initial_condition(double amplitude) const;

private:
    ModelParams params_;
    NoiseCoefficient coefficient_;
    NoiseSpec noise_;
    SolverConfig config_;
    SpectralBasis basis_;
    int n_steps_;
    std::vector<double> decay_;
    std::vector<double> drift_weight_;
    std::vector<double> noise_weight_;
};

/// Deterministic solution u_0 together with the grid data every linearised
/// or rescaled solver needs at each step: u_0, p'(u_0), c'(u_0), g(u_0).
class ReferenceSolution {
public:
    ReferenceSolution(const SolverContext& ctx, Trajectory u0);

    const Trajectory& trajectory() const noexcept { return trajectory_; }
    int n_steps() const noexcept { return trajectory_.n_steps(); }

    std::span<const double> samples(int step) const noexcept { return row(samples_, step); }
    std::span<const double> flux_slope(int step) const noexcept { return row(flux_slope_, step); }
    std::span<const double> reaction_slope(int step) const noexcept { return row(reaction_slope_, step); }
    std::span<const double> amplitude(int step) const noexcept { return row(amplitude_, step); }

private:
    std::span<const double> row(const std::vector<double>& v, int step) const noexcept {
        return {v.data() + static_cast<std::size_t>(step) * n_points_, n_points_};
    }

    Trajectory trajectory_;
    std::size_t n_points_;
    std::vector<double> samples_;
    std::vector<double> flux_slope_;
    std::vector<double> reaction_slope_;
    std::vector<double> amplitude_;
};

/// Speed lambda(eps) = eps^(-theta). theta = 0 gives lambda = 1, the central
/// limit scaling; moderate deviations use theta in (0, 1/2).
class SpeedFunction {
public:
    explicit SpeedFunction(double theta);

    double theta() const noexcept { return theta_; }
    double operator()(double eps) const;
    /// sqrt(eps) * lambda(eps) = eps^(1/2 - theta)
    double scale(double eps) const;
    /// 1 / lambda(eps) = eps^theta
    double inverse(double eps) const;

private:
    double theta_;
};

/// u_0 from initial coefficients u0 (length n_modes).
Trajectory solve_deterministic(const SolverContext& ctx, std::span<const double> u0);

/// u_eps driven by sqrt(eps) g(u) dW^Q.
Trajectory solve_spde(const SolverContext& ctx, std::span<const double> u0, double eps,
                      const NoiseRealization& noise);

/// Gaussian limit field v: linearisation around u_0 with additive noise g(u_0) dW^Q.
Trajectory solve_clt_limit(const SolverContext& ctx, const ReferenceSolution& ref,
                           const NoiseRealization& noise);

/// Z_eps = (u_eps - u_0) / (sqrt(eps) lambda(eps)), integrated from its own
/// mild equation. Nonlinear increments are evaluated as exact binomial
/// quotients so there is no cancellation as sqrt(eps) lambda(eps) -> 0.
Trajectory solve_mdp_process(const SolverContext& ctx, const ReferenceSolution& ref, double eps,
                             const SpeedFunction& speed, const NoiseRealization& noise);

/// Z_{eps,h}: Z_eps plus control forcing sum_j sigma_j(u_0 + sqrt(eps) lambda Z) hdot_j.
/// eps = 0 freezes the coefficients at u_0.
Trajectory solve_controlled(const SolverContext& ctx, const ReferenceSolution& ref, double eps,
                            const SpeedFunction& speed, const NoiseRealization& noise,
                            const ControlPath& control);

/// Skeleton Z_h: deterministic linearised dynamics forced by sigma(u_0) hdot.
Trajectory solve_skeleton(const SolverContext& ctx, const ReferenceSolution& ref, const ControlPath& control);

/// One step of the skeleton dynamics and its transpose. solve_skeleton and
/// the rate-function optimiser both use this so the adjoint is exact.
///
///   forward:  z' = A_n z + dt W B_n h
///   adjoint:  y  -> A_n^T y,   y -> B_n^T W y
///
/// with A_n = E + dt W L_n, L_n the linearised drift at step n, B_n the
/// control-to-state operator hdot -> P[g(u_0) sum_j q_j phi_j hdot_j].
class LinearizedPropagator {
public:
    LinearizedPropagator(const SolverContext& ctx, const ReferenceSolution& ref);

    const SolverContext& context() const noexcept { return ctx_; }
    int n_steps() const noexcept { return ref_.n_steps(); }

    /// out = A_n z + dt W B_n hdot; hdot may be empty (no control).
    void step(int n, std::span<const double> z, std::span<const double> hdot, std::span<double> out) const;

    /// costate_out = A_n^T costate; control_out (length n_noise_modes) = B_n^T W costate.
    void step_transpose(int n, std::span<const double> costate, std::span<double> costate_out,
                        std::span<double> control_out) const;

private:
    void linear_drift(int n, std::span<const double> z, std::span<double> out) const;
    void control_to_state(int n, std::span<const double> hdot, std::span<double> out) const;

    const SolverContext& ctx_;
    const ReferenceSolution& ref_;
    mutable std::vector<double> grid_a_;
    mutable std::vector<double> grid_b_;
    mutable std::vector<double> modes_a_;
    mutable std::vector<double> modes_b_;
    mutable std::vector<double> forcing_;
};

/// Per-time L^p norms of a trajectory (p defaults to params().p_norm).
std::vector<double> trajectory_norms(const SolverContext& ctx, const Trajectory& traj,
                                     std::optional<double> p = std::nullopt);

/// sup_k ||a(t_k) - b(t_k)||_{L^p} / scale over the common stored steps.
double sup_distance(const SolverContext& ctx, const Trajectory& a, const Trajectory& b, double p,
                    double scale = 1.0);

}  // namespace sgbh
