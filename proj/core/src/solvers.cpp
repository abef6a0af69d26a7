#include "sgbh/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sgbh {

int SolverConfig::n_steps() const { return static_cast<int>(std::llround(t_end / dt)); }

void SolverConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("solver.dt must be > 0");
    if (!(t_end > 0.0)) throw std::invalid_argument("solver.t_end must be > 0");
    const double ratio = t_end / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || std::round(ratio) < 1.0) {
        throw std::invalid_argument("solver.t_end / solver.dt must be a positive integer");
    }
    if (ratio > 1e9) throw std::invalid_argument("solver: too many time steps");
    if (n_modes <= 0) throw std::invalid_argument("solver.modes must be positive");
    if (n_points < 4 * n_modes) throw std::invalid_argument("solver.grid must be at least 4 * solver.modes");
    if (!(blowup_threshold > 0.0)) throw std::invalid_argument("solver.blowup_threshold must be > 0");
}

SolverContext::SolverContext(ModelParams params, NoiseCoefficient coefficient, NoiseSpec noise,
                             SolverConfig config)
    : params_(params),
      coefficient_(coefficient),
      noise_(std::move(noise)),
      config_(config),
      basis_((config.validate(), params.validate(), config.n_modes), Grid1D(config.n_points)),
      n_steps_(config.n_steps()) {
    if (noise_.n_modes() > config_.n_modes) {
        throw std::invalid_argument("noise.modes must not exceed solver.modes");
    }
    // Quadrature of p(u) phi_k' and c(u) phi_k is exact for band-limited u
    // when the grid resolves degree (delta + 1) * n_modes.
    if (has_nonlinearity() && config_.n_points < (params_.delta + 1) * config_.n_modes) {
        throw std::invalid_argument("solver.grid must be at least (delta + 1) * solver.modes to resolve the "
                                    "nonlinear terms, got " +
                                    std::to_string(config_.n_points));
    }
    const auto J = static_cast<std::size_t>(config_.n_modes);
    decay_.resize(J);
    drift_weight_.resize(J);
    noise_weight_.resize(J);
    for (std::size_t k = 0; k < J; ++k) {
        const double x = params_.nu * basis_.eigenvalue(static_cast<int>(k)) * config_.dt;
        decay_[k] = std::exp(-x);
        drift_weight_[k] = -std::expm1(-x) / x;
        noise_weight_[k] = std::sqrt(-std::expm1(-2.0 * x) / (2.0 * x));
    }
}

double SolverContext::lp_norm(std::span<const double> coeffs) const { return lp_norm(coeffs, params_.p_norm); }

double SolverContext::lp_norm(std::span<const double> coeffs, double p) const {
    const auto samples = basis_.to_grid(coeffs);
    return basis_.grid().lp_norm(samples, p);
}

std::vector<double> SolverContext::sine_initial_condition(double amplitude) const {
    std::vector<double> a(static_cast<std::size_t>(n_modes()), 0.0);
    a[0] = amplitude / std::numbers::sqrt2;
    return a;
}

ReferenceSolution::ReferenceSolution(const SolverContext& ctx, Trajectory u0)
    : trajectory_(std::move(u0)), n_points_(static_cast<std::size_t>(ctx.n_points())) {
    if (!trajectory_.completed()) {
        throw std::invalid_argument("reference solution stopped early; cannot linearise around it");
    }
    if (trajectory_.n_modes != ctx.n_modes() || trajectory_.n_steps() != ctx.n_steps() ||
        std::abs(trajectory_.dt - ctx.dt()) > 1e-12 * ctx.dt()) {
        throw std::invalid_argument("reference solution time grid or mode count does not match the solver");
    }
    const auto& m = ctx.params();
    const auto rows = static_cast<std::size_t>(trajectory_.n_stored());
    samples_.resize(rows * n_points_);
    flux_slope_.resize(rows * n_points_);
    reaction_slope_.resize(rows * n_points_);
    amplitude_.resize(rows * n_points_);
    for (std::size_t r = 0; r < rows; ++r) {
        std::span<double> u(samples_.data() + r * n_points_, n_points_);
        ctx.basis().to_grid(trajectory_.at(static_cast<int>(r)), u);
        for (std::size_t i = 0; i < n_points_; ++i) {
            const std::size_t idx = r * n_points_ + i;
            flux_slope_[idx] = advective_flux_derivative(u[i], m.delta);
            reaction_slope_[idx] = reaction_derivative(u[i], m.gamma, m.delta);
            amplitude_[idx] = ctx.coefficient()(trajectory_.times[r], ctx.basis().grid().node(static_cast<int>(i)),
                                                u[i]);
        }
    }
}

SpeedFunction::SpeedFunction(double theta) : theta_(theta) {
    if (!(theta >= 0.0 && theta < 0.5)) throw std::invalid_argument("speed theta must lie in [0, 1/2)");
}

double SpeedFunction::operator()(double eps) const { return std::pow(eps, -theta_); }

double SpeedFunction::scale(double eps) const { return std::pow(eps, 0.5 - theta_); }

double SpeedFunction::inverse(double eps) const { return std::pow(eps, theta_); }

namespace {

enum class DriftKind { full, increment, linearized };

struct EngineSetup {
    DriftKind kind = DriftKind::full;
    const ReferenceSolution* ref = nullptr;
    double scale = 0.0;        // sqrt(eps) lambda(eps) for the increment kind
    double noise_scale = 0.0;  // multiplies the projected noise increment
    const NoiseRealization* noise = nullptr;
    const ControlPath* control = nullptr;
};

void check_eps(double eps, const char* who) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument(std::string(who) + ": eps must lie in [0, 1]");
}

void check_grid(const SolverContext& ctx, int n_modes, int n_steps, double dt, const char* what) {
    if (n_steps != ctx.n_steps() || std::abs(dt - ctx.dt()) > 1e-12 * ctx.dt()) {
        throw std::invalid_argument(std::string(what) + " time grid does not match the solver (n_steps " +
                                    std::to_string(n_steps) + " vs " + std::to_string(ctx.n_steps()) + ")");
    }
    if (n_modes > ctx.n_noise_modes()) {
        throw std::invalid_argument(std::string(what) + " has more modes than the noise spec");
    }
}

/// Explicit exponential Euler integration shared by every solver. The update
/// order is fixed so zero noise / zero control reproduce the bits of the
/// unforced solvers.
class Engine {
public:
    Engine(const SolverContext& ctx, const EngineSetup& setup) : ctx_(ctx), s_(setup) {
        const auto J = static_cast<std::size_t>(ctx.n_modes());
        const auto n = static_cast<std::size_t>(ctx.n_points());
        state_.resize(J);
        next_.resize(J);
        drift_.resize(J);
        forcing_.resize(J);
        padded_.resize(J);
        field_coeffs_.resize(J);
        state_grid_.resize(n);
        arg_grid_.resize(n);
        flux_.resize(n);
        source_.resize(n);
        product_.resize(n);
        if (s_.kind != DriftKind::full && s_.ref == nullptr) throw std::logic_error("engine needs a reference");
        const auto& g = ctx.coefficient();
        noise_on_ = s_.noise != nullptr && s_.noise_scale != 0.0 && !g.is_zero();
        control_on_ = s_.control != nullptr && !g.is_zero();
        const bool amplitude_on = (noise_on_ || control_on_) && !g.is_state_independent();
        need_state_grid_ = ctx.has_nonlinearity() || (amplitude_on && s_.kind == DriftKind::increment);
        need_arg_grid_ = amplitude_on;
    }

    Trajectory run(std::span<const double> initial) {
        const int N = ctx_.n_steps();
        const auto J = static_cast<std::size_t>(ctx_.n_modes());
        if (initial.size() != J) {
            throw std::invalid_argument("initial data has " + std::to_string(initial.size()) + " modes, expected " +
                                        std::to_string(J));
        }
        Trajectory traj;
        traj.dt = ctx_.dt();
        traj.n_modes = ctx_.n_modes();
        traj.n_points = ctx_.n_points();
        traj.times.reserve(static_cast<std::size_t>(N) + 1);
        traj.coeffs.reserve((static_cast<std::size_t>(N) + 1) * J);
        std::copy(initial.begin(), initial.end(), state_.begin());

        BlowupGuard guard(ctx_.config().blowup_threshold);
        const auto E = ctx_.decay();
        const auto w = ctx_.drift_weight();
        const auto m = ctx_.noise_weight();
        const double dt = ctx_.dt();

        for (int n = 0;; ++n) {
            const double t = n * dt;
            if (!all_finite(state_)) {
                traj.status = SolveStatus::non_finite;
                traj.stopped_at = t;
                break;
            }
            if (need_state_grid_) ctx_.basis().to_grid(state_, state_grid_);
            if (guarded() && exceeds(guard, n, t)) {
                traj.status = SolveStatus::blowup;
                traj.stopped_at = t;
                break;
            }
            traj.times.push_back(t);
            traj.coeffs.insert(traj.coeffs.end(), state_.begin(), state_.end());
            if (n == N) break;

            if (need_arg_grid_) amplitude_argument(n);
            const bool drift_on = ctx_.has_nonlinearity();
            if (drift_on) compute_drift(n);
            if (control_on_) project_forcing(*s_.control, n, 1.0);
            for (std::size_t k = 0; k < J; ++k) {
                const double f = drift_on ? (control_on_ ? drift_[k] + forcing_[k] : drift_[k])
                                          : (control_on_ ? forcing_[k] : 0.0);
                next_[k] = E[k] * state_[k] + dt * w[k] * f;
            }
            if (noise_on_) {
                project_forcing(*s_.noise, n, s_.noise_scale);
                for (std::size_t k = 0; k < J; ++k) next_[k] += m[k] * forcing_[k];
            }
            state_.swap(next_);
        }
        return traj;
    }

private:
    bool guarded() const noexcept { return s_.kind != DriftKind::linearized; }

    static bool all_finite(std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    }

    // Coefficients of the physical field u at step n.
    std::span<const double> field_coefficients(int n) {
        if (s_.kind == DriftKind::full) return state_;
        const auto u0 = s_.ref->trajectory().at(n);
        for (std::size_t k = 0; k < field_coeffs_.size(); ++k) field_coeffs_[k] = u0[k] + s_.scale * state_[k];
        return field_coeffs_;
    }

    bool exceeds(BlowupGuard& guard, int n, double t) {
        const double M = guard.threshold();
        const auto a = field_coefficients(n);
        // Cheap screen: ||u||_{L^p} <= sup|u| <= sqrt(2) sum |a_k| on a unit interval.
        double bound = 0.0;
        for (double v : a) bound += std::abs(v);
        bound *= std::numbers::sqrt2;
        if (bound <= M) return false;
        const auto& grid = ctx_.basis().grid();
        double norm = 0.0;
        if (s_.kind == DriftKind::full && need_state_grid_) {
            norm = grid.lp_norm(state_grid_, ctx_.params().p_norm);
        } else {
            ctx_.basis().to_grid(a, product_);
            norm = grid.lp_norm(product_, ctx_.params().p_norm);
        }
        return guard.check(norm, t);
    }

    // Grid values r at which g(t, x, r) is evaluated.
    void amplitude_argument(int n) {
        const std::size_t np = arg_grid_.size();
        switch (s_.kind) {
            case DriftKind::full:
                if (!need_state_grid_) ctx_.basis().to_grid(state_, state_grid_);
                std::copy(state_grid_.begin(), state_grid_.end(), arg_grid_.begin());
                break;
            case DriftKind::increment: {
                const auto u0 = s_.ref->samples(n);
                for (std::size_t i = 0; i < np; ++i) arg_grid_[i] = u0[i] + s_.scale * state_grid_[i];
                break;
            }
            case DriftKind::linearized: {
                const auto u0 = s_.ref->samples(n);
                std::copy(u0.begin(), u0.end(), arg_grid_.begin());
                break;
            }
        }
    }

    void compute_drift(int n) {
        const auto& mp = ctx_.params();
        const double ca = mp.alpha / (mp.delta + 1);
        const double cb = mp.beta;
        const std::size_t np = flux_.size();
        switch (s_.kind) {
            case DriftKind::full:
                for (std::size_t i = 0; i < np; ++i) {
                    const double u = state_grid_[i];
                    flux_[i] = ca * advective_flux(u, mp.delta);
                    source_[i] = cb * reaction(u, mp.gamma, mp.delta);
                }
                break;
            case DriftKind::increment: {
                const auto u0 = s_.ref->samples(n);
                for (std::size_t i = 0; i < np; ++i) {
                    const double z = state_grid_[i];
                    flux_[i] = ca * advective_increment_quotient(u0[i], z, s_.scale, mp.delta);
                    source_[i] = cb * reaction_increment_quotient(u0[i], z, s_.scale, mp.gamma, mp.delta);
                }
                break;
            }
            case DriftKind::linearized: {
                const auto dp = s_.ref->flux_slope(n);
                const auto dc = s_.ref->reaction_slope(n);
                for (std::size_t i = 0; i < np; ++i) {
                    const double z = state_grid_[i];
                    flux_[i] = ca * dp[i] * z;
                    source_[i] = cb * dc[i] * z;
                }
                break;
            }
        }
        ctx_.basis().project_weak(flux_, source_, drift_);
    }

    // forcing_ = scale * P[g(r) sum_j q_j phi_j x_j] with x the step-n column
    // of a noise increment or control rate.
    template <typename Path>
    void project_forcing(const Path& path, int n, double scale) {
        const auto& g = ctx_.coefficient();
        const auto q = ctx_.noise_spec().weights();
        const int Jn = path.n_modes;
        const std::size_t J = forcing_.size();
        for (int k = 0; k < Jn; ++k) padded_[static_cast<std::size_t>(k)] = q[static_cast<std::size_t>(k)] * path(k, n);
        for (std::size_t k = static_cast<std::size_t>(Jn); k < J; ++k) padded_[k] = 0.0;
        const double slope = g.slope();
        if (slope != 0.0) {
            ctx_.basis().to_grid(padded_, product_);
            for (std::size_t i = 0; i < product_.size(); ++i) product_[i] *= arg_grid_[i];
            ctx_.basis().to_spectral(product_, forcing_);
            for (std::size_t k = 0; k < J; ++k) forcing_[k] = scale * (g.kappa0 * padded_[k] + slope * forcing_[k]);
        } else {
            for (std::size_t k = 0; k < J; ++k) forcing_[k] = scale * (g.kappa0 * padded_[k]);
        }
    }

    const SolverContext& ctx_;
    EngineSetup s_;
    bool noise_on_ = false;
    bool control_on_ = false;
    bool need_state_grid_ = false;
    bool need_arg_grid_ = false;
    std::vector<double> state_, next_, drift_, forcing_, padded_, field_coeffs_;
    std::vector<double> state_grid_, arg_grid_, flux_, source_, product_;
};

std::vector<double> zeros_for(const SolverContext& ctx) {
    return std::vector<double>(static_cast<std::size_t>(ctx.n_modes()), 0.0);
}

}  // namespace

Trajectory solve_deterministic(const SolverContext& ctx, std::span<const double> u0) {
    EngineSetup setup;
    return Engine(ctx, setup).run(u0);
}

Trajectory solve_spde(const SolverContext& ctx, std::span<const double> u0, double eps,
                      const NoiseRealization& noise) {
    check_eps(eps, "solve_spde");
    check_grid(ctx, noise.n_modes, noise.n_steps, noise.dt, "noise");
    EngineSetup setup;
    setup.noise = &noise;
    setup.noise_scale = std::sqrt(eps);
    return Engine(ctx, setup).run(u0);
}

Trajectory solve_clt_limit(const SolverContext& ctx, const ReferenceSolution& ref,
                           const NoiseRealization& noise) {
    check_grid(ctx, noise.n_modes, noise.n_steps, noise.dt, "noise");
    EngineSetup setup;
    setup.kind = DriftKind::linearized;
    setup.ref = &ref;
    setup.noise = &noise;
    setup.noise_scale = 1.0;
    return Engine(ctx, setup).run(zeros_for(ctx));
}

namespace {

EngineSetup increment_setup(const ReferenceSolution& ref, double eps, const SpeedFunction& speed) {
    EngineSetup setup;
    setup.kind = DriftKind::increment;
    setup.ref = &ref;
    setup.scale = speed.scale(eps);
    setup.noise_scale = speed.inverse(eps);
    return setup;
}

}  // namespace

Trajectory solve_mdp_process(const SolverContext& ctx, const ReferenceSolution& ref, double eps,
                             const SpeedFunction& speed, const NoiseRealization& noise) {
    check_eps(eps, "solve_mdp_process");
    if (eps == 0.0) throw std::invalid_argument("solve_mdp_process: eps must be > 0");
    check_grid(ctx, noise.n_modes, noise.n_steps, noise.dt, "noise");
    EngineSetup setup = increment_setup(ref, eps, speed);
    setup.noise = &noise;
    return Engine(ctx, setup).run(zeros_for(ctx));
}

Trajectory solve_controlled(const SolverContext& ctx, const ReferenceSolution& ref, double eps,
                            const SpeedFunction& speed, const NoiseRealization& noise,
                            const ControlPath& control) {
    check_eps(eps, "solve_controlled");
    check_grid(ctx, noise.n_modes, noise.n_steps, noise.dt, "noise");
    check_grid(ctx, control.n_modes, control.n_steps, control.dt, "control");
    EngineSetup setup = increment_setup(ref, eps, speed);
    setup.noise = &noise;
    setup.control = &control;
    return Engine(ctx, setup).run(zeros_for(ctx));
}

Trajectory solve_skeleton(const SolverContext& ctx, const ReferenceSolution& ref, const ControlPath& control) {
    check_grid(ctx, control.n_modes, control.n_steps, control.dt, "control");
    const LinearizedPropagator prop(ctx, ref);
    const int N = ctx.n_steps();
    const auto J = static_cast<std::size_t>(ctx.n_modes());
    Trajectory traj;
    traj.dt = ctx.dt();
    traj.n_modes = ctx.n_modes();
    traj.n_points = ctx.n_points();
    traj.times.resize(static_cast<std::size_t>(N) + 1);
    traj.coeffs.assign((static_cast<std::size_t>(N) + 1) * J, 0.0);
    std::vector<double> hdot(static_cast<std::size_t>(ctx.n_noise_modes()), 0.0);
    for (int n = 0; n < N; ++n) {
        traj.times[static_cast<std::size_t>(n)] = n * ctx.dt();
        for (int k = 0; k < control.n_modes; ++k) hdot[static_cast<std::size_t>(k)] = control(k, n);
        std::span<double> out(traj.coeffs.data() + (static_cast<std::size_t>(n) + 1) * J, J);
        prop.step(n, traj.at(n), hdot, out);
    }
    traj.times[static_cast<std::size_t>(N)] = N * ctx.dt();
    if (!std::all_of(traj.coeffs.begin(), traj.coeffs.end(), [](double v) { return std::isfinite(v); })) {
        throw NumericalError("solve_skeleton: non-finite state");
    }
    return traj;
}

LinearizedPropagator::LinearizedPropagator(const SolverContext& ctx, const ReferenceSolution& ref)
    : ctx_(ctx),
      ref_(ref),
      grid_a_(static_cast<std::size_t>(ctx.n_points())),
      grid_b_(static_cast<std::size_t>(ctx.n_points())),
      modes_a_(static_cast<std::size_t>(ctx.n_modes())),
      modes_b_(static_cast<std::size_t>(ctx.n_modes())),
      forcing_(static_cast<std::size_t>(ctx.n_modes())) {
    if (ref.n_steps() != ctx.n_steps()) throw std::invalid_argument("reference does not match the solver grid");
}

// modes_a_ = L_n z
void LinearizedPropagator::linear_drift(int n, std::span<const double> z, std::span<double> out) const {
    const auto& mp = ctx_.params();
    const double ca = mp.alpha / (mp.delta + 1);
    const auto dp = ref_.flux_slope(n);
    const auto dc = ref_.reaction_slope(n);
    ctx_.basis().to_grid(z, grid_a_);
    for (std::size_t i = 0; i < grid_a_.size(); ++i) {
        grid_b_[i] = ca * dp[i] * grid_a_[i];
        grid_a_[i] = mp.beta * dc[i] * grid_a_[i];
    }
    ctx_.basis().project_weak(grid_b_, grid_a_, out);
}

// out = B_n hdot = P[g(u_0) sum_j q_j phi_j hdot_j]
void LinearizedPropagator::control_to_state(int n, std::span<const double> hdot, std::span<double> out) const {
    const auto& g = ctx_.coefficient();
    const auto q = ctx_.noise_spec().weights();
    const std::size_t J = out.size();
    for (std::size_t k = 0; k < J; ++k) modes_b_[k] = k < hdot.size() ? q[k] * hdot[k] : 0.0;
    if (g.slope() != 0.0) {
        const auto u0 = ref_.samples(n);
        ctx_.basis().to_grid(modes_b_, grid_a_);
        for (std::size_t i = 0; i < grid_a_.size(); ++i) grid_a_[i] *= u0[i];
        ctx_.basis().to_spectral(grid_a_, out);
        for (std::size_t k = 0; k < J; ++k) out[k] = g.kappa0 * modes_b_[k] + g.slope() * out[k];
    } else {
        for (std::size_t k = 0; k < J; ++k) out[k] = g.kappa0 * modes_b_[k];
    }
}

void LinearizedPropagator::step(int n, std::span<const double> z, std::span<const double> hdot,
                                std::span<double> out) const {
    const auto E = ctx_.decay();
    const auto w = ctx_.drift_weight();
    const double dt = ctx_.dt();
    const std::size_t J = out.size();
    std::fill(modes_a_.begin(), modes_a_.end(), 0.0);
    if (ctx_.has_nonlinearity()) linear_drift(n, z, modes_a_);
    if (!hdot.empty() && !ctx_.coefficient().is_zero()) {
        control_to_state(n, hdot, forcing_);
        for (std::size_t k = 0; k < J; ++k) modes_a_[k] += forcing_[k];
    }
    for (std::size_t k = 0; k < J; ++k) out[k] = E[k] * z[k] + dt * w[k] * modes_a_[k];
}

void LinearizedPropagator::step_transpose(int n, std::span<const double> costate, std::span<double> costate_out,
                                          std::span<double> control_out) const {
    const auto& mp = ctx_.params();
    const auto& g = ctx_.coefficient();
    const auto E = ctx_.decay();
    const auto w = ctx_.drift_weight();
    const auto q = ctx_.noise_spec().weights();
    const double dt = ctx_.dt();
    const std::size_t J = costate.size();
    // y = W costate
    for (std::size_t k = 0; k < J; ++k) modes_b_[k] = w[k] * costate[k];

    // control_out = B_n^T y = q .* P[g(u_0) (sum_k y_k phi_k)] restricted to noise modes
    const std::size_t Jn = control_out.size();
    if (g.is_zero()) {
        std::fill(control_out.begin(), control_out.end(), 0.0);
    } else if (g.slope() != 0.0) {
        const auto u0 = ref_.samples(n);
        ctx_.basis().to_grid(modes_b_, grid_a_);
        for (std::size_t i = 0; i < grid_a_.size(); ++i) grid_a_[i] *= u0[i];
        ctx_.basis().to_spectral(grid_a_, modes_a_);
        for (std::size_t k = 0; k < Jn; ++k) control_out[k] = q[k] * (g.kappa0 * modes_b_[k] + g.slope() * modes_a_[k]);
    } else {
        for (std::size_t k = 0; k < Jn; ++k) control_out[k] = q[k] * (g.kappa0 * modes_b_[k]);
    }

    // costate_out = E costate + dt L_n^T y
    if (ctx_.has_nonlinearity()) {
        const double ca = mp.alpha / (mp.delta + 1);
        const auto dp = ref_.flux_slope(n);
        const auto dc = ref_.reaction_slope(n);
        ctx_.basis().derivative_to_grid(modes_b_, grid_a_);
        ctx_.basis().to_grid(modes_b_, grid_b_);
        for (std::size_t i = 0; i < grid_a_.size(); ++i) {
            grid_a_[i] = ca * dp[i] * grid_a_[i] + mp.beta * dc[i] * grid_b_[i];
        }
        ctx_.basis().to_spectral(grid_a_, modes_a_);
        for (std::size_t k = 0; k < J; ++k) costate_out[k] = E[k] * costate[k] + dt * modes_a_[k];
    } else {
        for (std::size_t k = 0; k < J; ++k) costate_out[k] = E[k] * costate[k];
    }
}

std::vector<double> trajectory_norms(const SolverContext& ctx, const Trajectory& traj, std::optional<double> p) {
    const double pp = p.value_or(ctx.params().p_norm);
    std::vector<double> out(static_cast<std::size_t>(traj.n_stored()));
    std::vector<double> samples(static_cast<std::size_t>(ctx.n_points()));
    for (int k = 0; k < traj.n_stored(); ++k) {
        ctx.basis().to_grid(traj.at(k), samples);
        out[static_cast<std::size_t>(k)] = ctx.basis().grid().lp_norm(samples, pp);
    }
    return out;
}

double sup_distance(const SolverContext& ctx, const Trajectory& a, const Trajectory& b, double p, double scale) {
    if (a.n_modes != b.n_modes || a.n_modes != ctx.n_modes()) {
        throw std::invalid_argument("sup_distance: mode counts differ");
    }
    const int n = std::min(a.n_stored(), b.n_stored());
    std::vector<double> diff(static_cast<std::size_t>(ctx.n_modes()));
    std::vector<double> samples(static_cast<std::size_t>(ctx.n_points()));
    double sup = 0.0;
    for (int k = 0; k < n; ++k) {
        const auto x = a.at(k);
        const auto y = b.at(k);
        for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = (x[j] - y[j]) / scale;
        ctx.basis().to_grid(diff, samples);
        sup = std::max(sup, ctx.basis().grid().lp_norm(samples, p));
    }
    return sup;
}

}  // namespace sgbh
