#include "sgbh/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace sgbh {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

ControlToEndpointMap::ControlToEndpointMap(const SolverContext& ctx, const ReferenceSolution& ref)
    : ctx_(ctx), prop_(ctx, ref) {}

std::vector<double> ControlToEndpointMap::forward(const ControlPath& h) const {
    if (h.n_modes != n_control_modes() || h.n_steps != n_steps()) {
        throw std::invalid_argument("control path shape does not match the noise modes and time grid");
    }
    const auto J = static_cast<std::size_t>(n_state());
    std::vector<double> z(J, 0.0), next(J);
    std::vector<double> column(static_cast<std::size_t>(h.n_modes));
    for (int n = 0; n < n_steps(); ++n) {
        for (int k = 0; k < h.n_modes; ++k) column[static_cast<std::size_t>(k)] = h(k, n);
        prop_.step(n, z, column, next);
        z.swap(next);
    }
    return z;
}

ControlPath ControlToEndpointMap::adjoint(std::span<const double> endpoint_weights) const {
    const auto J = static_cast<std::size_t>(n_state());
    if (endpoint_weights.size() != J) throw std::invalid_argument("adjoint: endpoint has the wrong length");
    ControlPath h = ControlPath::zeros(n_control_modes(), n_steps(), ctx_.dt());
    std::vector<double> costate(endpoint_weights.begin(), endpoint_weights.end()), previous(J);
    std::vector<double> column(static_cast<std::size_t>(h.n_modes));
    for (int n = n_steps() - 1; n >= 0; --n) {
        prop_.step_transpose(n, costate, previous, column);
        for (int k = 0; k < h.n_modes; ++k) h(k, n) = column[static_cast<std::size_t>(k)];
        costate.swap(previous);
    }
    return h;
}

std::vector<double> ControlToEndpointMap::gramian_apply(std::span<const double> y) const {
    return forward(adjoint(y));
}

RateFunctionResult rate_function_endpoint(const SolverContext& ctx, const ReferenceSolution& ref,
                                          std::span<const double> target, const RateOptions& options) {
    if (target.size() != static_cast<std::size_t>(ctx.n_modes())) {
        throw std::invalid_argument("rate target must have solver.modes coefficients");
    }
    if (!(options.tolerance > 0.0)) throw std::invalid_argument("rate tolerance must be > 0");
    const ControlToEndpointMap phi(ctx, ref);
    const long cap = options.max_iterations > 0
                         ? options.max_iterations
                         : 10L * static_cast<long>(phi.n_control_modes()) * static_cast<long>(phi.n_steps());
    const std::size_t J = target.size();
    const double target_norm = norm2(target);
    const double goal = options.tolerance * target_norm;

    RateFunctionResult result;
    result.control = ControlPath::zeros(phi.n_control_modes(), phi.n_steps(), ctx.dt());
    if (target_norm == 0.0) {
        result.converged = true;
        return result;
    }

    std::vector<double> mu(J, 0.0), r(target.begin(), target.end()), p(J), Ap(J);
    long it = 0;
    double true_residual = target_norm;
    // Outer loop restarts CG from the true residual whenever the recursive
    // residual claims convergence that the true one does not confirm.
    while (it < cap) {
        p = r;
        double rr = dot(r, r);
        bool stalled = false;
        while (it < cap && std::sqrt(rr) > goal) {
            Ap = phi.gramian_apply(p);
            ++it;
            const double pAp = dot(p, Ap);
            if (!(pAp > 0.0) || !std::isfinite(pAp)) {
                stalled = true;
                break;
            }
            const double a = rr / pAp;
            for (std::size_t i = 0; i < J; ++i) {
                mu[i] += a * p[i];
                r[i] -= a * Ap[i];
            }
            const double rr_next = dot(r, r);
            const double b = rr_next / rr;
            rr = rr_next;
            for (std::size_t i = 0; i < J; ++i) p[i] = r[i] + b * p[i];
        }
        const auto achieved = phi.gramian_apply(mu);
        for (std::size_t i = 0; i < J; ++i) r[i] = target[i] - achieved[i];
        const double next_residual = norm2(r);
        const bool improved = next_residual < 0.5 * true_residual;
        true_residual = next_residual;
        if (true_residual <= goal || stalled || !improved) break;
    }

    result.control = phi.adjoint(mu);
    const auto endpoint = phi.forward(result.control);
    double res2 = 0.0;
    for (std::size_t i = 0; i < J; ++i) res2 += (endpoint[i] - target[i]) * (endpoint[i] - target[i]);
    result.endpoint_residual = std::sqrt(res2);
    result.iterations = it;
    result.value = action(result.control);
    result.converged = result.endpoint_residual <= goal;
    return result;
}

Eigen::MatrixXd controllability_gramian(const SolverContext& ctx, const ReferenceSolution& ref, int mode_cap) {
    if (mode_cap < 1 || mode_cap > 16 || mode_cap > ctx.n_modes()) {
        throw std::invalid_argument("controllability_gramian: mode_cap must lie in [1, min(16, modes)]");
    }
    const ControlToEndpointMap phi(ctx, ref);
    const auto cap = static_cast<Eigen::Index>(mode_cap);
    Eigen::MatrixXd G(cap, cap);
    std::vector<double> e(static_cast<std::size_t>(ctx.n_modes()), 0.0);
    for (Eigen::Index c = 0; c < cap; ++c) {
        std::fill(e.begin(), e.end(), 0.0);
        e[static_cast<std::size_t>(c)] = 1.0;
        const auto col = phi.gramian_apply(e);
        for (Eigen::Index r = 0; r < cap; ++r) G(r, c) = col[static_cast<std::size_t>(r)];
    }
    return G;
}

double gramian_rate_value(const Eigen::MatrixXd& gramian, std::span<const double> target, double rel_cutoff) {
    if (gramian.rows() != gramian.cols() || static_cast<std::size_t>(gramian.rows()) != target.size()) {
        throw std::invalid_argument("gramian_rate_value: shape mismatch");
    }
    const Eigen::MatrixXd sym = 0.5 * (gramian + gramian.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::Map<const Eigen::VectorXd> psi(target.data(), static_cast<Eigen::Index>(target.size()));
    const Eigen::VectorXd coords = eig.eigenvectors().transpose() * psi;
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    double value = 0.0;
    for (Eigen::Index i = 0; i < coords.size(); ++i) {
        const double l = eig.eigenvalues()(i);
        if (l > rel_cutoff * top) value += coords(i) * coords(i) / l;
    }
    return 0.5 * value;
}

std::string to_json(const RateFunctionResult& result, const std::string& control_file) {
    nlohmann::ordered_json j;
    j["value"] = result.value;
    j["endpoint_residual"] = result.endpoint_residual;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["control_file"] = control_file;
    return j.dump(2);
}

std::pair<double, double> wilson_interval(long k, long n, double z) {
    if (n <= 0) throw std::invalid_argument("wilson_interval: n must be positive");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    const double lower = k == 0 ? 0.0 : std::max(0.0, center - half);
    const double upper = k == n ? 1.0 : std::min(1.0, center + half);
    return {lower, upper};
}

TailReport mdp_tail_estimate(std::span<const TailSample> ensemble, std::span<const double> rhos) {
    if (ensemble.empty()) throw std::invalid_argument("mdp_tail_estimate: empty ensemble");
    if (rhos.empty()) throw std::invalid_argument("mdp_tail_estimate: no thresholds");
    TailReport report;
    report.rhos.assign(rhos.begin(), rhos.end());
    std::sort(report.rhos.begin(), report.rhos.end());
    for (const auto& s : ensemble) {
        if (std::find(report.eps.begin(), report.eps.end(), s.eps) == report.eps.end()) report.eps.push_back(s.eps);
    }
    report.sup_over_eps.assign(report.rhos.size(), 0.0);
    for (double eps : report.eps) {
        long n = 0;
        for (const auto& s : ensemble) n += s.eps == eps ? 1 : 0;
        double previous = 1.0;
        for (std::size_t r = 0; r < report.rhos.size(); ++r) {
            TailEstimate e;
            e.eps = eps;
            e.rho = report.rhos[r];
            e.n_paths = n;
            for (const auto& s : ensemble) {
                if (s.eps == eps && s.sup_norm > e.rho) ++e.n_exceed;
            }
            e.probability = static_cast<double>(e.n_exceed) / static_cast<double>(n);
            std::tie(e.lower, e.upper) = wilson_interval(e.n_exceed, n);
            if (e.probability > previous) report.monotone_in_rho = false;
            previous = e.probability;
            report.sup_over_eps[r] = std::max(report.sup_over_eps[r], e.probability);
            report.estimates.push_back(e);
        }
    }
    return report;
}

TailReport mdp_tail_estimate(const SolverContext& ctx, std::span<const std::pair<double, Trajectory>> ensemble,
                             std::span<const double> rhos) {
    std::vector<TailSample> samples;
    samples.reserve(ensemble.size());
    for (const auto& [eps, traj] : ensemble) {
        double sup = std::numeric_limits<double>::infinity();
        if (traj.completed()) {
            const auto norms = trajectory_norms(ctx, traj);
            sup = *std::max_element(norms.begin(), norms.end());
        }
        samples.push_back({eps, sup});
    }
    return mdp_tail_estimate(samples, rhos);
}

std::string to_json(const TailReport& report) {
    nlohmann::ordered_json j;
    j["rhos"] = report.rhos;
    j["eps"] = report.eps;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& e : report.estimates) {
        nlohmann::ordered_json row;
        row["eps"] = e.eps;
        row["rho"] = e.rho;
        row["n_paths"] = e.n_paths;
        row["n_exceed"] = e.n_exceed;
        row["probability"] = e.probability;
        row["wilson_lower"] = e.lower;
        row["wilson_upper"] = e.upper;
        rows.push_back(row);
    }
    j["estimates"] = rows;
    j["sup_over_eps"] = report.sup_over_eps;
    j["monotone_in_rho"] = report.monotone_in_rho;
    return j.dump(2);
}

}  // namespace sgbh
