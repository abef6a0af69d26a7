#include "sgbh/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace sgbh {

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::prop31: return "prop31";
        case ExperimentKind::clt: return "clt";
        case ExperimentKind::mdp_tail: return "mdp-tail";
        case ExperimentKind::heat_oracle: return "heat-oracle";
    }
    return "unknown";
}

ExperimentKind parse_experiment(const std::string& text) {
    if (text == "prop31") return ExperimentKind::prop31;
    if (text == "clt") return ExperimentKind::clt;
    if (text == "mdp-tail" || text == "mdp_tail") return ExperimentKind::mdp_tail;
    if (text == "heat-oracle" || text == "heat_oracle") return ExperimentKind::heat_oracle;
    throw std::invalid_argument("unknown experiment \"" + text + "\" (prop31, clt, heat-oracle, mdp-tail)");
}

std::string to_string(PassState state) {
    switch (state) {
        case PassState::pass: return "pass";
        case PassState::fail: return "fail";
        case PassState::skipped: return "skipped";
    }
    return "unknown";
}

void EnsembleSpec::validate() const {
    if (n_paths < 1) throw std::invalid_argument("experiment.paths must be >= 1");
    if (eps_list.empty()) throw std::invalid_argument("experiment.eps must not be empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const double e = eps_list[i];
        if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("experiment.eps values must lie in (0, 1]");
        if (i > 0 && !(e < eps_list[i - 1])) throw std::invalid_argument("experiment.eps must be strictly decreasing");
    }
    if (workers < 0) throw std::invalid_argument("workers must be >= 0");
    if (!(theta >= 0.0 && theta < 0.5)) throw std::invalid_argument("experiment.theta must lie in [0, 1/2)");
    const auto streams = static_cast<unsigned long long>(n_paths) * (coupled ? 1ULL : eps_list.size());
    if (streams > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("too many paths");
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
    if (n <= 0) return;
    int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    w = std::max(1, std::min(w, n));
    if (w == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int t = 0; t < w; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

LogLogFit fit_loglog(std::span<const double> eps, std::span<const double> statistic) {
    if (eps.size() != statistic.size()) throw std::invalid_argument("fit_loglog: length mismatch");
    if (eps.size() < 3) throw std::invalid_argument("fit_loglog: need at least 3 points");
    const auto n = static_cast<double>(eps.size());
    double sx = 0.0, sy = 0.0;
    std::vector<double> x(eps.size()), y(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw std::invalid_argument("fit_loglog: eps must be positive");
        if (!(statistic[i] > 0.0) || !std::isfinite(statistic[i])) {
            throw std::invalid_argument("fit_loglog: statistic must be positive and finite");
        }
        x[i] = std::log(eps[i]);
        y[i] = std::log(statistic[i]);
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_loglog: eps values must not all coincide");
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.r2 = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return fit;
}

namespace {

struct PathResult {
    std::vector<double> stat;      // full-horizon statistic per eps
    std::vector<double> censored;  // sup up to the stopping time
    std::vector<char> completed;
};

std::uint32_t stream_for(const EnsembleSpec& spec, int path, std::size_t eps_index) {
    if (spec.coupled) return static_cast<std::uint32_t>(path);
    return static_cast<std::uint32_t>(static_cast<std::size_t>(path) * spec.eps_list.size() + eps_index);
}

NoiseRealization path_noise(const EnsembleSpec& spec, const SolverContext& ctx, int path, std::size_t eps_index) {
    return sample_noise(ctx.noise_spec(), ctx.dt(), ctx.n_steps(), spec.base_seed, stream_for(spec, path, eps_index));
}

Trajectory reference_trajectory(const SolverContext& ctx, std::span<const double> u0) {
    auto traj = solve_deterministic(ctx, u0);
    if (!traj.completed()) {
        throw NumericalError("deterministic solution stopped at t = " + std::to_string(traj.stopped_at.value_or(0.0)) +
                             "; raise solver.blowup_threshold or shrink the initial data");
    }
    return traj;
}

// sup over stored steps of ||a - b||_{L^p}^power
double sup_norm_power(const SolverContext& ctx, const Trajectory& a, const Trajectory& b, double p, double power) {
    const double d = sup_distance(ctx, a, b, p);
    return power == 1.0 ? d : std::pow(d, power);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

ConvergenceReport reduce(const EnsembleSpec& spec, ExperimentKind kind, double target,
                         const std::vector<PathResult>& paths) {
    ConvergenceReport report;
    report.experiment = kind;
    report.target_slope = target;
    bool rejection_ok = true;
    for (std::size_t e = 0; e < spec.eps_list.size(); ++e) {
        std::vector<double> used, all;
        for (const auto& p : paths) {
            all.push_back(p.censored[e]);
            if (p.completed[e]) used.push_back(p.stat[e]);
        }
        EpsStatistic row;
        row.eps = spec.eps_list[e];
        row.n_used = static_cast<long>(used.size());
        row.n_rejected = static_cast<long>(paths.size() - used.size());
        row.mean = mean_of(used);
        row.stderr_ = stderr_of(used, row.mean);
        row.censored_mean = mean_of(all);
        row.censored_stderr = stderr_of(all, row.censored_mean);
        if (static_cast<double>(row.n_rejected) > spec.max_rejection * static_cast<double>(paths.size())) {
            rejection_ok = false;
        }
        report.rows.push_back(row);
    }
    report.strictly_decreasing = report.rows.size() >= 2;
    for (std::size_t e = 1; e < report.rows.size(); ++e) {
        if (!(report.rows[e].mean < report.rows[e - 1].mean)) report.strictly_decreasing = false;
    }
    std::vector<double> eps, full, censored;
    bool fittable = report.rows.size() >= 3;
    bool censored_fittable = fittable;
    for (const auto& r : report.rows) {
        eps.push_back(r.eps);
        full.push_back(r.mean);
        censored.push_back(r.censored_mean);
        fittable = fittable && r.mean > 0.0 && r.n_used > 0;
        censored_fittable = censored_fittable && r.censored_mean > 0.0;
    }
    if (fittable) report.fit = fit_loglog(eps, full);
    if (censored_fittable) report.censored_fit = fit_loglog(eps, censored);

    if (!rejection_ok) {
        report.pass = PassState::fail;
        report.reason = "more than " + std::to_string(spec.max_rejection * 100.0) + "% of paths rejected";
    } else if (paths.size() < 2 || report.rows.size() < 3) {
        report.pass = PassState::skipped;
        report.reason = "need at least 2 paths and 3 eps values for a fit";
    } else if (kind == ExperimentKind::clt &&
               std::all_of(full.begin(), full.end(), [](double v) { return v < 1e-9; })) {
        report.pass = PassState::pass;
        report.reason = "fluctuation equals its limit to roundoff (linear dynamics)";
    } else if (!report.fit) {
        report.pass = PassState::skipped;
        report.reason = "statistic vanishes for some eps; no log-log fit";
    } else if (kind == ExperimentKind::prop31) {
        const bool ok = report.fit->slope >= target - spec.slope_tolerance && report.fit->r2 >= spec.min_r2;
        report.pass = ok ? PassState::pass : PassState::fail;
        report.reason = ok ? "slope and r2 within bounds" : "slope below p/2 - tolerance or r2 too small";
    } else {
        const bool ok = report.strictly_decreasing && report.fit->slope >= spec.min_order;
        report.pass = ok ? PassState::pass : PassState::fail;
        report.reason = ok ? "monotone decrease and order within bounds" : "not strictly decreasing or order too low";
    }
    return report;
}

}  // namespace

ConvergenceReport run_prop31(const EnsembleSpec& spec, const SolverContext& ctx, std::span<const double> u0) {
    spec.validate();
    const auto det = reference_trajectory(ctx, u0);
    const double p = ctx.params().p_norm;
    const std::size_t n_eps = spec.eps_list.size();
    std::vector<PathResult> paths(static_cast<std::size_t>(spec.n_paths));
    parallel_for(spec.n_paths, spec.workers, [&](int path) {
        PathResult r{std::vector<double>(n_eps), std::vector<double>(n_eps), std::vector<char>(n_eps)};
        std::optional<NoiseRealization> shared;
        if (spec.coupled) shared = path_noise(spec, ctx, path, 0);
        for (std::size_t e = 0; e < n_eps; ++e) {
            const auto noise = spec.coupled ? *shared : path_noise(spec, ctx, path, e);
            const auto traj = solve_spde(ctx, u0, spec.eps_list[e], noise);
            const double s = sup_norm_power(ctx, traj, det, p, p);
            r.censored[e] = s;
            r.completed[e] = traj.completed() ? 1 : 0;
            r.stat[e] = traj.completed() ? s : 0.0;
        }
        paths[static_cast<std::size_t>(path)] = std::move(r);
    });
    return reduce(spec, ExperimentKind::prop31, p / 2.0, paths);
}

ConvergenceReport run_clt(const EnsembleSpec& spec, const SolverContext& ctx, std::span<const double> u0) {
    spec.validate();
    const ReferenceSolution ref(ctx, reference_trajectory(ctx, u0));
    const SpeedFunction unit_speed(0.0);
    const double p = ctx.params().p_norm;
    const std::size_t n_eps = spec.eps_list.size();
    std::vector<PathResult> paths(static_cast<std::size_t>(spec.n_paths));
    parallel_for(spec.n_paths, spec.workers, [&](int path) {
        PathResult r{std::vector<double>(n_eps), std::vector<double>(n_eps), std::vector<char>(n_eps)};
        const auto noise = path_noise(spec, ctx, path, 0);
        const auto v = solve_clt_limit(ctx, ref, noise);
        for (std::size_t e = 0; e < n_eps; ++e) {
            const auto own = spec.coupled ? std::optional<NoiseRealization>{} : path_noise(spec, ctx, path, e);
            const auto v_eps = solve_mdp_process(ctx, ref, spec.eps_list[e], unit_speed, own ? *own : noise);
            const double s = sup_distance(ctx, v_eps, v, p);
            r.censored[e] = s;
            r.completed[e] = v_eps.completed() ? 1 : 0;
            r.stat[e] = v_eps.completed() ? s : 0.0;
        }
        paths[static_cast<std::size_t>(path)] = std::move(r);
    });
    return reduce(spec, ExperimentKind::clt, 0.5, paths);
}

OracleReport run_heat_oracle(const EnsembleSpec& spec, const SolverContext& ctx, std::span<const double> u0) {
    spec.validate();
    if (ctx.has_nonlinearity()) throw std::invalid_argument("heat-oracle requires model.alpha = model.beta = 0");
    if (!ctx.coefficient().is_state_independent()) throw std::invalid_argument("heat-oracle requires constant g");
    const auto det = reference_trajectory(ctx, u0);
    const double eps = spec.eps_list.front();
    const int Jn = ctx.n_noise_modes();
    const auto final_det = det.final_state();
    std::vector<std::vector<double>> endpoint(static_cast<std::size_t>(spec.n_paths));
    std::vector<char> ok(static_cast<std::size_t>(spec.n_paths));
    parallel_for(spec.n_paths, spec.workers, [&](int path) {
        const auto noise = path_noise(spec, ctx, path, 0);
        const auto traj = solve_spde(ctx, u0, eps, noise);
        std::vector<double> diff(static_cast<std::size_t>(Jn));
        const auto last = traj.final_state();
        for (int k = 0; k < Jn; ++k) diff[static_cast<std::size_t>(k)] = last[static_cast<std::size_t>(k)] - final_det[static_cast<std::size_t>(k)];
        endpoint[static_cast<std::size_t>(path)] = std::move(diff);
        ok[static_cast<std::size_t>(path)] = traj.completed() ? 1 : 0;
    });

    OracleReport report;
    report.eps = eps;
    const double T = ctx.dt() * ctx.n_steps();
    const double kappa = ctx.coefficient().kappa0;
    long within_var = 0, within_mean = 0;
    for (int k = 0; k < Jn; ++k) {
        std::vector<double> xs;
        for (std::size_t path = 0; path < endpoint.size(); ++path) {
            if (ok[path]) xs.push_back(endpoint[path][static_cast<std::size_t>(k)]);
        }
        report.n_paths = static_cast<long>(xs.size());
        ModeOracle m;
        m.mode = k + 1;
        m.mean = mean_of(xs);
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        const auto M = static_cast<double>(xs.size());
        m.variance = xs.size() > 1 ? ss / (M - 1.0) : 0.0;
        const double rate = 2.0 * ctx.params().nu * ctx.basis().eigenvalue(k);
        const double q = ctx.noise_spec().weight(k);
        m.expected_variance = eps * kappa * kappa * q * q * (-std::expm1(-rate * T)) / rate;
        if (xs.size() > 1 && m.expected_variance > 0.0) {
            m.z_variance = (m.variance - m.expected_variance) / (m.expected_variance * std::sqrt(2.0 / (M - 1.0)));
            m.z_mean = m.variance > 0.0 ? m.mean / std::sqrt(m.variance / M) : 0.0;
        }
        within_var += std::abs(m.z_variance) <= 3.0 ? 1 : 0;
        within_mean += std::abs(m.z_mean) <= 3.0 ? 1 : 0;
        report.modes.push_back(m);
    }
    report.fraction_variance_within = static_cast<double>(within_var) / Jn;
    report.fraction_mean_within = static_cast<double>(within_mean) / Jn;
    report.all_means_within = within_mean == Jn;
    if (report.n_paths < 2 || kappa == 0.0) {
        report.pass = PassState::skipped;
    } else {
        report.pass = report.fraction_variance_within >= 0.95 && report.fraction_mean_within >= 0.95
                          ? PassState::pass
                          : PassState::fail;
    }
    return report;
}

TailReport run_mdp_tail(const EnsembleSpec& spec, const SolverContext& ctx, std::span<const double> u0) {
    spec.validate();
    const ReferenceSolution ref(ctx, reference_trajectory(ctx, u0));
    const SpeedFunction speed(spec.theta);
    const std::size_t n_eps = spec.eps_list.size();
    std::vector<std::vector<double>> sups(static_cast<std::size_t>(spec.n_paths));
    parallel_for(spec.n_paths, spec.workers, [&](int path) {
        std::vector<double> s(n_eps);
        std::optional<NoiseRealization> shared;
        if (spec.coupled) shared = path_noise(spec, ctx, path, 0);
        for (std::size_t e = 0; e < n_eps; ++e) {
            const auto noise = spec.coupled ? *shared : path_noise(spec, ctx, path, e);
            const auto z = solve_mdp_process(ctx, ref, spec.eps_list[e], speed, noise);
            double sup = std::numeric_limits<double>::infinity();
            if (z.completed()) {
                const auto norms = trajectory_norms(ctx, z);
                sup = *std::max_element(norms.begin(), norms.end());
            }
            s[e] = sup;
        }
        sups[static_cast<std::size_t>(path)] = std::move(s);
    });
    std::vector<TailSample> samples;
    samples.reserve(n_eps * sups.size());
    for (std::size_t e = 0; e < n_eps; ++e) {
        for (const auto& s : sups) samples.push_back({spec.eps_list[e], s[e]});
    }
    return mdp_tail_estimate(samples, spec.rhos);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::ordered_json fit_json(const std::optional<LogLogFit>& fit) {
    if (!fit) return nullptr;
    return {{"slope", fit->slope}, {"intercept", fit->intercept}, {"r2", fit->r2}};
}

}  // namespace

void write_csv(const std::filesystem::path& path, const ConvergenceReport& report) {
    auto out = open_out(path);
    out << "eps,mean,stderr,n_rejected\n";
    for (const auto& r : report.rows) out << num(r.eps) << ',' << num(r.mean) << ',' << num(r.stderr_) << ',' << r.n_rejected << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string to_json(const ConvergenceReport& report) {
    nlohmann::ordered_json j;
    j["experiment"] = to_string(report.experiment);
    const auto fit = fit_json(report.fit);
    j["slope"] = report.fit ? fit["slope"] : nlohmann::ordered_json(nullptr);
    j["intercept"] = report.fit ? fit["intercept"] : nlohmann::ordered_json(nullptr);
    j["r2"] = report.fit ? fit["r2"] : nlohmann::ordered_json(nullptr);
    j["target_slope"] = report.target_slope;
    j["pass"] = to_string(report.pass);
    j["reason"] = report.reason;
    j["strictly_decreasing"] = report.strictly_decreasing;
    j["censored_fit"] = fit_json(report.censored_fit);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"eps", r.eps},
                        {"mean", r.mean},
                        {"stderr", r.stderr_},
                        {"n_used", r.n_used},
                        {"n_rejected", r.n_rejected},
                        {"censored_mean", r.censored_mean},
                        {"censored_stderr", r.censored_stderr}});
    }
    j["rows"] = rows;
    return j.dump(2);
}

void write_csv(const std::filesystem::path& path, const OracleReport& report) {
    auto out = open_out(path);
    out << "mode,mean,variance,expected_variance,z_mean,z_variance\n";
    for (const auto& m : report.modes) {
        out << m.mode << ',' << num(m.mean) << ',' << num(m.variance) << ',' << num(m.expected_variance) << ','
            << num(m.z_mean) << ',' << num(m.z_variance) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string to_json(const OracleReport& report) {
    nlohmann::ordered_json j;
    j["experiment"] = "heat-oracle";
    j["eps"] = report.eps;
    j["n_paths"] = report.n_paths;
    j["n_modes"] = report.modes.size();
    j["fraction_variance_within_3"] = report.fraction_variance_within;
    j["fraction_mean_within_3"] = report.fraction_mean_within;
    j["all_means_within_3"] = report.all_means_within;
    j["pass"] = to_string(report.pass);
    auto modes = nlohmann::ordered_json::array();
    for (const auto& m : report.modes) {
        modes.push_back({{"mode", m.mode},
                         {"mean", m.mean},
                         {"variance", m.variance},
                         {"expected_variance", m.expected_variance},
                         {"z_mean", m.z_mean},
                         {"z_variance", m.z_variance}});
    }
    j["modes"] = modes;
    return j.dump(2);
}

void write_csv(const std::filesystem::path& path, const TailReport& report) {
    auto out = open_out(path);
    out << "eps,rho,n_paths,n_exceed,probability,wilson_lower,wilson_upper\n";
    for (const auto& e : report.estimates) {
        out << num(e.eps) << ',' << num(e.rho) << ',' << e.n_paths << ',' << e.n_exceed << ',' << num(e.probability)
            << ',' << num(e.lower) << ',' << num(e.upper) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace sgbh
