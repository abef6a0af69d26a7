#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sgbh/trajectory_io.hpp"

namespace sgbh::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

fs::path prepare_output(const RunConfig& config) {
    const fs::path dir(config.run.out);
    fs::create_directories(dir);
    write_text(dir / "config.ini", serialize(config));
    return dir;
}

ReferenceSolution reference(const SolverContext& ctx, const RunConfig& config) {
    auto traj = solve_deterministic(ctx, make_initial_condition(config, ctx));
    if (!traj.completed()) {
        throw NumericalError("deterministic reference stopped at t = " + std::to_string(*traj.stopped_at) +
                             " (L^p norm above solver.blowup_threshold)");
    }
    return ReferenceSolution(ctx, std::move(traj));
}

std::string status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::completed:
            return "completed";
        case SolveStatus::blowup:
            return "blowup";
        case SolveStatus::non_finite:
            return "non_finite";
    }
    return "unknown";
}

int exit_for(PassState state) { return state == PassState::fail ? kScientificFail : kPass; }

}  // namespace

int cmd_simulate(const RunConfig& config, const std::optional<fs::path>& control_file, std::ostream& log) {
    validate(config);
    const auto ctx = make_context(config);
    const std::string& kind = config.solver.kind;
    const bool stochastic = kind == "spde" || kind == "clt" || kind == "mdp" || kind == "controlled";
    const bool needs_control = kind == "controlled" || kind == "skeleton";
    if (needs_control && !control_file) throw ConfigError("solver " + kind + " needs --control FILE");

    std::optional<ControlPath> control;
    if (needs_control) control = load_control(*control_file);
    const fs::path dir = prepare_output(config);

    NoiseRealization noise;
    if (stochastic) {
        noise = sample_noise(ctx.noise_spec(), ctx.dt(), ctx.n_steps(), config.run.seed);
        save_noise(dir / "noise.bin", noise);
    }
    const SpeedFunction speed(config.solver.theta);

    Trajectory traj;
    if (kind == "deterministic") {
        traj = solve_deterministic(ctx, make_initial_condition(config, ctx));
    } else if (kind == "spde") {
        traj = solve_spde(ctx, make_initial_condition(config, ctx), config.solver.eps, noise);
    } else {
        const auto ref = reference(ctx, config);
        if (kind == "clt") {
            traj = solve_clt_limit(ctx, ref, noise);
        } else if (kind == "mdp") {
            traj = solve_mdp_process(ctx, ref, config.solver.eps, speed, noise);
        } else if (kind == "controlled") {
            traj = solve_controlled(ctx, ref, config.solver.eps, speed, noise, *control);
        } else {
            traj = solve_skeleton(ctx, ref, *control);
        }
    }

    save_trajectory(dir / "trajectory.bin", traj);
    write_norm_csv(dir / "norms.csv", ctx, traj);
    const auto lp = trajectory_norms(ctx, traj);
    nlohmann::ordered_json summary;
    summary["solver"] = kind;
    summary["status"] = status_name(traj.status);
    summary["stopped_at"] = traj.stopped_at ? nlohmann::ordered_json(*traj.stopped_at) : nlohmann::ordered_json();
    summary["steps"] = traj.n_steps();
    summary["final_lp"] = lp.back();
    summary["sup_lp"] = *std::max_element(lp.begin(), lp.end());
    write_text(dir / "summary.json", summary.dump(2) + "\n");

    log << "simulate " << kind << ": " << status_name(traj.status) << ", " << traj.n_steps() << " steps, sup L^"
        << config.model.p_norm << " norm " << summary["sup_lp"].get<double>() << "\n";
    return traj.completed() ? kPass : kNumericalAbort;
}

int cmd_experiment(const RunConfig& config, std::ostream& log) {
    validate(config);
    const auto ctx = make_context(config);
    const auto spec = make_ensemble(config);
    const auto u0 = make_initial_condition(config, ctx);
    const fs::path dir = prepare_output(config);
    const std::string name = to_string(spec.experiment);

    switch (spec.experiment) {
        case ExperimentKind::prop31:
        case ExperimentKind::clt: {
            const auto report =
                spec.experiment == ExperimentKind::prop31 ? run_prop31(spec, ctx, u0) : run_clt(spec, ctx, u0);
            write_csv(dir / "report.csv", report);
            write_text(dir / "report.json", to_json(report) + "\n");
            log << name << ": " << to_string(report.pass);
            if (report.fit) log << ", slope " << report.fit->slope << " (target " << report.target_slope << ")";
            if (!report.reason.empty()) log << ", " << report.reason;
            log << "\n";
            return exit_for(report.pass);
        }
        case ExperimentKind::heat_oracle: {
            const auto report = run_heat_oracle(spec, ctx, u0);
            write_csv(dir / "report.csv", report);
            write_text(dir / "report.json", to_json(report) + "\n");
            log << name << ": " << to_string(report.pass) << ", " << 100.0 * report.fraction_variance_within
                << "% of modes with |z| <= 3\n";
            return exit_for(report.pass);
        }
        case ExperimentKind::mdp_tail: {
            const auto report = run_mdp_tail(spec, ctx, u0);
            write_csv(dir / "report.csv", report);
            write_text(dir / "report.json", to_json(report) + "\n");
            log << name << ": tail probabilities " << (report.monotone_in_rho ? "" : "not ")
                << "monotone in rho\n";
            return report.monotone_in_rho ? kPass : kScientificFail;
        }
    }
    return kUsageError;
}

std::vector<double> read_target(const fs::path& path) {
    if (path.extension() == ".bin") {
        const auto traj = load_trajectory(path);
        const auto last = traj.final_state();
        return {last.begin(), last.end()};
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open target file " + path.string());
    std::vector<double> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = line.substr(0, line.find('#'));
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::string token;
        while (ls >> token) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(token, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != token.size() || !std::isfinite(v)) {
                throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": not a number: " + token);
            }
            out.push_back(v);
        }
    }
    return out;
}

int cmd_rate(const RunConfig& config, const fs::path& target_file, std::ostream& log) {
    validate(config);
    const auto ctx = make_context(config);
    const auto target = read_target(target_file);
    if (target.size() != static_cast<std::size_t>(ctx.n_modes())) {
        throw std::invalid_argument("target has " + std::to_string(target.size()) + " coefficients, expected " +
                                    std::to_string(ctx.n_modes()) + " (solver.modes)");
    }
    const auto ref = reference(ctx, config);
    const fs::path dir = prepare_output(config);
    const auto result = rate_function_endpoint(ctx, ref, target, {config.rate.tolerance, config.rate.max_iterations});
    save_control(dir / "control.bin", result.control);
    write_text(dir / "rate.json", to_json(result, "control.bin") + "\n");
    log << "rate: value " << result.value << ", residual " << result.endpoint_residual << " after "
        << result.iterations << " CG iterations" << (result.converged ? "" : " (not converged)") << "\n";
    return result.converged ? kPass : kScientificFail;
}

int cmd_validate_kernel(const RunConfig& config, std::ostream& log) {
    validate(config);
    const Grid1D grid(config.kernel.points);
    KernelEstimateOptions options;
    options.image_pairs = config.kernel.image_pairs;
    options.gaussian_p = config.kernel.gaussian_p;
    options.gaussian_a = config.kernel.gaussian_a;
    const auto reports = validate_kernel_estimates(config.kernel.times, grid, options);
    const fs::path dir = prepare_output(config);
    write_text(dir / "kernel_estimates.json", to_json(reports));

    bool ok = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
    std::string csv = "t,max_method_difference,min_value,max_mass\n";
    char row[160];
    for (double t : config.kernel.times) {
        const auto images = heat_kernel(t, grid, KernelMethod::images, config.kernel.image_pairs);
        const auto eigen = heat_kernel(t, grid, KernelMethod::eigen, config.kernel.eigen_modes);
        double diff = 0.0, lowest = images.values.front(), mass = 0.0;
        for (std::size_t i = 0; i < images.values.size(); ++i) {
            diff = std::max(diff, std::abs(images.values[i] - eigen.values[i]));
            lowest = std::min(lowest, images.values[i]);
        }
        for (double x : grid.nodes()) mass = std::max(mass, heat_kernel_mass(t, x, config.kernel.image_pairs));
        std::snprintf(row, sizeof row, "%.17g,%.17g,%.17g,%.17g\n", t, diff, lowest, mass);
        csv += row;
        if (t >= 0.01 && diff >= 1e-8) ok = false;
        if (lowest < -1e-12 || mass > 1.0 + 1e-10) ok = false;
    }
    write_text(dir / "kernel_checks.csv", csv);
    for (const auto& r : reports) {
        log << r.estimate_id << ": C = " << r.fitted_C << ", a = " << r.fitted_a << (r.pass ? ", pass" : ", FAIL")
            << "\n";
    }
    log << "validate-kernel: " << (ok ? "pass" : "fail") << "\n";
    return ok ? kPass : kScientificFail;
}

}  // namespace sgbh::cli
