#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace sgbh::cli;

struct Flags {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::vector<std::string> overrides;

    std::optional<std::string> solver;
    std::optional<std::string> control;
    std::optional<double> eps;
    std::optional<double> theta;

    std::string experiment;
    std::optional<int> paths;

    std::string target;
};

RunConfig resolve(const Flags& f) {
    RunConfig config = f.config_file.empty() ? RunConfig{} : load_config(f.config_file);
    for (const auto& o : f.overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got " + o);
        set_value(config, o.substr(0, eq), o.substr(eq + 1));
    }
    if (f.seed) config.run.seed = *f.seed;
    if (f.workers) config.run.workers = *f.workers;
    if (f.out) config.run.out = *f.out;
    if (f.solver) config.solver.kind = *f.solver;
    if (f.eps) config.solver.eps = *f.eps;
    if (f.theta) config.solver.theta = *f.theta;
    if (!f.experiment.empty()) config.experiment.experiment = sgbh::parse_experiment(f.experiment);
    if (f.paths) config.experiment.n_paths = *f.paths;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic generalized Burgers-Huxley toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--config", f.config_file, "Sectioned key = JSON-value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", f.seed, "Base seed for all random draws");
    app.add_option("--workers", f.workers, "Ensemble worker threads (0: all cores)");
    app.add_option("--out", f.out, "Output directory");
    app.add_option("--set", f.overrides, "Override one config value, e.g. --set model.delta=2");

    auto* simulate = app.add_subcommand("simulate", "Run one path of a solver");
    simulate->add_option("--solver", f.solver, "deterministic|spde|clt|mdp|controlled|skeleton");
    simulate->add_option("--control", f.control, "Control binary for controlled/skeleton")->check(CLI::ExistingFile);
    simulate->add_option("--eps", f.eps, "Noise intensity");
    simulate->add_option("--theta", f.theta, "Speed exponent for mdp/controlled");

    auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
    experiment->add_option("kind", f.experiment, "prop31|clt|heat-oracle|mdp-tail (default: experiment.kind)");
    experiment->add_option("--paths", f.paths, "Number of Monte Carlo paths");

    auto* rate = app.add_subcommand("rate", "Endpoint rate function by conjugate gradients");
    rate->add_option("--target", f.target, "Target coefficients (.bin trajectory or text)")->required();

    auto* kernel = app.add_subcommand("validate-kernel", "Heat-kernel cross-checks and Gaussian-bound fits");
    auto* show = app.add_subcommand("show-config", "Print the resolved configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsageError;
    }

    try {
        const RunConfig config = resolve(f);
        if (*show) {
            validate(config);
            std::cout << serialize(config);
            return kPass;
        }
        if (*simulate) {
            std::optional<std::filesystem::path> control;
            if (f.control) control = *f.control;
            return cmd_simulate(config, control, std::cout);
        }
        if (*experiment) return cmd_experiment(config, std::cout);
        if (*rate) return cmd_rate(config, f.target, std::cout);
        if (*kernel) return cmd_validate_kernel(config, std::cout);
    } catch (const sgbh::NumericalError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kNumericalAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }
    return kUsageError;
}
