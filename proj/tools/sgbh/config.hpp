#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgbh/heat_kernel.hpp"
#include "sgbh/montecarlo.hpp"

namespace sgbh::cli {

/// Bad configuration text or values. Carries the 1-based line when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line = 0);
    int line() const noexcept { return line_; }

private:
    int line_;
};

struct NoiseBlock {
    int modes = 32;
    double eta = 0.3;
    std::string kind = "affine";
    double kappa0 = 1.0;
    double kappa1 = 0.5;
};

struct SolverBlock {
    SolverConfig numerics;
    std::string kind = "spde";  // deterministic | spde | clt | mdp | controlled | skeleton
    double eps = 1e-3;
    double theta = 0.25;
};

struct KernelBlock {
    std::vector<double> times{0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
    int points = 63;
    int image_pairs = kDefaultImagePairs;
    int eigen_modes = kDefaultKernelModes;
    double gaussian_p = 2.0;
    double gaussian_a = 1.0;
};

struct RateBlock {
    double tolerance = 1e-8;
    long max_iterations = 0;  // 0: 10 * actuated modes * steps
};

struct RunBlock {
    std::uint64_t seed = 1;
    int workers = 0;  // 0: hardware concurrency
    std::string out = "sgbh-out";
};

/// Every knob of a run. Defaults are the desk-scale configuration.
struct RunConfig {
    ModelParams model;
    double initial_amplitude = 1.0;  // u0 = A sin(pi x)
    NoiseBlock noise;
    SolverBlock solver;
    EnsembleSpec experiment;  // base_seed and workers come from [run]
    KernelBlock kernel;
    RateBlock rate;
    RunBlock run;
};

/// Sectioned `key = value` text; values are JSON literals. `#` or `;` starts
/// a comment line. Unknown sections/keys and duplicates are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text with every key; parse_config(serialize(c)) reproduces c.
std::string serialize(const RunConfig& config);

/// Sets one `section.key` from a JSON literal, with the same checks as parsing.
void set_value(RunConfig& config, const std::string& dotted_key, const std::string& json_literal);

bool equivalent(const RunConfig& a, const RunConfig& b);

/// Cross-field checks (builds every domain object once). Throws ConfigError.
void validate(const RunConfig& config);

NoiseCoefficient make_coefficient(const RunConfig& config);
SolverContext make_context(const RunConfig& config);
std::vector<double> make_initial_condition(const RunConfig& config, const SolverContext& ctx);
EnsembleSpec make_ensemble(const RunConfig& config);

}  // namespace sgbh::cli
