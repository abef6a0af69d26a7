#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgbh/deviation.hpp"
#include "sgbh/solvers.hpp"

namespace sgbh {

enum class ExperimentKind { prop31, clt, mdp_tail, heat_oracle };

std::string to_string(ExperimentKind kind);
/// Accepts prop31, clt, mdp-tail / mdp_tail, heat-oracle / heat_oracle.
ExperimentKind parse_experiment(const std::string& text);

enum class PassState { pass, fail, skipped };
std::string to_string(PassState state);

struct EnsembleSpec {
    ExperimentKind experiment = ExperimentKind::prop31;
    int n_paths = 500;
    std::uint64_t base_seed = 1;
    std::vector<double> eps_list{1e-2, 1e-3, 1e-4};
    bool coupled = true;
    int workers = 0;  // 0: hardware concurrency

    double slope_tolerance = 0.3;  // prop31: slope >= p/2 - tolerance
    double min_r2 = 0.99;
    double min_order = 0.4;        // clt
    double max_rejection = 0.05;

    double theta = 0.25;                      // mdp_tail speed
    std::vector<double> rhos{0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.8, 1e6};

    /// eps_list strictly decreasing in (0, 1], n_paths >= 1.
    void validate() const;
};

/// Runs body(i) for i in [0, n) on `workers` threads (0: hardware
/// concurrency). Indices are claimed from a shared counter; callers write
/// results into per-index slots so the outcome does not depend on scheduling.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares of log(statistic) on log(eps). Needs >= 3 points and
/// positive values.
LogLogFit fit_loglog(std::span<const double> eps, std::span<const double> statistic);

struct EpsStatistic {
    double eps = 0.0;
    double mean = 0.0;  // over paths that ran to t_end
    double stderr_ = 0.0;
    long n_used = 0;
    long n_rejected = 0;
    double censored_mean = 0.0;  // over all paths, sup taken up to the stopping time
    double censored_stderr = 0.0;
};

struct ConvergenceReport {
    ExperimentKind experiment = ExperimentKind::prop31;
    double target_slope = 0.0;
    std::vector<EpsStatistic> rows;
    std::optional<LogLogFit> fit;
    std::optional<LogLogFit> censored_fit;
    bool strictly_decreasing = false;
    PassState pass = PassState::skipped;
    std::string reason;
};

struct ModeOracle {
    int mode = 0;  // 1-based
    double mean = 0.0;
    double variance = 0.0;
    double expected_variance = 0.0;
    double z_mean = 0.0;
    double z_variance = 0.0;
};

struct OracleReport {
    double eps = 1.0;
    long n_paths = 0;
    std::vector<ModeOracle> modes;
    double fraction_variance_within = 0.0;  // |z_variance| <= 3
    double fraction_mean_within = 0.0;      // |z_mean| <= 3
    bool all_means_within = false;
    PassState pass = PassState::skipped;
};

/// E[sup_t ||u_eps(t) - u_0(t)||_{L^p}^p] per eps, slope target p/2.
ConvergenceReport run_prop31(const EnsembleSpec& spec, const SolverContext& ctx, std::span<const double> u0);

/// E[sup_t ||v_eps(t) - v(t)||_{L^p}] per eps with v_eps the rescaled
/// fluctuation (u_eps - u_0)/sqrt(eps), integrated directly; slope target 1/2.
ConvergenceReport run_clt(const EnsembleSpec& spec, const SolverContext& ctx, std::span<const double> u0);

/// Endpoint statistics of u_eps(T) - u_0(T) per noise mode against the
/// Ornstein-Uhlenbeck variance. Requires alpha = beta = 0 and constant g.
/// Uses eps_list.front().
OracleReport run_heat_oracle(const EnsembleSpec& spec, const SolverContext& ctx, std::span<const double> u0);

/// Tightness report for Z_eps with speed eps^(-theta).
TailReport run_mdp_tail(const EnsembleSpec& spec, const SolverContext& ctx, std::span<const double> u0);

/// CSV header eps,mean,stderr,n_rejected.
void write_csv(const std::filesystem::path& path, const ConvergenceReport& report);
std::string to_json(const ConvergenceReport& report);

/// CSV header mode,mean,variance,expected_variance,z_mean,z_variance.
void write_csv(const std::filesystem::path& path, const OracleReport& report);
std::string to_json(const OracleReport& report);

/// CSV header eps,rho,n_paths,n_exceed,probability,wilson_lower,wilson_upper.
void write_csv(const std::filesystem::path& path, const TailReport& report);

}  // namespace sgbh
