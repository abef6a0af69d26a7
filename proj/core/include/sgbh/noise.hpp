#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace sgbh {

/// Spatial colouring of the Q-Wiener noise: mode j carries weight
/// q_j = lambda_j^(-eta) = (j^2 pi^2)^(-eta). Trace class needs eta > 1/4.
class NoiseSpec {
public:
    NoiseSpec(int n_modes, double eta);

    int n_modes() const noexcept { return static_cast<int>(q_.size()); }
    double eta() const noexcept { return eta_; }
    std::span<const double> weights() const noexcept { return q_; }
    double weight(int k) const noexcept { return q_[static_cast<std::size_t>(k)]; }

    /// sum_{j<=J} q_j^2 for any J >= 0 (not limited to n_modes).
    double trace_partial_sum(int J) const;

    static double mode_weight(int j, double eta);

private:
    double eta_;
    std::vector<double> q_;
};

/// Brownian increments Delta B_{j,k} ~ N(0, dt), mode-major storage.
struct NoiseRealization {
    int n_modes = 0;
    int n_steps = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::uint32_t stream = 0;      // path index
    std::uint32_t refinement = 1;  // cumulative bridge refinement factor
    std::vector<double> increments;

    double operator()(int k, int step) const noexcept {
        return increments[index(k, step)];
    }
    double& operator()(int k, int step) noexcept { return increments[index(k, step)]; }

    static NoiseRealization zeros(int n_modes, int n_steps, double dt);

private:
    std::size_t index(int k, int step) const noexcept {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(n_steps) +
               static_cast<std::size_t>(step);
    }
};

/// Draws spec.n_modes() Brownian increments for n_steps steps. Each draw
/// is addressed by (seed, stream, mode, step), so the result is independent of
/// how paths are distributed over workers.
NoiseRealization sample_noise(const NoiseSpec& spec, double dt, int n_steps, std::uint64_t seed,
                              std::uint32_t stream = 0);

/// Brownian-bridge refinement: each coarse increment is split into `factor`
/// sub-increments with the exact conditional law given their sum.
NoiseRealization refine_noise(const NoiseRealization& coarse, int factor);

/// Sums groups of `factor` consecutive increments.
NoiseRealization coarsen_noise(const NoiseRealization& fine, int factor);

/// W^Q(t_step, x) = sum_j q_j phi_j(x) B_j(t_step).
double wiener_field(const NoiseRealization& noise, const NoiseSpec& spec, int step, double x);

/// Piecewise-constant Cameron-Martin control hdot_{j,k}, mode-major.
struct ControlPath {
    int n_modes = 0;
    int n_steps = 0;
    double dt = 0.0;
    std::vector<double> hdot;

    double operator()(int k, int step) const noexcept { return hdot[index(k, step)]; }
    double& operator()(int k, int step) noexcept { return hdot[index(k, step)]; }

    static ControlPath zeros(int n_modes, int n_steps, double dt);

    /// sum_j int |hdot_j|^2 dt
    double energy() const noexcept;
    /// Membership in U^N = { energy <= N }.
    bool within_energy(double N) const noexcept { return energy() <= N; }

private:
    std::size_t index(int k, int step) const noexcept {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(n_steps) +
               static_cast<std::size_t>(step);
    }
};

/// Cameron-Martin action 1/2 int ||hdot||_{l2}^2 dt.
double action(const ControlPath& h) noexcept;

// Flat little-endian binary files.
// noise:   u64 J, u64 n_steps, f64 dt, u64 seed, then J*n_steps f64 (mode-major)
// control: u64 J, u64 n_steps, f64 dt, then J*n_steps f64 (mode-major)
void save_noise(const std::filesystem::path& path, const NoiseRealization& noise);
NoiseRealization load_noise(const std::filesystem::path& path);
void save_control(const std::filesystem::path& path, const ControlPath& control);
ControlPath load_control(const std::filesystem::path& path);

}  // namespace sgbh
