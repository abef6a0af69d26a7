#include "sgbh/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "binary_io.hpp"

namespace sgbh {

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
    detail::BinaryWriter out(path);
    out.u64(static_cast<std::uint64_t>(traj.n_points));
    out.u64(static_cast<std::uint64_t>(traj.n_modes));
    out.f64(traj.dt);
    out.u64(static_cast<std::uint64_t>(traj.n_steps()));
    for (double v : traj.coeffs) out.f64(v);
    out.finish();
}

Trajectory load_trajectory(const std::filesystem::path& path) {
    detail::BinaryReader in(path);
    Trajectory traj;
    const auto n_points = in.u64();
    const auto n_modes = in.u64();
    traj.dt = in.f64();
    const auto n_steps = in.u64();
    if (n_modes == 0 || n_modes > (1u << 20) || n_points > (1u << 24) || n_steps > (1u << 30) ||
        !(traj.dt > 0.0)) {
        throw std::runtime_error("malformed trajectory header in " + path.string());
    }
    traj.n_points = static_cast<int>(n_points);
    traj.n_modes = static_cast<int>(n_modes);
    const auto rows = static_cast<std::size_t>(n_steps) + 1;
    traj.times.resize(rows);
    for (std::size_t k = 0; k < rows; ++k) traj.times[k] = static_cast<double>(k) * traj.dt;
    traj.coeffs.resize(rows * static_cast<std::size_t>(n_modes));
    for (double& v : traj.coeffs) v = in.f64();
    in.expect_end();
    return traj;
}

void write_norm_csv(const std::filesystem::path& path, const SolverContext& ctx, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const auto l2 = trajectory_norms(ctx, traj, 2.0);
    const auto lp = trajectory_norms(ctx, traj);
    out << "time,l2,lp\n";
    char line[128];
    for (std::size_t k = 0; k < l2.size(); ++k) {
        std::snprintf(line, sizeof line, "%.10g,%.17g,%.17g\n", traj.times[k], l2[k], lp[k]);
        out << line;
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace sgbh
