#pragma once

#include <filesystem>

#include "sgbh/solvers.hpp"

namespace sgbh {

// Binary trajectory, little-endian:
//   u64 n_points, u64 n_modes, f64 dt, u64 n_steps,
//   then (n_steps + 1) rows of n_modes f64 coefficients.
void save_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory load_trajectory(const std::filesystem::path& path);

/// CSV with header `time,l2,lp` (lp uses params().p_norm).
void write_norm_csv(const std::filesystem::path& path, const SolverContext& ctx, const Trajectory& traj);

}  // namespace sgbh
