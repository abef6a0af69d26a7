#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "config.hpp"

namespace sgbh::cli {

enum ExitCode : int { kPass = 0, kScientificFail = 1, kUsageError = 2, kNumericalAbort = 3 };

// Each command writes its artifacts and a copy of the resolved config into
// config.run.out and returns an ExitCode. Exceptions propagate to main.

int cmd_simulate(const RunConfig& config, const std::optional<std::filesystem::path>& control_file,
                 std::ostream& log);
int cmd_experiment(const RunConfig& config, std::ostream& log);
int cmd_rate(const RunConfig& config, const std::filesystem::path& target_file, std::ostream& log);
int cmd_validate_kernel(const RunConfig& config, std::ostream& log);

/// Coefficients from a trajectory binary (final state) or a text file of
/// numbers separated by whitespace or commas, `#` comments allowed.
std::vector<double> read_target(const std::filesystem::path& path);

}  // namespace sgbh::cli
