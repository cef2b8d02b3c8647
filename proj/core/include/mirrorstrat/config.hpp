#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mirrorstrat/experiments.hpp"

namespace mirrorstrat {

/// Reads a flat `key = value` file (a TOML subset): one assignment per line,
/// `#` starts a comment, strings are double-quoted, arrays hold integers.
///
/// Keys (all optional; `regularizer` picks the family defaults first):
///   regularizer = "l1" | "group" | "nuclear"
///   N, P, block_size, side, r0_target, trials, path_iters,
///   reference_max_iters, certificate_max_iters           integers
///   master_seed                                         unsigned 64-bit
///   noise_std, lambda, c0, lambda_floor, gamma_factor, tau, stop_tol,
///   reference_tol, certificate_tol, primal_zero_tol,
///   dual_saturation_tol, injectivity_threshold          reals
///   lambda_rule = "fixed" | "proportional"
///   solver = "fb" | "dr"
///   phi_scaling = "unit" | "normalized"
///   r0_grid, delta_grid                                  integer arrays
///
/// Unknown or repeated keys, malformed values and invalid configurations
/// throw ConfigError naming the line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config: every key, in the order listed above.
std::string config_to_text(const ExperimentConfig& config);

}  // namespace mirrorstrat
