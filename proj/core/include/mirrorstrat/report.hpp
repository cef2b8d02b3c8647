#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mirrorstrat/experiments.hpp"
#include "mirrorstrat/solvers.hpp"

namespace mirrorstrat {

/// Reals are written with %.17g so reruns compare byte for byte.
std::string format_real(double v);

std::string histogram_csv(const ExperimentResult& result);  // delta,count
std::string trials_csv(const ExperimentResult& result);     // one row per trial record
std::string paths_csv(const ExperimentResult& result);      // trial,k,r0,stratum
std::string path_bounds_csv(const ExperimentResult& result);  // trial,lower,upper
std::string phase_csv(const ExperimentResult& result);      // r0,delta,rho,n_certified,n_trials
std::string trace_csv(const SolverTrace& trace);            // k,objective,r0,stratum,residual

std::string histogram_svg(const ExperimentResult& result);
std::string paths_svg(const ExperimentResult& result);
std::string phase_svg(const ExperimentResult& result);
std::string trace_svg(const SolverTrace& trace);

/// Run manifest: experiment name, software version, full configuration,
/// per-trial seeds and tolerances.
std::string manifest_json(const std::string& experiment, const ExperimentResult& result);

/// Writes `contents` to `path`, creating parent directories. Throws
/// std::runtime_error when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& contents);

/// All files for one experiment ("hist", "path" or "transition") into `dir`.
/// Returns the paths written.
std::vector<std::filesystem::path> write_experiment(const std::filesystem::path& dir,
                                                    const std::string& experiment,
                                                    const ExperimentResult& result);

const char* version() noexcept;

}  // namespace mirrorstrat
