#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "aif/cli/run_config.hpp"

namespace aif::cli {

/// Runs every seed (optionally in parallel workers), writing per-seed CSVs,
/// coverage grids, checkpoints, the resolved config, the aggregate CSV and
/// plots under cfg.out. Returns a process exit status.
int cmd_run(const RunConfig& cfg, std::ostream& log);

/// Re-aggregates one or more run directories and renders the mean-return
/// curve (with 95% interquartile band) plus coverage heatmaps on a shared
/// color scale.
int cmd_plot(const std::vector<std::string>& run_dirs, const std::string& out_dir,
             std::ostream& log);

int cmd_selftest(double inject_entropy_bias, std::ostream& log);

int cmd_env_serve(const std::string& env_name, int port, std::ostream& log);

}  // namespace aif::cli
