#pragma once

#include <string>
#include <vector>

#include "aif/agentloop/experiment.hpp"

namespace aif::cli {

/// One parsed per-seed result file: the embedded resolved config plus the
/// per-epoch rows.
struct SeedResult {
    std::uint64_t seed = 0;
    std::string config_text;
    std::vector<agentloop::EpochStats> rows;
};

/// Per-seed CSV layout: '#' metadata lines carrying the resolved config and
/// seed, one header row, then one row per epoch. wall_seconds is the only
/// measured (non-reproducible) column.
void write_record_csv(const std::string& path, const std::string& config_text,
                      const agentloop::ExperimentRecord& record);
SeedResult read_record_csv(const std::string& path);

/// Final coverage grid as rows of 0/1 cells.
void write_coverage_csv(const std::string& path,
                        const agentloop::ExperimentRecord& record);

/// Optional per-step trace: one JSON object per line with epoch, step,
/// state, action and reward.
void write_step_trace(const std::string& path,
                      const agentloop::ExperimentRecord& record);
std::vector<std::vector<int>> read_coverage_csv(const std::string& path);

/// Linear-interpolation quantile of a sample (p in [0, 1]).
double quantile(std::vector<double> values, double p);

/// Per-seed curves reduced to a mean curve and a central 95% interquartile
/// band per epoch (2.5% / 97.5% quantiles across seeds).
struct AggregateReport {
    std::size_t epochs = 0;
    std::vector<double> mean_return, return_lo, return_hi;
    std::vector<double> mean_coverage, coverage_lo, coverage_hi;
    std::size_t seed_count = 0;
};

AggregateReport aggregate(const std::vector<SeedResult>& seeds);
void write_aggregate_csv(const std::string& path, const AggregateReport& report);

}  // namespace aif::cli
