#pragma once

#include <optional>

#include "aif/agentloop/agents.hpp"
#include "aif/agentloop/coverage.hpp"
#include "aif/envsim/env.hpp"

namespace aif::agentloop {

struct ExperimentConfig {
    AgentConfig agent;
    std::size_t epochs = 100;
    std::size_t seed_episodes = 5;
    std::size_t action_repeat = 1;  // informational; wrap the env before calling
    bool track_coverage = false;    // 2-D state environments only
    std::size_t coverage_resolution = 32;
    double coverage_x_lo = -1.2, coverage_x_hi = 0.6;
    double coverage_y_lo = -0.07, coverage_y_hi = 0.07;
    bool record_traces = true;
};

struct EpochStats {
    std::size_t epoch = 0;
    double episode_return = 0.0;
    std::size_t episode_length = 0;
    double state_kl = 0.0, parameter_kl = 0.0, reward_nll = 0.0;
    double observation_nll = 0.0, total_fe = 0.0;  // means over the epoch's batches
    double coverage_fraction = 0.0;
    double wall_seconds = 0.0;
};

struct StepTrace {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
};

/// Everything (config, seed) determines is bit-exact across runs;
/// wall_seconds is the one measured, non-deterministic field.
struct ExperimentRecord {
    std::uint64_t seed = 0;
    std::vector<EpochStats> epochs;
    std::vector<std::vector<StepTrace>> collected_episodes;  // one per epoch
    double seed_episode_coverage = 0.0;
    std::size_t final_buffer_size = 0;
    std::size_t final_episode_count = 0;
    std::size_t coverage_resolution = 0;       // 0 when coverage not tracked
    std::vector<std::uint8_t> coverage_cells;  // final grid, row-major
};

/// The per-epoch cycle: train on the buffer (batches x batch size), then
/// collect one episode with replanning after every observation. The buffer
/// is seeded with random-action episodes first.
ExperimentRecord run_experiment(envsim::Env& env, const ExperimentConfig& cfg,
                                std::uint64_t seed,
                                std::optional<genmodel::Trainer>* trainer_out = nullptr);

}  // namespace aif::agentloop
