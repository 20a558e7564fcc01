#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aif/agentloop/experiment.hpp"

namespace aif::cli {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Flat-section key=value configuration. Every field has a recorded
/// default; the resolved config is serialized verbatim into run outputs and
/// re-parses to an identical configuration.
struct RunConfig {
    // top level
    std::string task = "explore-mountaincar";  // explore-mountaincar | exploit-pendulum | custom
    std::string agent = "active_inference";
    std::size_t epochs = 100;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string out = "runs";
    std::string env = "mountain-car";
    std::string remote_endpoint;
    std::size_t action_repeat = 1;
    std::size_t seed_episodes = 5;
    std::size_t jobs = 1;
    bool write_step_traces = false;

    // [planner]
    std::size_t planner_h = 12;
    std::size_t planner_n = 1000;
    std::size_t planner_m = 100;
    std::size_t planner_i = 10;
    std::size_t planner_b = 5;
    std::size_t planner_j = 4;
    double info_gain_weight = 1.0;
    double policy_variance_floor = 1e-4;
    std::size_t planner_threads = 1;

    // [model]
    std::string mode = "bayesian";
    std::size_t hidden = 500;
    std::size_t reward_hidden = 200;
    int k_theta = 1;
    double recognition_variance = -1.0;  // negative: mode default
    double kl_weight = -1.0;             // negative: 1/dataset convention
    double learning_rate = 1e-3;
    std::size_t batches_per_epoch = 100;
    std::size_t batch_size = 50;
    double init_weight_variance = 0.05;

    // [agent]
    double noise_variance = 0.3;

    // [coverage]
    std::size_t coverage_resolution = 32;

    /// Named-task defaults; "custom" keeps the general defaults.
    static RunConfig defaults_for_task(const std::string& task);

    /// Applies one key (section-qualified, e.g. "planner.N" or "epochs").
    /// Unknown keys raise ConfigError naming the key.
    void set(const std::string& dotted_key, const std::string& value);

    std::string serialize() const;
    static RunConfig parse(const std::string& text, const RunConfig& base);
    static RunConfig parse_file(const std::string& path, const RunConfig& base);

    agentloop::ExperimentConfig experiment_config() const;
};

}  // namespace aif::cli
