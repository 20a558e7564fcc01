#include "aif/agentloop/experiment.hpp"

#include <chrono>

#include "aif/common/check.hpp"
#include "aif/genmodel/snapshot.hpp"

namespace aif::agentloop {

namespace {

// stream tags for seed derivation
enum : std::uint64_t {
    kTagInit = 1,
    kTagEnvReset = 2,
    kTagSeedActions = 3,
    kTagTrain = 4,
    kTagPlan = 5,
    kTagNoise = 6,
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ExperimentRecord run_experiment(envsim::Env& env, const ExperimentConfig& cfg,
                                std::uint64_t seed,
                                std::optional<genmodel::Trainer>* trainer_out) {
    check_arg(cfg.epochs >= 1, "run_experiment: epochs must be >= 1");
    const envsim::EnvSpec& spec = env.spec();

    ExperimentConfig resolved = cfg;
    if (resolved.agent.planner.action_low.empty()) {
        resolved.agent.planner.action_low = spec.action_low;
        resolved.agent.planner.action_high = spec.action_high;
    }

    ExperimentRecord record;
    record.seed = seed;

    ReplayBuffer buffer(spec.d_s, spec.d_a);
    Rng init_rng(derive_seed(seed, kTagInit));
    genmodel::Trainer trainer(spec.d_s, spec.d_a, resolved.agent.trainer, init_rng);

    std::optional<CoverageGrid> coverage;
    if (resolved.track_coverage)
        coverage.emplace(resolved.coverage_resolution, resolved.coverage_x_lo,
                         resolved.coverage_x_hi, resolved.coverage_y_lo,
                         resolved.coverage_y_hi);

    // seed episodes under uniform random actions
    for (std::size_t ep = 0; ep < resolved.seed_episodes; ++ep) {
        std::vector<double> state = env.reset(derive_seed(seed, kTagEnvReset, 0, ep + 1));
        Rng action_rng(derive_seed(seed, kTagSeedActions, ep));
        buffer.begin_episode();
        for (;;) {
            std::vector<double> action(spec.d_a);
            for (std::size_t k = 0; k < spec.d_a; ++k)
                action[k] = action_rng.uniform(spec.action_low[k], spec.action_high[k]);
            envsim::StepResult r = env.step(action);
            buffer.add(state, action, r.next_state, r.reward, r.terminal);
            state = r.next_state;
            if (r.terminal || r.truncated) break;
        }
    }
    if (coverage) {
        coverage_update(*coverage, buffer.transitions());
        record.seed_episode_coverage = coverage->fraction();
    }

    for (std::size_t epoch = 1; epoch <= resolved.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        EpochStats stats;
        stats.epoch = epoch;

        Rng train_rng(derive_seed(seed, kTagTrain, epoch));
        auto batch_stats = trainer.train_epoch(buffer, train_rng);
        for (const auto& b : batch_stats) {
            double inv = 1.0 / static_cast<double>(batch_stats.size());
            stats.state_kl += b.state_kl * inv;
            stats.parameter_kl += b.parameter_kl * inv;
            stats.reward_nll += b.reward_nll * inv;
            stats.observation_nll += b.observation_nll * inv;
            stats.total_fe += b.total * inv;
        }

        genmodel::ModelSnapshot snapshot = genmodel::make_snapshot(trainer);
        std::vector<double> state = env.reset(derive_seed(seed, kTagEnvReset, epoch, 0));
        std::size_t first_new = buffer.size();
        buffer.begin_episode();
        std::vector<StepTrace> trace;
        for (std::size_t t = 0;; ++t) {
            Rng noise_rng(derive_seed(seed, kTagNoise, epoch, t));
            std::vector<double> action =
                select_action(resolved.agent, snapshot, state,
                              derive_seed(seed, kTagPlan, epoch, t), noise_rng);
            envsim::StepResult r = env.step(action);
            buffer.add(state, action, r.next_state, r.reward, r.terminal);
            if (resolved.record_traces)
                trace.push_back(StepTrace{state, action, r.reward});
            stats.episode_return += r.reward;
            stats.episode_length += 1;
            state = r.next_state;
            if (r.terminal || r.truncated) break;
        }
        if (coverage) {
            coverage_update(*coverage, buffer.transitions(), first_new);
            stats.coverage_fraction = coverage->fraction();
        }
        stats.wall_seconds = seconds_since(t0);
        record.epochs.push_back(stats);
        record.collected_episodes.push_back(std::move(trace));
    }

    record.final_buffer_size = buffer.size();
    record.final_episode_count = buffer.episode_count();
    if (coverage) {
        record.coverage_resolution = coverage->resolution();
        record.coverage_cells = coverage->cells();
    }
    if (trainer_out) trainer_out->emplace(std::move(trainer));
    return record;
}

}  // namespace aif::agentloop
