#pragma once

#include <memory>
#include <string>

#include "aif/diffcore/optimizer.hpp"
#include "aif/genmodel/free_energy.hpp"

namespace aif::genmodel {

struct TrainerConfig {
    ModelMode mode = ModelMode::bayesian;
    std::size_t hidden = 500;         // transition network width
    std::size_t reward_hidden = 200;  // reward network width
    int k_theta = 1;
    /// Negative: mode default (1.0 bayesian, 0.1 point-estimate).
    double recognition_variance = -1.0;
    /// Negative: batch_size / dataset_size per batch.
    double kl_weight = -1.0;
    bool include_observation_nll = true;
    std::size_t batches_per_epoch = 100;
    std::size_t batch_size = 50;
    double init_weight_variance = 0.05;
    diffcore::AdamConfig adam;

    double resolved_recognition_variance() const {
        if (recognition_variance > 0.0) return recognition_variance;
        return mode == ModelMode::bayesian ? 1.0 : 0.1;
    }
};

/// Owns the transition and reward models, the optimizer, and the
/// normalization statistics. Training is exclusive-write on parameters;
/// snapshots taken between epochs are immutable values.
class Trainer {
public:
    Trainer(std::size_t d_s, std::size_t d_a, const TrainerConfig& cfg, Rng& init_rng);

    TransitionModel& transition() { return transition_; }
    const TransitionModel& transition() const { return transition_; }
    RewardModel& reward() { return reward_; }
    const RewardModel& reward() const { return reward_; }
    const Normalizer& normalizer() const { return norm_; }
    const TrainerConfig& config() const { return cfg_; }

    /// Refreshes normalization statistics from the buffer, then runs the
    /// configured number of batches sampled uniformly with replacement.
    /// Returns per-batch loss terms.
    std::vector<FreeEnergyTerms> train_epoch(const agentloop::ReplayBuffer& buffer,
                                             Rng& rng);

    /// One gradient step on an explicit batch (exposed for tests).
    FreeEnergyTerms train_batch(const std::vector<const agentloop::Transition*>& batch,
                                std::size_t dataset_size, Rng& rng);

    /// Loss terms without touching parameters.
    FreeEnergyTerms evaluate_batch(const std::vector<const agentloop::Transition*>& batch,
                                   std::size_t dataset_size, Rng& rng);

    void save(const std::string& path) const;
    static Trainer load(const std::string& path);

private:
    Trainer() = default;
    std::vector<diffcore::Tensor*> all_parameters();

    TrainerConfig cfg_;
    std::size_t d_s_ = 0, d_a_ = 0;
    TransitionModel transition_;
    RewardModel reward_;
    Normalizer norm_;
    diffcore::AdamState opt_;
};

}  // namespace aif::genmodel
