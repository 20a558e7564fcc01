#pragma once

#include <vector>

#include "aif/agentloop/replay_buffer.hpp"
#include "aif/genmodel/models.hpp"

namespace aif::genmodel {

struct FreeEnergyTerms {
    double state_kl = 0.0;
    double parameter_kl = 0.0;   // unweighted KL[q(theta) || p(theta)]
    double reward_nll = 0.0;
    double observation_nll = 0.0;
    double total = 0.0;          // state + kl_weight * parameter + reward + observation
    double kl_weight = 1.0;
    int k_theta_samples = 1;
};

struct FeConfig {
    int k_theta = 1;
    /// Weight on the parameter divergence; negative means the variational
    /// minibatch convention batch_size / dataset_size.
    double kl_weight = -1.0;
    std::size_t dataset_size = 0;
    double recognition_variance = 1.0;
    bool include_observation_nll = true;
};

struct FeResult {
    FreeEnergyTerms terms;
    /// Aligned with transition parameters() followed by reward parameters().
    std::vector<diffcore::Tensor> gradients;
};

/// Per-batch free energy and its gradients. Batch rows are
/// (state, action, next_state, reward) transitions in raw units; the
/// normalizer maps them into model space. Noise draw order is fixed:
/// previous-state sample, current-state sample, then K theta draws layer by
/// layer, so a reseeded rng freezes the estimate.
FeResult free_energy_batch(TransitionModel& model, RewardModel& reward_model,
                           const std::vector<const agentloop::Transition*>& batch,
                           const Normalizer& norm, const FeConfig& cfg, Rng& rng,
                           bool with_gradients = true);

}  // namespace aif::genmodel
