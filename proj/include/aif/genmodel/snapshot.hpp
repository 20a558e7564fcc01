#pragma once

#include <vector>

#include "aif/genmodel/models.hpp"
#include "aif/genmodel/trainer.hpp"

namespace aif::genmodel {

/// Frozen copy of everything the planner needs: transition posterior (means
/// plus per-weight standard deviations in bayesian mode), reward weights and
/// normalization statistics. Immutable; safe to share across threads.
struct ModelSnapshot {
    ModelMode mode = ModelMode::bayesian;
    std::size_t d_s = 0, d_a = 0;
    MlpShape transition_shape;
    MlpShape reward_shape;
    std::vector<diffcore::Tensor> transition_mu;     // 6
    std::vector<diffcore::Tensor> transition_sigma;  // 6 in bayesian mode, empty otherwise
    std::vector<diffcore::Tensor> reward_weights;    // 6
    Normalizer norm;
    double variance_floor = 1e-6;

    /// theta = mu + sigma * eps into out (must hold 6 tensors of the right
    /// shapes, e.g. a copy of transition_mu). Point-estimate mode copies mu.
    void sample_theta(Rng& rng, std::vector<diffcore::Tensor>& out) const;
};

ModelSnapshot make_snapshot(const TransitionModel& model, const RewardModel& reward,
                            const Normalizer& norm);
ModelSnapshot make_snapshot(const Trainer& trainer);

}  // namespace aif::genmodel
