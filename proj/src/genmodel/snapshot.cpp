#include "aif/genmodel/snapshot.hpp"

#include <cmath>

#include "aif/common/check.hpp"

namespace aif::genmodel {

void ModelSnapshot::sample_theta(Rng& rng, std::vector<diffcore::Tensor>& out) const {
    check_arg(out.size() == 6, "ModelSnapshot::sample_theta: need 6 target tensors");
    if (mode == ModelMode::point_estimate) {
        for (int l = 0; l < 6; ++l) out[l] = transition_mu[l];
        return;
    }
    for (int l = 0; l < 6; ++l) {
        const diffcore::Tensor& mu = transition_mu[l];
        const diffcore::Tensor& sigma = transition_sigma[l];
        diffcore::Tensor& dst = out[l];
        for (std::size_t i = 0; i < mu.size(); ++i)
            dst[i] = mu[i] + sigma[i] * rng.normal();
    }
}

ModelSnapshot make_snapshot(const TransitionModel& model, const RewardModel& reward,
                            const Normalizer& norm) {
    ModelSnapshot s;
    s.mode = model.mode();
    s.d_s = model.d_s();
    s.d_a = model.d_a();
    s.transition_shape = model.shape();
    s.reward_shape = reward.shape();
    s.variance_floor = model.variance_floor();
    if (model.mode() == ModelMode::bayesian) {
        s.transition_mu = model.variational().mu;
        for (const auto& rho : model.variational().rho) {
            diffcore::Tensor sigma = rho;
            for (std::size_t i = 0; i < sigma.size(); ++i)
                sigma[i] = std::sqrt(softplus_value(sigma[i]));
            s.transition_sigma.push_back(std::move(sigma));
        }
    } else {
        s.transition_mu = model.point().tensors;
    }
    s.reward_weights = reward.params().tensors;
    s.norm = norm;
    return s;
}

ModelSnapshot make_snapshot(const Trainer& trainer) {
    return make_snapshot(trainer.transition(), trainer.reward(), trainer.normalizer());
}

}  // namespace aif::genmodel
