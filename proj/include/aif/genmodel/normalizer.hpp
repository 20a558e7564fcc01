#pragma once

#include <cstddef>
#include <vector>

namespace aif::genmodel {

/// Per-dimension standardization for states, actions and rewards. The model
/// always operates in normalized units; predictions are mapped back out.
struct Normalizer {
    std::vector<double> state_mean, state_std;
    std::vector<double> action_mean, action_std;
    double reward_mean = 0.0;
    double reward_std = 1.0;

    static Normalizer identity(std::size_t d_s, std::size_t d_a) {
        Normalizer n;
        n.state_mean.assign(d_s, 0.0);
        n.state_std.assign(d_s, 1.0);
        n.action_mean.assign(d_a, 0.0);
        n.action_std.assign(d_a, 1.0);
        return n;
    }

    void normalize_state(const double* in, double* out) const {
        for (std::size_t i = 0; i < state_mean.size(); ++i)
            out[i] = (in[i] - state_mean[i]) / state_std[i];
    }
    void denormalize_state(const double* in, double* out) const {
        for (std::size_t i = 0; i < state_mean.size(); ++i)
            out[i] = in[i] * state_std[i] + state_mean[i];
    }
    void normalize_action(const double* in, double* out) const {
        for (std::size_t i = 0; i < action_mean.size(); ++i)
            out[i] = (in[i] - action_mean[i]) / action_std[i];
    }
    double normalize_reward(double r) const { return (r - reward_mean) / reward_std; }
    double denormalize_reward(double r) const { return r * reward_std + reward_mean; }
};

}  // namespace aif::genmodel
