#pragma once

#include <vector>

#include "aif/agentloop/replay_buffer.hpp"
#include "aif/common/rng.hpp"

namespace aif::testsupport {

/// Stable 2-D linear system s' = A s + B a + noise, used as a learnable
/// ground truth for model-training checks.
struct LinearSystem {
    double a[4] = {0.9, 0.1, -0.05, 0.95};
    double b[2] = {0.1, 0.05};
    double noise_std = 0.01;

    std::vector<double> step(const std::vector<double>& s, double action,
                             Rng& rng) const {
        return {a[0] * s[0] + a[1] * s[1] + b[0] * action + noise_std * rng.normal(),
                a[2] * s[0] + a[3] * s[1] + b[1] * action + noise_std * rng.normal()};
    }

    /// Reward: negative squared distance to the origin (gives the reward
    /// head something learnable).
    static double reward(const std::vector<double>& s_next) {
        return -(s_next[0] * s_next[0] + s_next[1] * s_next[1]);
    }
};

inline void fill_linear_buffer(agentloop::ReplayBuffer& buffer, const LinearSystem& sys,
                               std::size_t episodes, std::size_t steps, Rng& rng) {
    for (std::size_t e = 0; e < episodes; ++e) {
        buffer.begin_episode();
        std::vector<double> s{rng.normal(), rng.normal()};
        for (std::size_t t = 0; t < steps; ++t) {
            double a = rng.uniform(-1.0, 1.0);
            auto s_next = sys.step(s, a, rng);
            buffer.add(s, {a}, s_next, LinearSystem::reward(s_next), false);
            s = s_next;
        }
    }
}

}  // namespace aif::testsupport
