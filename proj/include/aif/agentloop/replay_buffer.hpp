#pragma once

#include <cstdint>
#include <vector>

#include "aif/genmodel/normalizer.hpp"

namespace aif::agentloop {

struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    std::vector<double> next_state;
    double reward = 0.0;
    bool terminal = false;
    std::uint32_t episode_id = 0;
    std::uint32_t step_index = 0;
};

/// Append-only transition store with episode boundaries and running
/// normalization statistics (accumulated over state/action/reward fields).
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t d_s, std::size_t d_a);

    /// Opens a new episode; subsequent add() calls belong to it.
    void begin_episode();
    void add(std::vector<double> state, std::vector<double> action,
             std::vector<double> next_state, double reward, bool terminal);

    std::size_t size() const { return transitions_.size(); }
    std::size_t episode_count() const { return episode_count_; }
    std::size_t d_s() const { return d_s_; }
    std::size_t d_a() const { return d_a_; }
    const Transition& operator[](std::size_t i) const { return transitions_[i]; }
    const std::vector<Transition>& transitions() const { return transitions_; }

    /// Standardization statistics over everything stored so far. Stds are
    /// floored at 1e-6.
    genmodel::Normalizer normalizer() const;

private:
    std::size_t d_s_, d_a_;
    std::vector<Transition> transitions_;
    std::size_t episode_count_ = 0;
    std::uint32_t next_step_index_ = 0;

    // running sums for normalization
    std::vector<double> s_sum_, s_sumsq_, a_sum_, a_sumsq_;
    double r_sum_ = 0.0, r_sumsq_ = 0.0;
};

}  // namespace aif::agentloop
