#include "aif/agentloop/replay_buffer.hpp"

#include <cmath>

#include "aif/common/check.hpp"

namespace aif::agentloop {

ReplayBuffer::ReplayBuffer(std::size_t d_s, std::size_t d_a) : d_s_(d_s), d_a_(d_a) {
    check_arg(d_s >= 1 && d_a >= 1, "ReplayBuffer: dims must be positive");
    s_sum_.assign(d_s, 0.0);
    s_sumsq_.assign(d_s, 0.0);
    a_sum_.assign(d_a, 0.0);
    a_sumsq_.assign(d_a, 0.0);
}

void ReplayBuffer::begin_episode() {
    episode_count_ += 1;
    next_step_index_ = 0;
}

void ReplayBuffer::add(std::vector<double> state, std::vector<double> action,
                       std::vector<double> next_state, double reward, bool terminal) {
    check_arg(episode_count_ > 0, "ReplayBuffer::add: begin_episode first");
    check_arg(state.size() == d_s_ && next_state.size() == d_s_ && action.size() == d_a_,
              "ReplayBuffer::add: dimension mismatch");
    for (std::size_t i = 0; i < d_s_; ++i) {
        s_sum_[i] += state[i];
        s_sumsq_[i] += state[i] * state[i];
    }
    for (std::size_t i = 0; i < d_a_; ++i) {
        a_sum_[i] += action[i];
        a_sumsq_[i] += action[i] * action[i];
    }
    r_sum_ += reward;
    r_sumsq_ += reward * reward;

    Transition t;
    t.state = std::move(state);
    t.action = std::move(action);
    t.next_state = std::move(next_state);
    t.reward = reward;
    t.terminal = terminal;
    t.episode_id = static_cast<std::uint32_t>(episode_count_ - 1);
    t.step_index = next_step_index_++;
    transitions_.push_back(std::move(t));
}

genmodel::Normalizer ReplayBuffer::normalizer() const {
    genmodel::Normalizer norm = genmodel::Normalizer::identity(d_s_, d_a_);
    if (transitions_.empty()) return norm;
    double n = static_cast<double>(transitions_.size());
    auto finish = [n](const std::vector<double>& sum, const std::vector<double>& sumsq,
                      std::vector<double>& mean, std::vector<double>& std) {
        for (std::size_t i = 0; i < sum.size(); ++i) {
            mean[i] = sum[i] / n;
            double var = sumsq[i] / n - mean[i] * mean[i];
            std[i] = std::sqrt(var > 0.0 ? var : 0.0);
            if (std[i] < 1e-6) std[i] = 1e-6;
        }
    };
    finish(s_sum_, s_sumsq_, norm.state_mean, norm.state_std);
    finish(a_sum_, a_sumsq_, norm.action_mean, norm.action_std);
    norm.reward_mean = r_sum_ / n;
    double rvar = r_sumsq_ / n - norm.reward_mean * norm.reward_mean;
    norm.reward_std = std::sqrt(rvar > 0.0 ? rvar : 0.0);
    if (norm.reward_std < 1e-6) norm.reward_std = 1e-6;
    return norm;
}

}  // namespace aif::agentloop
