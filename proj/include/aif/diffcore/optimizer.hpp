#pragma once

#include <cstdint>
#include <vector>

#include "aif/diffcore/tensor.hpp"

namespace aif::diffcore {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adaptive-moment stochastic gradient optimizer. Moments are allocated on
/// first use and must keep the parameter shapes afterwards; the step count
/// is strictly increasing.
class AdamState {
public:
    explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

    const AdamConfig& config() const { return cfg_; }
    AdamConfig& config() { return cfg_; }
    std::int64_t step_count() const { return step_; }

    /// One update over a parameter list; params[i] is updated in place from
    /// grads[i]. The lists must keep the same order and shapes across calls.
    void step(const std::vector<Tensor*>& params,
              const std::vector<const Tensor*>& grads);

    // checkpoint access
    const std::vector<Tensor>& first_moments() const { return m_; }
    const std::vector<Tensor>& second_moments() const { return v_; }
    void restore(std::int64_t step, std::vector<Tensor> m, std::vector<Tensor> v);

private:
    AdamConfig cfg_;
    std::int64_t step_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

}  // namespace aif::diffcore
