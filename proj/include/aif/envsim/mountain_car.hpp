#pragma once

#include "aif/envsim/env.hpp"

namespace aif::envsim {

/// Continuous mountain car. State (position, velocity), action in [-1, 1].
/// p in [-1.2, 0.6], v in [-0.07, 0.07]; terminal at p >= 0.45 with reward
/// 100, otherwise reward -0.1 a^2. Velocity is zeroed at the left wall.
class MountainCarEnv final : public Env {
public:
    explicit MountainCarEnv(std::size_t max_steps = 200);

    const EnvSpec& spec() const override { return spec_; }
    std::vector<double> reset(std::uint64_t seed) override;
    StepResult step(const std::vector<double>& action) override;

    /// Pure transition, exposed for cross-checks.
    static StepResult step_from(double position, double velocity, double action);

    static constexpr double kMinPosition = -1.2;
    static constexpr double kMaxPosition = 0.6;
    static constexpr double kMaxSpeed = 0.07;
    static constexpr double kGoalPosition = 0.45;

private:
    EnvSpec spec_;
    double position_ = 0.0;
    double velocity_ = 0.0;
    std::size_t steps_ = 0;
    bool done_ = false;
};

}  // namespace aif::envsim
