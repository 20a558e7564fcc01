#pragma once

#include "aif/envsim/env.hpp"

namespace aif::envsim {

/// Pendulum swing-up. Observation (cos th, sin th, th_dot), torque in
/// [-2, 2]. th = 0 is upright. Semi-implicit Euler with
/// th_ddot = (3g / 2l) sin th + (3 / (m l^2)) u, g=10, m=1, l=1, dt=0.05.
/// Reward -(wrap(th)^2 + 0.1 th_dot^2 + 0.001 u^2) on the pre-step state;
/// never terminal, truncated at max_steps.
class PendulumEnv final : public Env {
public:
    explicit PendulumEnv(std::size_t max_steps = 200);

    const EnvSpec& spec() const override { return spec_; }
    std::vector<double> reset(std::uint64_t seed) override;
    StepResult step(const std::vector<double>& action) override;

    /// (theta, theta_dot, torque) -> (theta', theta_dot', reward)
    static void step_angles(double theta, double theta_dot, double torque,
                            double& theta_out, double& theta_dot_out, double& reward);

    /// Map an angle to (-pi, pi].
    static double wrap_angle(double theta);

    static constexpr double kMaxSpeed = 8.0;
    static constexpr double kMaxTorque = 2.0;
    static constexpr double kDt = 0.05;
    static constexpr double kGravity = 10.0;

private:
    EnvSpec spec_;
    double theta_ = 0.0;
    double theta_dot_ = 0.0;
    std::size_t steps_ = 0;
    bool done_ = false;
};

}  // namespace aif::envsim
