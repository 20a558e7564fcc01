#include "aif/envsim/pendulum.hpp"

#include <algorithm>
#include <cmath>

#include "aif/common/check.hpp"
#include "aif/common/rng.hpp"

namespace aif::envsim {

PendulumEnv::PendulumEnv(std::size_t max_steps) {
    spec_.d_s = 3;
    spec_.d_a = 1;
    spec_.action_low = {-kMaxTorque};
    spec_.action_high = {kMaxTorque};
    spec_.max_steps = max_steps;
    spec_.reward_min = -(M_PI * M_PI + 0.1 * kMaxSpeed * kMaxSpeed +
                         0.001 * kMaxTorque * kMaxTorque);
    spec_.reward_max = 0.0;
}

double PendulumEnv::wrap_angle(double theta) {
    double t = std::fmod(theta + M_PI, 2.0 * M_PI);
    if (t <= 0.0) t += 2.0 * M_PI;
    return t - M_PI;
}

void PendulumEnv::step_angles(double theta, double theta_dot, double torque,
                              double& theta_out, double& theta_dot_out,
                              double& reward) {
    double u = std::clamp(torque, -kMaxTorque, kMaxTorque);
    double wrapped = wrap_angle(theta);
    reward = -(wrapped * wrapped + 0.1 * theta_dot * theta_dot + 0.001 * u * u);

    double theta_ddot = 1.5 * kGravity * std::sin(theta) + 3.0 * u;
    theta_dot_out = std::clamp(theta_dot + theta_ddot * kDt, -kMaxSpeed, kMaxSpeed);
    theta_out = theta + theta_dot_out * kDt;
}

std::vector<double> PendulumEnv::reset(std::uint64_t seed) {
    Rng rng(seed);
    theta_ = rng.uniform(-M_PI, M_PI);
    theta_dot_ = rng.uniform(-1.0, 1.0);
    steps_ = 0;
    done_ = false;
    return {std::cos(theta_), std::sin(theta_), theta_dot_};
}

StepResult PendulumEnv::step(const std::vector<double>& action) {
    check_arg(action.size() == 1, "PendulumEnv::step: action must be scalar");
    check_runtime(!done_, "PendulumEnv::step: episode over, call reset");
    StepResult r;
    step_angles(theta_, theta_dot_, action[0], theta_, theta_dot_, r.reward);
    r.next_state = {std::cos(theta_), std::sin(theta_), theta_dot_};
    steps_ += 1;
    r.terminal = false;
    r.truncated = steps_ >= spec_.max_steps;
    done_ = r.truncated;
    return r;
}

}  // namespace aif::envsim
