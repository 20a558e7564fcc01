#include "aif/envsim/mountain_car.hpp"

#include <algorithm>
#include <cmath>

#include "aif/common/check.hpp"
#include "aif/common/rng.hpp"

namespace aif::envsim {

MountainCarEnv::MountainCarEnv(std::size_t max_steps) {
    spec_.d_s = 2;
    spec_.d_a = 1;
    spec_.action_low = {-1.0};
    spec_.action_high = {1.0};
    spec_.max_steps = max_steps;
    spec_.reward_min = -0.1;
    spec_.reward_max = 100.0;
}

std::vector<double> MountainCarEnv::reset(std::uint64_t seed) {
    Rng rng(seed);
    position_ = rng.uniform(-0.6, -0.4);
    velocity_ = 0.0;
    steps_ = 0;
    done_ = false;
    return {position_, velocity_};
}

StepResult MountainCarEnv::step_from(double position, double velocity, double action) {
    double a = std::clamp(action, -1.0, 1.0);
    double v = velocity + 0.0015 * a - 0.0025 * std::cos(3.0 * position);
    v = std::clamp(v, -kMaxSpeed, kMaxSpeed);
    double p = position + v;
    p = std::clamp(p, kMinPosition, kMaxPosition);
    if (p <= kMinPosition && v < 0.0) v = 0.0;

    StepResult r;
    r.next_state = {p, v};
    r.terminal = p >= kGoalPosition;
    r.reward = r.terminal ? 100.0 : -0.1 * a * a;
    return r;
}

StepResult MountainCarEnv::step(const std::vector<double>& action) {
    check_arg(action.size() == 1, "MountainCarEnv::step: action must be scalar");
    check_runtime(!done_, "MountainCarEnv::step: episode over, call reset");
    StepResult r = step_from(position_, velocity_, action[0]);
    position_ = r.next_state[0];
    velocity_ = r.next_state[1];
    steps_ += 1;
    if (!r.terminal && steps_ >= spec_.max_steps) r.truncated = true;
    done_ = r.terminal || r.truncated;
    return r;
}

}  // namespace aif::envsim
