#include "aif/envsim/action_repeat.hpp"

#include "aif/common/check.hpp"
#include "aif/envsim/mountain_car.hpp"
#include "aif/envsim/pendulum.hpp"

namespace aif::envsim {

ActionRepeat::ActionRepeat(std::unique_ptr<Env> inner, std::size_t k)
    : inner_(std::move(inner)), k_(k) {
    check_arg(k_ >= 1, "ActionRepeat: k must be >= 1");
}

StepResult ActionRepeat::step(const std::vector<double>& action) {
    StepResult out;
    for (std::size_t i = 0; i < k_; ++i) {
        StepResult r = inner_->step(action);
        out.next_state = std::move(r.next_state);
        out.reward += r.reward;
        out.terminal = r.terminal;
        out.truncated = r.truncated;
        if (r.terminal || r.truncated) break;
    }
    return out;
}

std::unique_ptr<Env> make_env(const std::string& name) {
    if (name == "mountain-car") return std::make_unique<MountainCarEnv>();
    if (name == "pendulum") return std::make_unique<PendulumEnv>();
    fail_contract("make_env: unknown environment '" + name + "'");
}

}  // namespace aif::envsim
