#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace aif::envsim {

struct EnvSpec {
    std::size_t d_s = 0;
    std::size_t d_a = 0;
    std::vector<double> action_low;
    std::vector<double> action_high;
    std::size_t max_steps = 0;
    double reward_min = 0.0;
    double reward_max = 0.0;
};

struct StepResult {
    std::vector<double> next_state;
    double reward = 0.0;
    bool terminal = false;
    bool truncated = false;
};

/// Single-owner environment instance. reset(seed) fixes the initial state;
/// dynamics are deterministic, so a seed plus an action sequence pins the
/// whole trace.
class Env {
public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual std::vector<double> reset(std::uint64_t seed) = 0;
    virtual StepResult step(const std::vector<double>& action) = 0;
};

std::unique_ptr<Env> make_env(const std::string& name);

}  // namespace aif::envsim
