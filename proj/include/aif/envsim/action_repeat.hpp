#pragma once

#include <memory>

#include "aif/envsim/env.hpp"

namespace aif::envsim {

/// Applies each agent action k times, summing rewards. Terminal or
/// truncation short-circuits the repeat. max_steps in the reported spec is
/// unchanged (it counts inner steps of the wrapped environment).
class ActionRepeat final : public Env {
public:
    ActionRepeat(std::unique_ptr<Env> inner, std::size_t k);

    const EnvSpec& spec() const override { return inner_->spec(); }
    std::vector<double> reset(std::uint64_t seed) override { return inner_->reset(seed); }
    StepResult step(const std::vector<double>& action) override;

private:
    std::unique_ptr<Env> inner_;
    std::size_t k_;
};

}  // namespace aif::envsim
