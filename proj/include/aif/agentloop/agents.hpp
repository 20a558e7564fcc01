#pragma once

#include <string>

#include "aif/genmodel/trainer.hpp"
#include "aif/planner/planner.hpp"

namespace aif::agentloop {

enum class AgentKind { active_inference, reward_only, epsilon_greedy };

std::string to_string(AgentKind kind);
AgentKind agent_kind_from_string(const std::string& s);

struct AgentConfig {
    AgentKind kind = AgentKind::active_inference;
    double exploration_noise_variance = 0.3;  // epsilon-greedy only
    double info_gain_weight = 1.0;            // active inference only
    planner::PlannerConfig planner;
    genmodel::TrainerConfig trainer;
};

/// active_inference plans with extrinsic value plus the information-gain
/// term; reward_only drops the information gain; epsilon_greedy is
/// reward_only plus Gaussian action noise (variance 0.3 by default, drawn
/// from noise_rng, clamped to bounds). All three consume identical planner
/// streams, so ablations with zero weight / zero noise are bit-identical to
/// reward_only.
std::vector<double> select_action(const AgentConfig& agent,
                                  const genmodel::ModelSnapshot& snapshot,
                                  const std::vector<double>& state,
                                  std::uint64_t plan_seed, Rng& noise_rng);

}  // namespace aif::agentloop
