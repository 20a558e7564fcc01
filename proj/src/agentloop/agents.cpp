#include "aif/agentloop/agents.hpp"

#include <algorithm>
#include <cmath>

#include "aif/common/check.hpp"

namespace aif::agentloop {

std::string to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::active_inference: return "active_inference";
        case AgentKind::reward_only: return "reward_only";
        case AgentKind::epsilon_greedy: return "epsilon_greedy";
    }
    return "?";
}

AgentKind agent_kind_from_string(const std::string& s) {
    if (s == "active_inference") return AgentKind::active_inference;
    if (s == "reward_only") return AgentKind::reward_only;
    if (s == "epsilon_greedy") return AgentKind::epsilon_greedy;
    fail_contract("unknown agent kind '" + s + "'");
}

std::vector<double> select_action(const AgentConfig& agent,
                                  const genmodel::ModelSnapshot& snapshot,
                                  const std::vector<double>& state,
                                  std::uint64_t plan_seed, Rng& noise_rng) {
    planner::PlannerConfig cfg = agent.planner;
    cfg.use_extrinsic = true;
    if (agent.kind == AgentKind::active_inference) {
        cfg.use_info_gain = true;
        cfg.info_gain_weight = agent.info_gain_weight;
    } else {
        cfg.use_info_gain = false;
    }

    std::vector<double> action = planner::cem_plan(snapshot, cfg, state, plan_seed);

    if (agent.kind == AgentKind::epsilon_greedy &&
        agent.exploration_noise_variance > 0.0) {
        double sigma = std::sqrt(agent.exploration_noise_variance);
        for (std::size_t k = 0; k < action.size(); ++k) {
            action[k] = std::clamp(action[k] + sigma * noise_rng.normal(),
                                   cfg.action_low[k], cfg.action_high[k]);
        }
    }
    return action;
}

}  // namespace aif::agentloop
