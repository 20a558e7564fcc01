#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "aif/genmodel/snapshot.hpp"

namespace aif::planner {

struct PlannerConfig {
    std::size_t horizon = 12;             // H
    std::size_t candidates = 1000;        // N
    std::size_t elites = 100;             // M
    std::size_t iterations = 10;          // I
    std::size_t theta_samples = 5;        // B
    std::size_t particles_per_theta = 4;  // J
    bool use_extrinsic = true;
    bool use_info_gain = true;
    double info_gain_weight = 1.0;
    std::vector<double> action_low, action_high;
    double policy_variance_floor = 1e-4;
    double particle_clamp = 1e6;
    double entropy_distance_floor = 1e-12;
    std::size_t threads = 1;
    /// Point-estimate candidates share theta, so scoring can run batched;
    /// results are bit-identical to the per-candidate path (tested).
    bool batch_point_scoring = true;

    std::size_t action_dim() const { return action_low.size(); }
    /// A zero weight is treated as disabled so ablations are bit-exact.
    bool info_gain_active() const { return use_info_gain && info_gain_weight != 0.0; }
    void validate() const;
};

/// Horizon-indexed diagonal Gaussian over action sequences, refit by CEM.
struct PolicyDistribution {
    std::size_t horizon = 0;
    std::size_t action_dim = 0;
    std::vector<double> mean;      // horizon * action_dim
    std::vector<double> variance;  // strictly positive

    static PolicyDistribution standard(std::size_t horizon, std::size_t action_dim);
};

/// B*J propagated belief samples per lookahead step. States are stored in
/// the model's normalized units, rewards in raw units; rows are grouped by
/// theta sample. Storage is flat: step tau occupies rows
/// [tau * B*J, (tau+1) * B*J).
struct ParticleSet {
    std::size_t theta_samples = 0;       // B (1 in point-estimate mode)
    std::size_t particles_per_theta = 0; // J
    std::size_t horizon = 0;
    std::size_t d_s = 0;
    std::vector<double> states;   // H * B*J * d_s
    std::vector<double> rewards;  // H * B*J

    std::size_t particle_count() const { return theta_samples * particles_per_theta; }
    const double* step_states(std::size_t tau) const {
        return states.data() + tau * particle_count() * d_s;
    }
    double* step_states(std::size_t tau) {
        return states.data() + tau * particle_count() * d_s;
    }
    const double* step_rewards(std::size_t tau) const {
        return rewards.data() + tau * particle_count();
    }
    double* step_rewards(std::size_t tau) {
        return rewards.data() + tau * particle_count();
    }
    double state_at(std::size_t tau, std::size_t particle, std::size_t dim) const {
        return states[(tau * particle_count() + particle) * d_s + dim];
    }
};

/// Negative expected free energy pieces; larger is better. total is exactly
/// extrinsic + param_info_gain, and param_info_gain is 0 when disabled.
struct EfeBreakdown {
    double extrinsic = 0.0;
    double param_info_gain = 0.0;
    double total = 0.0;
};

/// Reusable buffers for propagate; one per thread.
struct PropagateWorkspace {
    std::vector<std::vector<diffcore::Tensor>> theta;  // B stacks of 6
    std::vector<double> input, net_out, scratch, reward_out, reward_scratch, current;
};

/// Rolls J particles through each of B theta draws for H steps, sampling
/// next states from the transition distribution and predicting a reward for
/// every particle. Point-estimate mode uses B = 1 (the point estimate).
/// Noise order: B theta draws (layer-major), then per step a row-major
/// sweep of state noise, d_s values per particle.
ParticleSet propagate(const genmodel::ModelSnapshot& snap,
                      const std::vector<double>& start_state,
                      const std::vector<double>& actions,  // H * d_a, raw units
                      std::size_t theta_samples, std::size_t particles_per_theta,
                      Rng& rng, double particle_clamp = 1e6,
                      PropagateWorkspace* ws = nullptr);

EfeBreakdown expected_free_energy(const ParticleSet& particles,
                                  const PlannerConfig& cfg);

struct CemIterationTrace {
    std::size_t iteration = 0;
    double elite_mean_score = 0.0;
    double best_score = 0.0;
    std::vector<double> policy_mean;
};
using TraceSink = std::function<void(const CemIterationTrace&)>;

/// Test seam: replaces propagate + expected_free_energy for one candidate.
using ScoreFunction = std::function<double(const std::vector<double>& actions, Rng& rng)>;

/// Cross-entropy-method policy selection: q(pi) starts at N(0, I); each
/// iteration samples candidates (clamped to bounds), scores them, and
/// refits mean/variance to the top elites. Returns the first-step mean.
/// Deterministic given (snapshot, state, seed): every candidate owns a
/// seed-derived stream, so results do not depend on thread scheduling.
std::vector<double> cem_plan(const genmodel::ModelSnapshot& snap,
                             const PlannerConfig& cfg,
                             const std::vector<double>& state, std::uint64_t seed,
                             const ScoreFunction& score_override = nullptr,
                             TraceSink trace = nullptr,
                             PolicyDistribution* final_policy = nullptr);

}  // namespace aif::planner
