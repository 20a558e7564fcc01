#include "aif/planner/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "aif/common/check.hpp"
#include "aif/dist/knn_entropy.hpp"

namespace aif::planner {

using genmodel::ModelSnapshot;
using genmodel::softplus_value;

void PlannerConfig::validate() const {
    check_arg(horizon >= 1, "PlannerConfig: horizon must be >= 1");
    check_arg(candidates >= 1 && elites >= 1 && iterations >= 1,
              "PlannerConfig: candidate/elite/iteration counts must be positive");
    check_arg(elites <= candidates, "PlannerConfig: elites must not exceed candidates");
    check_arg(!action_low.empty() && action_low.size() == action_high.size(),
              "PlannerConfig: action bounds required");
    for (std::size_t i = 0; i < action_low.size(); ++i)
        check_arg(action_low[i] < action_high[i], "PlannerConfig: empty action range");
}

PolicyDistribution PolicyDistribution::standard(std::size_t horizon,
                                                std::size_t action_dim) {
    PolicyDistribution p;
    p.horizon = horizon;
    p.action_dim = action_dim;
    p.mean.assign(horizon * action_dim, 0.0);
    p.variance.assign(horizon * action_dim, 1.0);
    return p;
}

ParticleSet propagate(const ModelSnapshot& snap, const std::vector<double>& start_state,
                      const std::vector<double>& actions, std::size_t theta_samples,
                      std::size_t particles_per_theta, Rng& rng, double particle_clamp,
                      PropagateWorkspace* ws) {
    const std::size_t d_s = snap.d_s, d_a = snap.d_a;
    check_arg(start_state.size() == d_s, "propagate: state dimension mismatch");
    check_arg(actions.size() % d_a == 0, "propagate: ragged action sequence");
    const std::size_t horizon = actions.size() / d_a;
    check_arg(horizon >= 1, "propagate: empty action sequence");

    const std::size_t B = snap.mode == genmodel::ModelMode::point_estimate
                              ? 1
                              : std::max<std::size_t>(theta_samples, 1);
    const std::size_t J = std::max<std::size_t>(particles_per_theta, 1);
    const std::size_t rows = B * J;
    const std::size_t in_dim = d_s + d_a;
    const std::size_t out_dim = snap.transition_shape.out;

    PropagateWorkspace local;
    if (!ws) ws = &local;
    if (ws->theta.size() != B || ws->theta[0].size() != 6 ||
        !ws->theta[0][0].same_shape(snap.transition_mu[0])) {
        ws->theta.assign(B, snap.transition_mu);
    }
    ws->input.resize(rows * in_dim);
    ws->net_out.resize(rows * out_dim);
    ws->scratch.resize(2 * rows * snap.transition_shape.hidden);
    ws->reward_out.resize(rows);
    ws->reward_scratch.resize(2 * rows * snap.reward_shape.hidden);

    for (std::size_t b = 0; b < B; ++b) snap.sample_theta(rng, ws->theta[b]);

    ParticleSet ps;
    ps.theta_samples = B;
    ps.particles_per_theta = J;
    ps.horizon = horizon;
    ps.d_s = d_s;
    ps.states.resize(horizon * rows * d_s);
    ps.rewards.resize(horizon * rows);

    // current normalized states, one row per particle
    ws->current.resize(rows * d_s);
    double start_norm[64];
    check_arg(d_s <= 64 && d_a <= 64, "propagate: dimension too large");
    snap.norm.normalize_state(start_state.data(), start_norm);
    for (std::size_t r = 0; r < rows; ++r)
        std::copy(start_norm, start_norm + d_s, ws->current.begin() + r * d_s);

    double action_norm[64];
    const double* reward_w[6];
    for (int i = 0; i < 6; ++i) reward_w[i] = snap.reward_weights[i].data();
    const bool point_mode = snap.mode == genmodel::ModelMode::point_estimate;
    const double* current = ws->current.data();

    for (std::size_t tau = 0; tau < horizon; ++tau) {
        snap.norm.normalize_action(actions.data() + tau * d_a, action_norm);
        for (std::size_t r = 0; r < rows; ++r) {
            double* row = ws->input.data() + r * in_dim;
            std::copy(current + r * d_s, current + (r + 1) * d_s, row);
            std::copy(action_norm, action_norm + d_a, row + d_s);
        }

        for (std::size_t b = 0; b < B; ++b) {
            const double* w[6];
            for (int i = 0; i < 6; ++i) w[i] = ws->theta[b][i].data();
            mlp_forward_numeric(snap.transition_shape, w, J,
                                ws->input.data() + b * J * in_dim,
                                ws->net_out.data() + b * J * out_dim,
                                ws->scratch.data());
        }

        double* step_states = ps.step_states(tau);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* out = ws->net_out.data() + r * out_dim;
            double* next = step_states + r * d_s;
            for (std::size_t k = 0; k < d_s; ++k) {
                double sigma = point_mode ? std::sqrt(softplus_value(out[d_s + k]) +
                                                      snap.variance_floor)
                                          : 1.0;
                double v = out[k] + sigma * rng.normal();
                if (v > particle_clamp) v = particle_clamp;
                if (v < -particle_clamp) v = -particle_clamp;
                check_runtime(std::isfinite(v), "propagate: non-finite particle");
                next[k] = v;
            }
        }

        mlp_forward_numeric(snap.reward_shape, reward_w, rows, step_states,
                            ws->reward_out.data(), ws->reward_scratch.data());
        double* step_rewards = ps.step_rewards(tau);
        for (std::size_t r = 0; r < rows; ++r)
            step_rewards[r] = snap.norm.denormalize_reward(ws->reward_out[r]);

        current = step_states;
    }
    return ps;
}

EfeBreakdown expected_free_energy(const ParticleSet& particles,
                                  const PlannerConfig& cfg) {
    const std::size_t n = particles.particle_count();
    check_arg(particles.horizon >= 1 &&
                  particles.states.size() == particles.horizon * n * particles.d_s,
              "expected_free_energy: incomplete particle set");

    EfeBreakdown efe;
    if (cfg.use_extrinsic) {
        for (std::size_t tau = 0; tau < particles.horizon; ++tau) {
            const double* step_rewards = particles.step_rewards(tau);
            double sum = 0.0;
            for (std::size_t r = 0; r < n; ++r) sum += step_rewards[r];
            efe.extrinsic += sum / static_cast<double>(n);
        }
    }
    if (cfg.info_gain_active()) {
        check_arg(n >= 2, "expected_free_energy: entropy estimator needs >= 2 particles");
        double entropy_sum = 0.0;
        for (std::size_t tau = 0; tau < particles.horizon; ++tau)
            entropy_sum += dist::knn_entropy_view(n, particles.d_s,
                                                  particles.step_states(tau),
                                                  cfg.entropy_distance_floor);
        efe.param_info_gain = cfg.info_gain_weight * entropy_sum;
    }
    efe.total = efe.extrinsic + efe.param_info_gain;
    return efe;
}

namespace {

// Batched point-estimate scorer. All candidates share the point estimate,
// so their particles can step through the network together; per-candidate
// noise is pre-drawn from each candidate's stream in propagate's exact
// order, which keeps scores bit-identical to the per-candidate path.
void score_range_batched_point(const ModelSnapshot& snap, const PlannerConfig& cfg,
                               const std::vector<double>& state, std::uint64_t seed,
                               std::size_t iteration, const PolicyDistribution& policy,
                               std::size_t begin, std::size_t end,
                               std::vector<std::vector<double>>& actions,
                               std::vector<double>& scores) {
    const std::size_t d_s = snap.d_s, d_a = snap.d_a;
    const std::size_t J = std::max<std::size_t>(cfg.particles_per_theta, 1);
    const std::size_t H = cfg.horizon;
    const std::size_t in_dim = d_s + d_a;
    const std::size_t out_dim = snap.transition_shape.out;
    const std::size_t dims = H * d_a;

    double start_norm[64], action_norm[64];
    check_arg(d_s <= 64 && d_a <= 64, "cem_plan: dimension too large");
    snap.norm.normalize_state(state.data(), start_norm);

    const double* trans_w[6];
    const double* reward_w[6];
    for (int i = 0; i < 6; ++i) {
        trans_w[i] = snap.transition_mu[i].data();
        reward_w[i] = snap.reward_weights[i].data();
    }

    // candidate tiles keep the step buffers cache-resident
    const std::size_t tile = std::min<std::size_t>(end - begin, 64);
    const std::size_t rows_max = tile * J;
    std::vector<double> noise(tile * H * J * d_s);
    std::vector<double> current(rows_max * d_s), input(rows_max * in_dim);
    std::vector<double> net_out(rows_max * out_dim);
    std::vector<double> scratch(2 * rows_max * snap.transition_shape.hidden);
    std::vector<double> reward_out(rows_max);
    std::vector<double> reward_scratch(2 * rows_max * snap.reward_shape.hidden);

    for (std::size_t t0 = begin; t0 < end; t0 += tile) {
        const std::size_t n_cand = std::min(tile, end - t0);
        const std::size_t rows = n_cand * J;

        for (std::size_t c = 0; c < n_cand; ++c) {
            Rng rng(derive_seed(seed, iteration + 1, t0 + c + 1));
            std::vector<double>& a = actions[t0 + c];
            a.resize(dims);
            for (std::size_t i = 0; i < dims; ++i) {
                double v = policy.mean[i] + std::sqrt(policy.variance[i]) * rng.normal();
                std::size_t dim = i % d_a;
                a[i] = std::clamp(v, cfg.action_low[dim], cfg.action_high[dim]);
            }
            rng.normal_fill(noise.data() + c * H * J * d_s, H * J * d_s);
        }

        for (std::size_t r = 0; r < rows; ++r)
            std::copy(start_norm, start_norm + d_s, current.begin() + r * d_s);
        std::vector<double> extrinsic(n_cand, 0.0), info(n_cand, 0.0);
        std::vector<bool> bad(n_cand, false);

        for (std::size_t tau = 0; tau < H; ++tau) {
            for (std::size_t c = 0; c < n_cand; ++c) {
                snap.norm.normalize_action(actions[t0 + c].data() + tau * d_a,
                                           action_norm);
                for (std::size_t j = 0; j < J; ++j) {
                    std::size_t r = c * J + j;
                    double* row = input.data() + r * in_dim;
                    std::copy(current.begin() + r * d_s,
                              current.begin() + (r + 1) * d_s, row);
                    std::copy(action_norm, action_norm + d_a, row + d_s);
                }
            }
            mlp_forward_numeric(snap.transition_shape, trans_w, rows, input.data(),
                                net_out.data(), scratch.data());
            for (std::size_t c = 0; c < n_cand; ++c) {
                const double* cn = noise.data() + c * H * J * d_s + tau * J * d_s;
                for (std::size_t j = 0; j < J; ++j) {
                    std::size_t r = c * J + j;
                    const double* out = net_out.data() + r * out_dim;
                    double* next = current.data() + r * d_s;
                    for (std::size_t k = 0; k < d_s; ++k) {
                        double sigma = std::sqrt(softplus_value(out[d_s + k]) +
                                                 snap.variance_floor);
                        double v = out[k] + sigma * cn[j * d_s + k];
                        if (v > cfg.particle_clamp) v = cfg.particle_clamp;
                        if (v < -cfg.particle_clamp) v = -cfg.particle_clamp;
                        if (!std::isfinite(v)) {
                            bad[c] = true;
                            v = 0.0;
                        }
                        next[k] = v;
                    }
                }
            }
            if (cfg.use_extrinsic) {
                mlp_forward_numeric(snap.reward_shape, reward_w, rows, current.data(),
                                    reward_out.data(), reward_scratch.data());
                for (std::size_t c = 0; c < n_cand; ++c) {
                    double sum = 0.0;
                    for (std::size_t j = 0; j < J; ++j)
                        sum += snap.norm.denormalize_reward(reward_out[c * J + j]);
                    extrinsic[c] += sum / static_cast<double>(J);
                }
            }
            if (cfg.info_gain_active()) {
                for (std::size_t c = 0; c < n_cand; ++c)
                    info[c] += dist::knn_entropy_view(J, d_s,
                                                      current.data() + c * J * d_s,
                                                      cfg.entropy_distance_floor);
            }
        }

        for (std::size_t c = 0; c < n_cand; ++c) {
            double total = (cfg.use_extrinsic ? extrinsic[c] : 0.0) +
                           (cfg.info_gain_active() ? cfg.info_gain_weight * info[c] : 0.0);
            scores[t0 + c] = (!bad[c] && std::isfinite(total))
                                 ? total
                                 : -std::numeric_limits<double>::infinity();
        }
    }
}

void score_range(const ModelSnapshot& snap, const PlannerConfig& cfg,
                 const std::vector<double>& state, std::uint64_t seed,
                 std::size_t iteration, const PolicyDistribution& policy,
                 const ScoreFunction& score_override, std::size_t begin,
                 std::size_t end, std::vector<std::vector<double>>& actions,
                 std::vector<double>& scores) {
    if (!score_override && cfg.batch_point_scoring &&
        snap.mode == genmodel::ModelMode::point_estimate) {
        score_range_batched_point(snap, cfg, state, seed, iteration, policy, begin, end,
                                  actions, scores);
        return;
    }
    const std::size_t dims = policy.mean.size();
    const std::size_t d_a = cfg.action_dim();
    PropagateWorkspace ws;
    for (std::size_t c = begin; c < end; ++c) {
        Rng rng(derive_seed(seed, iteration + 1, c + 1));
        std::vector<double>& a = actions[c];
        a.resize(dims);
        for (std::size_t i = 0; i < dims; ++i) {
            double v = policy.mean[i] + std::sqrt(policy.variance[i]) * rng.normal();
            std::size_t dim = i % d_a;
            a[i] = std::clamp(v, cfg.action_low[dim], cfg.action_high[dim]);
        }
        double s;
        if (score_override) {
            s = score_override(a, rng);
        } else {
            try {
                ParticleSet ps = propagate(snap, state, a, cfg.theta_samples,
                                           cfg.particles_per_theta, rng,
                                           cfg.particle_clamp, &ws);
                s = expected_free_energy(ps, cfg).total;
            } catch (const std::runtime_error&) {
                s = -std::numeric_limits<double>::infinity();  // bad candidate
            }
        }
        scores[c] = std::isfinite(s) ? s : -std::numeric_limits<double>::infinity();
    }
}

}  // namespace

std::vector<double> cem_plan(const ModelSnapshot& snap, const PlannerConfig& cfg,
                             const std::vector<double>& state, std::uint64_t seed,
                             const ScoreFunction& score_override, TraceSink trace,
                             PolicyDistribution* final_policy) {
    cfg.validate();
    const std::size_t d_a = cfg.action_dim();
    const std::size_t dims = cfg.horizon * d_a;

    PolicyDistribution policy = PolicyDistribution::standard(cfg.horizon, d_a);
    std::vector<std::vector<double>> actions(cfg.candidates);
    std::vector<double> scores(cfg.candidates);
    std::vector<std::size_t> order(cfg.candidates);

    for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
        std::size_t n_threads = std::max<std::size_t>(1, cfg.threads);
        n_threads = std::min(n_threads, cfg.candidates);
        if (n_threads <= 1) {
            score_range(snap, cfg, state, seed, iter, policy, score_override, 0,
                        cfg.candidates, actions, scores);
        } else {
            std::vector<std::thread> workers;
            std::size_t chunk = (cfg.candidates + n_threads - 1) / n_threads;
            for (std::size_t t = 0; t < n_threads; ++t) {
                std::size_t begin = t * chunk;
                std::size_t end = std::min(begin + chunk, cfg.candidates);
                if (begin >= end) break;
                workers.emplace_back([&, begin, end] {
                    score_range(snap, cfg, state, seed, iter, policy, score_override,
                                begin, end, actions, scores);
                });
            }
            for (auto& w : workers) w.join();
        }

        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return a < b;
        });
        check_runtime(std::isfinite(scores[order[0]]),
                      "cem_plan: every candidate scored non-finite");

        const std::size_t m = cfg.elites;
        for (std::size_t i = 0; i < dims; ++i) {
            double mean = 0.0;
            for (std::size_t e = 0; e < m; ++e) mean += actions[order[e]][i];
            mean /= static_cast<double>(m);
            double var = 0.0;
            for (std::size_t e = 0; e < m; ++e) {
                double d = actions[order[e]][i] - mean;
                var += d * d;
            }
            var /= static_cast<double>(m);
            policy.mean[i] = mean;
            policy.variance[i] = std::max(var, cfg.policy_variance_floor);
        }

        if (trace) {
            CemIterationTrace t;
            t.iteration = iter;
            double acc = 0.0;
            for (std::size_t e = 0; e < m; ++e) acc += scores[order[e]];
            t.elite_mean_score = acc / static_cast<double>(m);
            t.best_score = scores[order[0]];
            t.policy_mean = policy.mean;
            trace(t);
        }
    }

    if (final_policy) *final_policy = policy;
    std::vector<double> action(d_a);
    for (std::size_t k = 0; k < d_a; ++k)
        action[k] = std::clamp(policy.mean[k], cfg.action_low[k], cfg.action_high[k]);
    return action;
}

}  // namespace aif::planner
