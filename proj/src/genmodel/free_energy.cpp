#include "aif/genmodel/free_energy.hpp"

#include <cmath>

#include "aif/common/check.hpp"

namespace aif::genmodel {

using diffcore::Tape;
using diffcore::Tensor;
using diffcore::Var;

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

FeResult free_energy_batch(TransitionModel& model, RewardModel& reward_model,
                           const std::vector<const agentloop::Transition*>& batch,
                           const Normalizer& norm, const FeConfig& cfg, Rng& rng,
                           bool with_gradients) {
    const std::size_t n = batch.size();
    check_arg(n >= 1, "free_energy_batch: empty batch");
    check_arg(cfg.k_theta >= 1, "free_energy_batch: K must be >= 1");
    const std::size_t d_s = model.d_s(), d_a = model.d_a();
    const double rv = cfg.recognition_variance;
    check_arg(rv > 0.0, "free_energy_batch: recognition variance must be positive");

    // State and reward terms below are per-timestep batch means; the
    // variational minibatch convention (sum over the batch with the
    // parameter divergence weighted batch/dataset) divides through to a
    // 1/dataset weight in mean units. Adam is invariant to the common
    // scale, so the full-dataset bound is preserved.
    double kl_weight = cfg.kl_weight;
    if (kl_weight < 0.0) {
        check_arg(cfg.dataset_size > 0,
                  "free_energy_batch: dataset_size required for default kl weight");
        kl_weight = 1.0 / static_cast<double>(cfg.dataset_size);
    }

    // Normalized batch matrices.
    Tensor o_prev = Tensor::zeros({n, d_s});
    Tensor actions = Tensor::zeros({n, d_a});
    Tensor o_t = Tensor::zeros({n, d_s});
    Tensor rewards = Tensor::zeros({n, 1});
    for (std::size_t r = 0; r < n; ++r) {
        const auto& tr = *batch[r];
        norm.normalize_state(tr.state.data(), o_prev.data() + r * d_s);
        norm.normalize_action(tr.action.data(), actions.data() + r * d_a);
        norm.normalize_state(tr.next_state.data(), o_t.data() + r * d_s);
        rewards[r] = norm.normalize_reward(tr.reward);
    }

    // Reparameterized samples of q(s|o); the recognition map is a frozen
    // identity, so these are constants on the tape.
    const double sqrt_rv = std::sqrt(rv);
    Tensor s_prev = o_prev;
    for (std::size_t i = 0; i < s_prev.size(); ++i) s_prev[i] += sqrt_rv * rng.normal();
    Tensor s_t = o_t;
    double obs_nll = 0.0;
    for (std::size_t i = 0; i < s_t.size(); ++i) {
        double eps = rng.normal();
        s_t[i] += sqrt_rv * eps;
        obs_nll += 0.5 * (kLog2Pi + rv * eps * eps);
    }
    obs_nll /= static_cast<double>(n);

    // Transition input (s_{t-1} sample, a_{t-1}).
    Tensor x = Tensor::zeros({n, d_s + d_a});
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d_s; ++c) x.at(r, c) = s_prev.at(r, c);
        for (std::size_t c = 0; c < d_a; ++c) x.at(r, d_s + c) = actions.at(r, c);
    }

    Tape t;
    Var x_const = t.constant(x);
    Var o_t_const = t.constant(o_t);

    std::vector<Var> leaves;  // gradient extraction order
    Var state_kl_node, param_kl_node;
    const double inv_n = 1.0 / static_cast<double>(n);

    if (model.mode() == ModelMode::bayesian) {
        VariationalMlp& vw = model.variational();
        std::array<Var, 6> mu_leaf, rho_leaf, sigma_node;
        for (int l = 0; l < 6; ++l) {
            mu_leaf[l] = t.leaf(vw.mu[l]);
            leaves.push_back(mu_leaf[l]);
        }
        for (int l = 0; l < 6; ++l) {
            rho_leaf[l] = t.leaf(vw.rho[l]);
            leaves.push_back(rho_leaf[l]);
        }
        std::array<Var, 6> var_node;
        for (int l = 0; l < 6; ++l) {
            var_node[l] = t.softplus(rho_leaf[l]);
            sigma_node[l] = t.sqrt(var_node[l]);
        }

        // state divergence: K reparameterized theta draws, analytic
        // KL[N(o_t, rv) || N(mu_theta, 1)] averaged over the batch and K
        const double const_per_dim = -0.5 * std::log(rv) + 0.5 * rv - 0.5;
        Var kl_sum;
        for (int k = 0; k < cfg.k_theta; ++k) {
            std::array<Var, 6> theta;
            for (int l = 0; l < 6; ++l) {
                Tensor eps = Tensor::zeros(vw.mu[l].shape());
                rng.normal_fill(eps.data(), eps.size());
                theta[l] = t.add(mu_leaf[l], t.mul(sigma_node[l], t.constant(eps)));
            }
            Var pred = mlp_forward(t, model.shape(), theta, x_const);
            Var sq = t.square(t.sub(o_t_const, pred));
            Var kl_k = t.scale(t.sum(sq), 0.5 * inv_n);
            kl_sum = k == 0 ? kl_k : t.add(kl_sum, kl_k);
        }
        state_kl_node = t.add_scalar(t.scale(kl_sum, 1.0 / cfg.k_theta),
                                     static_cast<double>(d_s) * const_per_dim);

        // parameter divergence KL[q(theta) || N(0, I)], analytic
        for (int l = 0; l < 6; ++l) {
            Var inner = t.add(t.add(var_node[l], t.square(mu_leaf[l])),
                              t.neg(t.log(var_node[l])));
            Var kl_l = t.sum(t.add_scalar(t.scale(inner, 0.5), -0.5));
            param_kl_node = l == 0 ? kl_l : t.add(param_kl_node, kl_l);
        }
    } else {
        MlpParams& pw = model.point();
        std::array<Var, 6> theta;
        for (int l = 0; l < 6; ++l) {
            theta[l] = t.leaf(pw.tensors[l]);
            leaves.push_back(theta[l]);
        }
        Var out = mlp_forward(t, model.shape(), theta, x_const);
        Var mu = t.slice_cols(out, 0, d_s);
        Var var_p = t.add_scalar(t.softplus(t.slice_cols(out, d_s, 2 * d_s)),
                                 model.variance_floor());
        // KL[N(o_t, rv) || N(mu, var_p)] per element
        Var diff_sq = t.square(t.sub(o_t_const, mu));
        Var quad = t.div(t.add_scalar(diff_sq, rv), t.scale(var_p, 2.0));
        Var half_log = t.scale(t.log(var_p), 0.5);
        Var per_elem = t.add(half_log, quad);
        const double const_per_dim = -0.5 * std::log(rv) - 0.5;
        state_kl_node = t.add_scalar(t.scale(t.sum(per_elem), inv_n),
                                     static_cast<double>(d_s) * const_per_dim);
    }

    // reward negative log-likelihood under N(f_alpha(s_t), 1)
    std::array<Var, 6> alpha;
    for (int l = 0; l < 6; ++l) {
        alpha[l] = t.leaf(reward_model.params().tensors[l]);
        leaves.push_back(alpha[l]);
    }
    Var s_t_const = t.constant(s_t);
    Var r_pred = mlp_forward(t, reward_model.shape(), alpha, s_t_const);
    Var r_sq = t.square(t.sub(t.constant(rewards), r_pred));
    Var reward_nll_node = t.add_scalar(t.scale(t.sum(r_sq), 0.5 * inv_n), 0.5 * kLog2Pi);

    Var loss = t.add(state_kl_node, reward_nll_node);
    if (param_kl_node.valid()) loss = t.add(loss, t.scale(param_kl_node, kl_weight));

    FeResult result;
    result.terms.state_kl = t.value(state_kl_node).item();
    result.terms.parameter_kl = param_kl_node.valid() ? t.value(param_kl_node).item() : 0.0;
    result.terms.reward_nll = t.value(reward_nll_node).item();
    result.terms.observation_nll = cfg.include_observation_nll ? obs_nll : 0.0;
    result.terms.kl_weight = kl_weight;
    result.terms.k_theta_samples = model.mode() == ModelMode::bayesian ? cfg.k_theta : 1;
    result.terms.total = result.terms.state_kl + kl_weight * result.terms.parameter_kl +
                         result.terms.reward_nll + result.terms.observation_nll;
    check_runtime(std::isfinite(result.terms.total),
                  "free_energy_batch: non-finite loss");

    if (with_gradients) {
        t.backward(loss);
        result.gradients.reserve(leaves.size());
        for (Var leaf : leaves) result.gradients.push_back(t.grad(leaf));
    }
    return result;
}

}  // namespace aif::genmodel
