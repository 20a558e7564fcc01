#include "aif/genmodel/trainer.hpp"

#include <sstream>

#include "aif/common/check.hpp"
#include "aif/diffcore/checkpoint.hpp"

namespace aif::genmodel {

namespace {

TransitionModel make_transition(std::size_t d_s, std::size_t d_a,
                                const TrainerConfig& cfg, Rng& rng) {
    if (cfg.mode == ModelMode::bayesian)
        return TransitionModel::bayesian(d_s, d_a, cfg.hidden,
                                         cfg.init_weight_variance, rng);
    return TransitionModel::point_estimate(d_s, d_a, cfg.hidden, rng);
}

std::string double_string(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string join_doubles(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        os << v[i];
    }
    return os.str();
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

}  // namespace

Trainer::Trainer(std::size_t d_s, std::size_t d_a, const TrainerConfig& cfg,
                 Rng& init_rng)
    : cfg_(cfg),
      d_s_(d_s),
      d_a_(d_a),
      transition_(make_transition(d_s, d_a, cfg, init_rng)),
      reward_(d_s, cfg.reward_hidden, init_rng),
      norm_(Normalizer::identity(d_s, d_a)),
      opt_(cfg.adam) {}

std::vector<diffcore::Tensor*> Trainer::all_parameters() {
    auto params = transition_.parameters();
    for (auto* p : reward_.parameters()) params.push_back(p);
    return params;
}

FreeEnergyTerms Trainer::train_batch(
    const std::vector<const agentloop::Transition*>& batch, std::size_t dataset_size,
    Rng& rng) {
    FeConfig fe;
    fe.k_theta = cfg_.k_theta;
    fe.kl_weight = cfg_.kl_weight;
    fe.dataset_size = dataset_size;
    fe.recognition_variance = cfg_.resolved_recognition_variance();
    fe.include_observation_nll = cfg_.include_observation_nll;

    FeResult res = free_energy_batch(transition_, reward_, batch, norm_, fe, rng, true);

    auto params = all_parameters();
    std::vector<const diffcore::Tensor*> grads;
    grads.reserve(res.gradients.size());
    for (const auto& g : res.gradients) grads.push_back(&g);
    opt_.step(params, grads);
    return res.terms;
}

FreeEnergyTerms Trainer::evaluate_batch(
    const std::vector<const agentloop::Transition*>& batch, std::size_t dataset_size,
    Rng& rng) {
    FeConfig fe;
    fe.k_theta = cfg_.k_theta;
    fe.kl_weight = cfg_.kl_weight;
    fe.dataset_size = dataset_size;
    fe.recognition_variance = cfg_.resolved_recognition_variance();
    fe.include_observation_nll = cfg_.include_observation_nll;
    return free_energy_batch(transition_, reward_, batch, norm_, fe, rng, false).terms;
}

std::vector<FreeEnergyTerms> Trainer::train_epoch(const agentloop::ReplayBuffer& buffer,
                                                  Rng& rng) {
    check_arg(buffer.size() >= 1, "train_epoch: empty buffer");
    norm_ = buffer.normalizer();

    std::vector<FreeEnergyTerms> stats;
    stats.reserve(cfg_.batches_per_epoch);
    std::vector<const agentloop::Transition*> batch(cfg_.batch_size);
    for (std::size_t b = 0; b < cfg_.batches_per_epoch; ++b) {
        for (auto& slot : batch) slot = &buffer[rng.below(buffer.size())];
        stats.push_back(train_batch(batch, buffer.size(), rng));
    }
    return stats;
}

void Trainer::save(const std::string& path) const {
    diffcore::Checkpoint ckpt;
    ckpt.metadata["format"] = "aif.model/1";
    ckpt.metadata["mode"] = to_string(cfg_.mode);
    ckpt.metadata["d_s"] = std::to_string(d_s_);
    ckpt.metadata["d_a"] = std::to_string(d_a_);
    ckpt.metadata["hidden"] = std::to_string(cfg_.hidden);
    ckpt.metadata["reward_hidden"] = std::to_string(cfg_.reward_hidden);
    ckpt.metadata["k_theta"] = std::to_string(cfg_.k_theta);
    ckpt.metadata["recognition_variance"] =
        double_string(cfg_.resolved_recognition_variance());
    ckpt.metadata["norm.state_mean"] = join_doubles(norm_.state_mean);
    ckpt.metadata["norm.state_std"] = join_doubles(norm_.state_std);
    ckpt.metadata["norm.action_mean"] = join_doubles(norm_.action_mean);
    ckpt.metadata["norm.action_std"] = join_doubles(norm_.action_std);
    ckpt.metadata["norm.reward_mean"] = double_string(norm_.reward_mean);
    ckpt.metadata["norm.reward_std"] = double_string(norm_.reward_std);

    auto* self = const_cast<Trainer*>(this);
    auto params = self->all_parameters();
    auto names = transition_.parameter_names();
    for (const auto& n : reward_.parameter_names()) names.push_back(n);
    for (std::size_t i = 0; i < params.size(); ++i) ckpt.add(names[i], *params[i]);

    ckpt.has_optimizer = true;
    ckpt.optimizer_step = opt_.step_count();
    ckpt.optimizer_config = opt_.config();
    ckpt.optimizer_m = opt_.first_moments();
    ckpt.optimizer_v = opt_.second_moments();
    diffcore::save_checkpoint(path, ckpt);
}

Trainer Trainer::load(const std::string& path) {
    diffcore::Checkpoint ckpt = diffcore::load_checkpoint(path);
    check_runtime(ckpt.metadata.count("format") &&
                      ckpt.metadata.at("format") == "aif.model/1",
                  "Trainer::load: not a model checkpoint");

    TrainerConfig cfg;
    cfg.mode = mode_from_string(ckpt.metadata.at("mode"));
    cfg.hidden = std::stoul(ckpt.metadata.at("hidden"));
    cfg.reward_hidden = std::stoul(ckpt.metadata.at("reward_hidden"));
    cfg.k_theta = std::stoi(ckpt.metadata.at("k_theta"));
    cfg.recognition_variance = std::stod(ckpt.metadata.at("recognition_variance"));
    cfg.adam = ckpt.optimizer_config;

    std::size_t d_s = std::stoul(ckpt.metadata.at("d_s"));
    std::size_t d_a = std::stoul(ckpt.metadata.at("d_a"));

    Rng dummy(0);
    Trainer tr(d_s, d_a, cfg, dummy);
    auto params = tr.all_parameters();
    auto names = tr.transition_.parameter_names();
    for (const auto& n : tr.reward_.parameter_names()) names.push_back(n);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const diffcore::Tensor& loaded = ckpt.find(names[i]);
        check_runtime(loaded.same_shape(*params[i]),
                      "Trainer::load: shape mismatch for " + names[i]);
        *params[i] = loaded;
    }
    if (ckpt.has_optimizer)
        tr.opt_.restore(ckpt.optimizer_step, ckpt.optimizer_m, ckpt.optimizer_v);

    tr.norm_.state_mean = split_doubles(ckpt.metadata.at("norm.state_mean"));
    tr.norm_.state_std = split_doubles(ckpt.metadata.at("norm.state_std"));
    tr.norm_.action_mean = split_doubles(ckpt.metadata.at("norm.action_mean"));
    tr.norm_.action_std = split_doubles(ckpt.metadata.at("norm.action_std"));
    tr.norm_.reward_mean = std::stod(ckpt.metadata.at("norm.reward_mean"));
    tr.norm_.reward_std = std::stod(ckpt.metadata.at("norm.reward_std"));
    return tr;
}

}  // namespace aif::genmodel
