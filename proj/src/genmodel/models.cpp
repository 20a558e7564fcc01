#include "aif/genmodel/models.hpp"

#include <cmath>

#include "aif/common/check.hpp"

namespace aif::genmodel {

std::string to_string(ModelMode mode) {
    return mode == ModelMode::bayesian ? "bayesian" : "point_estimate";
}

ModelMode mode_from_string(const std::string& s) {
    if (s == "bayesian") return ModelMode::bayesian;
    if (s == "point_estimate") return ModelMode::point_estimate;
    fail_contract("unknown model mode '" + s + "'");
}

double softplus_value(double x) {
    return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double softplus_inverse(double y) {
    check_arg(y > 0.0, "softplus_inverse: argument must be positive");
    // ln(e^y - 1), stable for small y
    return y + std::log(-std::expm1(-y));
}

VariationalMlp VariationalMlp::init(MlpShape shape, double init_variance, Rng& rng) {
    VariationalMlp v;
    v.shape = shape;
    auto shapes = shape.param_shapes();
    double rho0 = softplus_inverse(init_variance);
    for (int i = 0; i < 6; ++i) {
        v.mu.push_back(diffcore::Tensor::zeros(shapes[i]));
        v.rho.push_back(diffcore::Tensor::full(shapes[i], rho0));
    }
    fan_in_init(v.mu[0], shape.in, rng);
    fan_in_init(v.mu[2], shape.hidden, rng);
    fan_in_init(v.mu[4], shape.hidden, rng);
    return v;
}

TransitionModel TransitionModel::bayesian(std::size_t d_s, std::size_t d_a,
                                          std::size_t hidden, double init_variance,
                                          Rng& rng) {
    TransitionModel m;
    m.mode_ = ModelMode::bayesian;
    m.d_s_ = d_s;
    m.d_a_ = d_a;
    m.shape_ = MlpShape{d_s + d_a, hidden, d_s};
    m.vw_ = VariationalMlp::init(m.shape_, init_variance, rng);
    return m;
}

TransitionModel TransitionModel::point_estimate(std::size_t d_s, std::size_t d_a,
                                                std::size_t hidden, Rng& rng) {
    TransitionModel m;
    m.mode_ = ModelMode::point_estimate;
    m.d_s_ = d_s;
    m.d_a_ = d_a;
    m.shape_ = MlpShape{d_s + d_a, hidden, 2 * d_s};  // mean and variance heads
    m.pw_ = MlpParams::init(m.shape_, rng);
    return m;
}

std::vector<diffcore::Tensor*> TransitionModel::parameters() {
    std::vector<diffcore::Tensor*> out;
    if (mode_ == ModelMode::bayesian) {
        for (auto& t : vw_.mu) out.push_back(&t);
        for (auto& t : vw_.rho) out.push_back(&t);
    } else {
        for (auto& t : pw_.tensors) out.push_back(&t);
    }
    return out;
}

std::vector<std::string> TransitionModel::parameter_names() const {
    std::vector<std::string> out;
    const auto& base = MlpShape::param_names();
    if (mode_ == ModelMode::bayesian) {
        for (const char* n : base) out.push_back(std::string("transition.mu.") + n);
        for (const char* n : base) out.push_back(std::string("transition.rho.") + n);
    } else {
        for (const char* n : base) out.push_back(std::string("transition.") + n);
    }
    return out;
}

ThetaSample TransitionModel::sample_theta(Rng& rng) const {
    ThetaSample s;
    if (mode_ == ModelMode::point_estimate) {
        s.weights = pw_.tensors;
        return s;
    }
    for (int l = 0; l < 6; ++l) {
        diffcore::Tensor w = vw_.mu[l];
        const diffcore::Tensor& rho = vw_.rho[l];
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] += std::sqrt(softplus_value(rho[i])) * rng.normal();
        s.weights.push_back(std::move(w));
    }
    return s;
}

ThetaSample TransitionModel::mean_theta() const {
    ThetaSample s;
    s.weights = mode_ == ModelMode::bayesian ? vw_.mu : pw_.tensors;
    return s;
}

RewardModel::RewardModel(std::size_t d_s, std::size_t hidden, Rng& rng) {
    params_ = MlpParams::init(MlpShape{d_s, hidden, 1}, rng);
}

std::vector<diffcore::Tensor*> RewardModel::parameters() {
    std::vector<diffcore::Tensor*> out;
    for (auto& t : params_.tensors) out.push_back(&t);
    return out;
}

std::vector<std::string> RewardModel::parameter_names() const {
    std::vector<std::string> out;
    for (const char* n : MlpShape::param_names())
        out.push_back(std::string("reward.") + n);
    return out;
}

dist::DiagonalGaussian predict_next_state(const TransitionModel& model,
                                          const std::vector<double>& state,
                                          const std::vector<double>& action,
                                          const ThetaSample& theta,
                                          const Normalizer& norm) {
    const std::size_t d_s = model.d_s(), d_a = model.d_a();
    check_arg(state.size() == d_s && action.size() == d_a,
              "predict_next_state: dimension mismatch");
    check_arg(theta.weights.size() == 6, "predict_next_state: bad theta sample");

    std::vector<double> x(d_s + d_a);
    norm.normalize_state(state.data(), x.data());
    norm.normalize_action(action.data(), x.data() + d_s);

    const MlpShape& shape = model.shape();
    std::vector<double> out(shape.out);
    std::vector<double> scratch(2 * shape.hidden);
    const double* w[6];
    for (int i = 0; i < 6; ++i) w[i] = theta.weights[i].data();
    mlp_forward_numeric(shape, w, 1, x.data(), out.data(), scratch.data());

    std::vector<double> mean(d_s), variance(d_s);
    for (std::size_t i = 0; i < d_s; ++i) {
        double m_norm = out[i];
        double v_norm = model.mode() == ModelMode::bayesian
                            ? 1.0
                            : softplus_value(out[d_s + i]) + model.variance_floor();
        mean[i] = m_norm * norm.state_std[i] + norm.state_mean[i];
        variance[i] = v_norm * norm.state_std[i] * norm.state_std[i];
        check_runtime(std::isfinite(mean[i]) && std::isfinite(variance[i]),
                      "predict_next_state: non-finite output");
    }
    return dist::DiagonalGaussian(std::move(mean), std::move(variance));
}

double parameter_uncertainty(const TransitionModel& model) {
    check_arg(model.mode() == ModelMode::bayesian,
              "parameter_uncertainty: bayesian mode only");
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& rho : model.variational().rho) {
        for (std::size_t i = 0; i < rho.size(); ++i) sum += softplus_value(rho[i]);
        count += rho.size();
    }
    return sum / static_cast<double>(count);
}

}  // namespace aif::genmodel
