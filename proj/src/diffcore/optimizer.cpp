#include "aif/diffcore/optimizer.hpp"

#include <cmath>

namespace aif::diffcore {

void AdamState::step(const std::vector<Tensor*>& params,
                     const std::vector<const Tensor*>& grads) {
    check_arg(params.size() == grads.size(), "AdamState::step: list size mismatch");
    if (m_.empty()) {
        for (const Tensor* p : params) {
            m_.push_back(Tensor::zeros(p->shape()));
            v_.push_back(Tensor::zeros(p->shape()));
        }
    }
    check_arg(m_.size() == params.size(), "AdamState::step: parameter count changed");

    step_ += 1;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        check_arg(p.same_shape(g) && p.same_shape(m_[i]),
                  "AdamState::step: shape mismatch");
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            double mhat = m[j] / bc1;
            double vhat = v[j] / bc2;
            p[j] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

void AdamState::restore(std::int64_t step, std::vector<Tensor> m, std::vector<Tensor> v) {
    check_arg(m.size() == v.size(), "AdamState::restore: moment list mismatch");
    step_ = step;
    m_ = std::move(m);
    v_ = std::move(v);
}

}  // namespace aif::diffcore
