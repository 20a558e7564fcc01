#include "aif/genmodel/mlp.hpp"

#include <cmath>

namespace aif::genmodel {

const std::array<const char*, 6>& MlpShape::param_names() {
    static const std::array<const char*, 6> names = {"w1", "b1", "w2", "b2", "w3", "b3"};
    return names;
}

void fan_in_init(diffcore::Tensor& w, std::size_t fan_in, Rng& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
}

MlpParams MlpParams::init(MlpShape shape, Rng& rng) {
    MlpParams p;
    p.shape = shape;
    auto shapes = shape.param_shapes();
    for (int i = 0; i < 6; ++i) p.tensors.push_back(diffcore::Tensor::zeros(shapes[i]));
    fan_in_init(p.tensors[0], shape.in, rng);
    fan_in_init(p.tensors[2], shape.hidden, rng);
    fan_in_init(p.tensors[4], shape.hidden, rng);
    return p;
}

MlpParams MlpParams::zeros(MlpShape shape) {
    MlpParams p;
    p.shape = shape;
    for (const auto& s : shape.param_shapes()) p.tensors.push_back(diffcore::Tensor::zeros(s));
    return p;
}

diffcore::Var mlp_forward(diffcore::Tape& t, const MlpShape&,
                          const std::array<diffcore::Var, 6>& p, diffcore::Var input) {
    auto h1 = t.relu(t.add(t.matmul(input, p[0]), p[1]));
    auto h2 = t.relu(t.add(t.matmul(h1, p[2]), p[3]));
    return t.add(t.matmul(h2, p[4]), p[5]);
}

void mlp_forward_numeric(const MlpShape& shape, const double* const weights[6],
                         std::size_t rows, const double* x, double* out,
                         double* scratch) {
    const std::size_t in = shape.in, h = shape.hidden, o = shape.out;
    double* h1 = scratch;
    double* h2 = scratch + rows * h;

    const double* w1 = weights[0];
    const double* b1 = weights[1];
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * in;
        double* hr = h1 + r * h;
        for (std::size_t j = 0; j < h; ++j) hr[j] = b1[j];
        for (std::size_t k = 0; k < in; ++k) {
            double xv = xr[k];
            const double* w = w1 + k * h;
            for (std::size_t j = 0; j < h; ++j) hr[j] += xv * w[j];
        }
        for (std::size_t j = 0; j < h; ++j)
            if (hr[j] < 0.0) hr[j] = 0.0;
    }

    const double* w2 = weights[2];
    const double* b2 = weights[3];
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = h1 + r * h;
        double* hr = h2 + r * h;
        for (std::size_t j = 0; j < h; ++j) hr[j] = b2[j];
        for (std::size_t k = 0; k < h; ++k) {
            double xv = xr[k];
            const double* w = w2 + k * h;
            for (std::size_t j = 0; j < h; ++j) hr[j] += xv * w[j];
        }
        for (std::size_t j = 0; j < h; ++j)
            if (hr[j] < 0.0) hr[j] = 0.0;
    }

    const double* w3 = weights[4];
    const double* b3 = weights[5];
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = h2 + r * h;
        double* yr = out + r * o;
        for (std::size_t j = 0; j < o; ++j) yr[j] = b3[j];
        for (std::size_t k = 0; k < h; ++k) {
            double xv = xr[k];
            const double* w = w3 + k * o;
            for (std::size_t j = 0; j < o; ++j) yr[j] += xv * w[j];
        }
    }
}

}  // namespace aif::genmodel
