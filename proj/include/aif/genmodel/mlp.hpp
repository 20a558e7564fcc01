#pragma once

#include <array>
#include <string>
#include <vector>

#include "aif/common/rng.hpp"
#include "aif/diffcore/tape.hpp"

namespace aif::genmodel {

/// Two fully connected hidden layers with ReLU activations.
struct MlpShape {
    std::size_t in = 0;
    std::size_t hidden = 0;
    std::size_t out = 0;

    // parameter shapes in fixed order: w1 b1 w2 b2 w3 b3
    std::array<std::vector<std::size_t>, 6> param_shapes() const {
        return {{{in, hidden}, {hidden}, {hidden, hidden}, {hidden}, {hidden, out}, {out}}};
    }
    static const std::array<const char*, 6>& param_names();
    std::size_t weight_count() const {
        return in * hidden + hidden + hidden * hidden + hidden + hidden * out + out;
    }
};

/// Plain (point-estimate) parameters.
struct MlpParams {
    MlpShape shape;
    std::vector<diffcore::Tensor> tensors;  // 6, ordered as param_shapes

    static MlpParams init(MlpShape shape, Rng& rng);
    static MlpParams zeros(MlpShape shape);
};

/// Forward through a tape given parameter nodes; input is [n, in].
diffcore::Var mlp_forward(diffcore::Tape& t, const MlpShape& shape,
                          const std::array<diffcore::Var, 6>& params,
                          diffcore::Var input);

/// Fast inference path over raw buffers: x is [rows, in] row-major, out is
/// [rows, out]. scratch must hold 2 * rows * hidden doubles.
void mlp_forward_numeric(const MlpShape& shape, const double* const weights[6],
                         std::size_t rows, const double* x, double* out,
                         double* scratch);

/// Fan-in-scaled uniform weight init, zero biases.
void fan_in_init(diffcore::Tensor& w, std::size_t fan_in, Rng& rng);

}  // namespace aif::genmodel
