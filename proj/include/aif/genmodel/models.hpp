#pragma once

#include <string>
#include <vector>

#include "aif/dist/gaussian.hpp"
#include "aif/genmodel/mlp.hpp"
#include "aif/genmodel/normalizer.hpp"

namespace aif::genmodel {

enum class ModelMode { bayesian, point_estimate };

std::string to_string(ModelMode mode);
ModelMode mode_from_string(const std::string& s);

/// Gaussian posterior per scalar network weight: mean mu and an
/// unconstrained parameter rho with sigma^2 = softplus(rho). The prior is
/// N(0, I) and immutable.
struct VariationalMlp {
    MlpShape shape;
    std::vector<diffcore::Tensor> mu;   // 6 tensors, w1 b1 w2 b2 w3 b3
    std::vector<diffcore::Tensor> rho;  // matching shapes

    static VariationalMlp init(MlpShape shape, double init_variance, Rng& rng);
};

double softplus_value(double x);
double softplus_inverse(double y);

/// One concrete weight assignment drawn from q(theta) (or the point
/// estimate itself).
struct ThetaSample {
    std::vector<diffcore::Tensor> weights;  // 6 tensors
};

/// Transition network f_theta over (state, action) in normalized units.
/// bayesian mode: variational weights, predicted mean, fixed unit variance.
/// point-estimate mode: plain weights, mean and variance heads (softplus,
/// floored).
class TransitionModel {
public:
    static TransitionModel bayesian(std::size_t d_s, std::size_t d_a,
                                    std::size_t hidden, double init_variance, Rng& rng);
    static TransitionModel point_estimate(std::size_t d_s, std::size_t d_a,
                                          std::size_t hidden, Rng& rng);

    ModelMode mode() const { return mode_; }
    std::size_t d_s() const { return d_s_; }
    std::size_t d_a() const { return d_a_; }
    const MlpShape& shape() const { return shape_; }
    double variance_floor() const { return variance_floor_; }

    VariationalMlp& variational() { return vw_; }
    const VariationalMlp& variational() const { return vw_; }
    MlpParams& point() { return pw_; }
    const MlpParams& point() const { return pw_; }

    /// Trainable tensors in checkpoint order with names.
    std::vector<diffcore::Tensor*> parameters();
    std::vector<std::string> parameter_names() const;

    ThetaSample sample_theta(Rng& rng) const;
    ThetaSample mean_theta() const;  // posterior mean (or the point estimate)

private:
    ModelMode mode_ = ModelMode::bayesian;
    std::size_t d_s_ = 0, d_a_ = 0;
    MlpShape shape_;
    VariationalMlp vw_;
    MlpParams pw_;
    double variance_floor_ = 1e-6;
};

/// Scalar reward head f_alpha over states; unit observation variance.
/// Point parameters in both modes.
class RewardModel {
public:
    RewardModel() = default;
    RewardModel(std::size_t d_s, std::size_t hidden, Rng& rng);

    const MlpShape& shape() const { return params_.shape; }
    MlpParams& params() { return params_; }
    const MlpParams& params() const { return params_; }
    std::vector<diffcore::Tensor*> parameters();
    std::vector<std::string> parameter_names() const;

private:
    MlpParams params_;
};

/// p(s_t | s_{t-1}, a_{t-1}, theta) in raw (de-normalized) units.
dist::DiagonalGaussian predict_next_state(const TransitionModel& model,
                                          const std::vector<double>& state,
                                          const std::vector<double>& action,
                                          const ThetaSample& theta,
                                          const Normalizer& norm);

/// Mean of sigma^2_xi across all weights; bayesian mode only.
double parameter_uncertainty(const TransitionModel& model);

}  // namespace aif::genmodel
