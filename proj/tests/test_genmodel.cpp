#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>

#include "aif/genmodel/free_energy.hpp"
#include "aif/genmodel/snapshot.hpp"
#include "aif/genmodel/trainer.hpp"
#include "support/fixtures.hpp"

using namespace aif;
using namespace aif::genmodel;
using agentloop::ReplayBuffer;
using agentloop::Transition;
using testsupport::LinearSystem;

namespace {

std::vector<const Transition*> whole_buffer(const ReplayBuffer& buf) {
    std::vector<const Transition*> out;
    for (std::size_t i = 0; i < buf.size(); ++i) out.push_back(&buf[i]);
    return out;
}

std::vector<const Transition*> batch_of(const ReplayBuffer& buf, std::size_t n) {
    std::vector<const Transition*> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(&buf[i % buf.size()]);
    return out;
}

double optimized_loss(const FreeEnergyTerms& t) {
    return t.state_kl + t.kl_weight * t.parameter_kl + t.reward_nll;
}

// finite differences of the optimized loss w.r.t. every trainable scalar,
// with frozen noise via rng reseeding
double fe_gradcheck(Trainer& trainer, const std::vector<const Transition*>& batch,
                    std::uint64_t noise_seed, double h = 1e-6) {
    FeConfig fe;
    fe.k_theta = trainer.config().k_theta;
    fe.dataset_size = 100;
    fe.recognition_variance = trainer.config().resolved_recognition_variance();

    Rng rng(noise_seed);
    FeResult res = free_energy_batch(trainer.transition(), trainer.reward(), batch,
                                     trainer.normalizer(), fe, rng, true);

    auto params = trainer.transition().parameters();
    for (auto* p : trainer.reward().parameters()) params.push_back(p);
    REQUIRE(params.size() == res.gradients.size());

    double worst = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        for (std::size_t i = 0; i < params[pi]->size(); ++i) {
            double saved = (*params[pi])[i];
            (*params[pi])[i] = saved + h;
            Rng rp(noise_seed);
            double lp = optimized_loss(free_energy_batch(trainer.transition(),
                                                         trainer.reward(), batch,
                                                         trainer.normalizer(), fe, rp,
                                                         false)
                                           .terms);
            (*params[pi])[i] = saved - h;
            Rng rm(noise_seed);
            double lm = optimized_loss(free_energy_batch(trainer.transition(),
                                                         trainer.reward(), batch,
                                                         trainer.normalizer(), fe, rm,
                                                         false)
                                           .terms);
            (*params[pi])[i] = saved;
            double fd = (lp - lm) / (2.0 * h);
            double analytic = res.gradients[pi][i];
            double denom = std::max({std::abs(analytic), std::abs(fd), 1e-6});
            worst = std::max(worst, std::abs(analytic - fd) / denom);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("free energy gradients match finite differences (bayesian, width 8)") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 8;
    cfg.reward_hidden = 8;
    cfg.k_theta = 2;
    Rng init(3);
    Trainer trainer(2, 1, cfg, init);

    ReplayBuffer buf(2, 1);
    Rng data_rng(4);
    testsupport::fill_linear_buffer(buf, LinearSystem{}, 1, 6, data_rng);
    double err = fe_gradcheck(trainer, batch_of(buf, 4), 17);
    CHECK(err <= 1e-4);
}

TEST_CASE("free energy gradients match finite differences (point-estimate, width 8)") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::point_estimate;
    cfg.hidden = 8;
    cfg.reward_hidden = 8;
    Rng init(5);
    Trainer trainer(2, 1, cfg, init);

    ReplayBuffer buf(2, 1);
    Rng data_rng(6);
    testsupport::fill_linear_buffer(buf, LinearSystem{}, 1, 6, data_rng);
    double err = fe_gradcheck(trainer, batch_of(buf, 4), 23);
    CHECK(err <= 1e-4);
}

TEST_CASE("state divergence vanishes when the prediction matches the recognition") {
    // point-estimate model with zero weights: mean head outputs 0, variance
    // head bias tuned so the predicted variance equals the recognition
    // variance; data sitting at the normalized origin
    TrainerConfig cfg;
    cfg.mode = ModelMode::point_estimate;
    cfg.hidden = 4;
    cfg.reward_hidden = 4;
    Rng init(1);
    Trainer trainer(2, 1, cfg, init);

    auto& pw = trainer.transition().point();
    for (auto& t : pw.tensors)
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.0;
    const double rv = cfg.resolved_recognition_variance();
    double bias = softplus_inverse(rv - trainer.transition().variance_floor());
    pw.tensors[5][2] = bias;  // variance-head biases
    pw.tensors[5][3] = bias;

    ReplayBuffer buf(2, 1);
    buf.begin_episode();
    buf.add({0.0, 0.0}, {0.0}, {0.0, 0.0}, 0.0, false);

    FeConfig fe;
    fe.dataset_size = 1;
    fe.recognition_variance = rv;
    Rng rng(9);
    auto res = free_energy_batch(trainer.transition(), trainer.reward(),
                                 whole_buffer(buf), Normalizer::identity(2, 1), fe,
                                 rng, false);
    CHECK(std::abs(res.terms.state_kl) < 1e-10);
}

TEST_CASE("parameter divergence vanishes when the posterior equals the prior") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 4;
    cfg.reward_hidden = 4;
    Rng init(2);
    Trainer trainer(2, 1, cfg, init);

    auto& vw = trainer.transition().variational();
    double rho1 = softplus_inverse(1.0);
    for (int l = 0; l < 6; ++l) {
        for (std::size_t i = 0; i < vw.mu[l].size(); ++i) vw.mu[l][i] = 0.0;
        for (std::size_t i = 0; i < vw.rho[l].size(); ++i) vw.rho[l][i] = rho1;
    }
    CHECK(parameter_uncertainty(trainer.transition()) == doctest::Approx(1.0));

    ReplayBuffer buf(2, 1);
    buf.begin_episode();
    buf.add({0.1, 0.2}, {0.3}, {0.2, 0.1}, -0.1, false);

    FeConfig fe;
    fe.dataset_size = 1;
    fe.recognition_variance = 1.0;
    Rng rng(11);
    auto res = free_energy_batch(trainer.transition(), trainer.reward(),
                                 whole_buffer(buf), Normalizer::identity(2, 1), fe,
                                 rng, false);
    CHECK(std::abs(res.terms.parameter_kl) < 1e-12);
}

TEST_CASE("hand-built 1-D state divergence: q = N(0.5, 1), prediction N(0, 1)") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 4;
    cfg.reward_hidden = 4;
    cfg.recognition_variance = 1.0;
    Rng init(3);
    Trainer trainer(1, 1, cfg, init);

    auto& vw = trainer.transition().variational();
    double rho_tiny = softplus_inverse(1e-20);
    for (int l = 0; l < 6; ++l) {
        for (std::size_t i = 0; i < vw.mu[l].size(); ++i) vw.mu[l][i] = 0.0;
        for (std::size_t i = 0; i < vw.rho[l].size(); ++i) vw.rho[l][i] = rho_tiny;
    }

    ReplayBuffer buf(1, 1);
    buf.begin_episode();
    buf.add({0.0}, {0.0}, {0.5}, 0.0, false);

    FeConfig fe;
    fe.dataset_size = 1;
    fe.recognition_variance = 1.0;
    Rng rng(13);
    auto res = free_energy_batch(trainer.transition(), trainer.reward(),
                                 whole_buffer(buf), Normalizer::identity(1, 1), fe,
                                 rng, false);
    CHECK(res.terms.state_kl == doctest::Approx(0.125).epsilon(1e-7));
}

TEST_CASE("kl terms are non-negative on random batches") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 8;
    cfg.reward_hidden = 8;
    Rng init(7);
    Trainer trainer(2, 1, cfg, init);

    ReplayBuffer buf(2, 1);
    Rng data_rng(8);
    testsupport::fill_linear_buffer(buf, LinearSystem{}, 2, 20, data_rng);
    Rng rng(19);
    for (int i = 0; i < 10; ++i) {
        auto res = trainer.evaluate_batch(batch_of(buf, 8), buf.size(), rng);
        CHECK(res.state_kl >= 0.0);
        CHECK(res.parameter_kl >= 0.0);
    }
}

TEST_CASE("training reduces free energy on the linear system") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 16;
    cfg.reward_hidden = 8;
    cfg.batches_per_epoch = 200;
    cfg.batch_size = 32;
    Rng init(21);
    Trainer trainer(2, 1, cfg, init);

    ReplayBuffer buf(2, 1);
    Rng data_rng(22);
    testsupport::fill_linear_buffer(buf, LinearSystem{}, 10, 40, data_rng);

    Rng rng(23);
    auto stats = trainer.train_epoch(buf, rng);
    double first = 0, last = 0;
    for (int i = 0; i < 10; ++i) {
        first += stats[static_cast<std::size_t>(i)].total / 10.0;
        last += stats[stats.size() - 10 + static_cast<std::size_t>(i)].total / 10.0;
    }
    CHECK(last < first);
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 8;
    cfg.reward_hidden = 8;
    cfg.batches_per_epoch = 5;
    cfg.batch_size = 8;
    cfg.adam.learning_rate = 0.0;
    Rng init(31);
    Trainer trainer(2, 1, cfg, init);

    ReplayBuffer buf(2, 1);
    Rng data_rng(32);
    testsupport::fill_linear_buffer(buf, LinearSystem{}, 1, 20, data_rng);

    auto params = trainer.transition().parameters();
    std::vector<diffcore::Tensor> before;
    for (auto* p : params) before.push_back(*p);

    Rng rng(33);
    trainer.train_epoch(buf, rng);
    for (std::size_t i = 0; i < params.size(); ++i)
        CHECK(std::memcmp(params[i]->data(), before[i].data(),
                          before[i].size() * sizeof(double)) == 0);
}

TEST_CASE("batch size larger than buffer is valid (sampling with replacement)") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::point_estimate;
    cfg.hidden = 8;
    cfg.reward_hidden = 8;
    cfg.batches_per_epoch = 2;
    cfg.batch_size = 50;
    Rng init(41);
    Trainer trainer(2, 1, cfg, init);

    ReplayBuffer buf(2, 1);
    Rng data_rng(42);
    testsupport::fill_linear_buffer(buf, LinearSystem{}, 1, 3, data_rng);  // 3 rows

    Rng rng(43);
    auto stats = trainer.train_epoch(buf, rng);
    CHECK(stats.size() == 2);
    CHECK(std::isfinite(stats[0].total));
}

TEST_CASE("empty buffer rejected") {
    TrainerConfig cfg;
    cfg.hidden = 4;
    cfg.reward_hidden = 4;
    Rng init(1);
    Trainer trainer(2, 1, cfg, init);
    ReplayBuffer buf(2, 1);
    Rng rng(2);
    CHECK_THROWS_AS(trainer.train_epoch(buf, rng), std::invalid_argument);
}

TEST_CASE("parameter_uncertainty at initialization and in point mode") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 8;
    cfg.reward_hidden = 4;
    cfg.init_weight_variance = 0.05;
    Rng init(51);
    Trainer trainer(2, 1, cfg, init);
    CHECK(parameter_uncertainty(trainer.transition()) == doctest::Approx(0.05).epsilon(1e-9));

    TrainerConfig pcfg = cfg;
    pcfg.mode = ModelMode::point_estimate;
    Rng init2(52);
    Trainer point(2, 1, pcfg, init2);
    CHECK_THROWS_AS((void)parameter_uncertainty(point.transition()),
                    std::invalid_argument);
}

TEST_CASE("predict_next_state: zero weights give N(bias, unit variance)") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 4;
    cfg.reward_hidden = 4;
    Rng init(61);
    Trainer trainer(2, 1, cfg, init);
    auto& vw = trainer.transition().variational();
    double rho_tiny = softplus_inverse(1e-20);
    for (int l = 0; l < 6; ++l) {
        for (std::size_t i = 0; i < vw.mu[l].size(); ++i) vw.mu[l][i] = 0.0;
        for (std::size_t i = 0; i < vw.rho[l].size(); ++i) vw.rho[l][i] = rho_tiny;
    }
    vw.mu[5][0] = 0.7;  // output bias
    vw.mu[5][1] = -0.4;

    auto theta = trainer.transition().mean_theta();
    auto g = predict_next_state(trainer.transition(), {0.3, -0.8}, {0.5}, theta,
                                Normalizer::identity(2, 1));
    CHECK(g.mean[0] == doctest::Approx(0.7));
    CHECK(g.mean[1] == doctest::Approx(-0.4));
    CHECK(g.variance[0] == doctest::Approx(1.0));
    CHECK(g.variance[1] == doctest::Approx(1.0));
}

TEST_CASE("predict_next_state: distinct theta samples disagree when variance > 0") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 8;
    cfg.reward_hidden = 4;
    cfg.init_weight_variance = 0.05;
    Rng init(71);
    Trainer trainer(2, 1, cfg, init);

    Rng rng(72);
    auto t1 = trainer.transition().sample_theta(rng);
    auto t2 = trainer.transition().sample_theta(rng);
    auto norm = Normalizer::identity(2, 1);
    auto g1 = predict_next_state(trainer.transition(), {0.3, -0.8}, {0.5}, t1, norm);
    auto g2 = predict_next_state(trainer.transition(), {0.3, -0.8}, {0.5}, t2, norm);
    CHECK(std::abs(g1.mean[0] - g2.mean[0]) > 1e-12);
}

TEST_CASE("one-step prediction error is small after training on the linear system") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 16;
    cfg.reward_hidden = 8;
    cfg.batches_per_epoch = 100;
    cfg.batch_size = 50;
    // input samples carry the recognition variance; keep it small so the
    // learned map is not shrunk toward the smoothed dynamics, and start
    // from a tight posterior so the mean learns quickly
    cfg.recognition_variance = 0.01;
    cfg.init_weight_variance = 1e-3;
    Rng init(81);
    Trainer trainer(2, 1, cfg, init);

    LinearSystem sys;
    ReplayBuffer buf(2, 1);
    Rng data_rng(82);
    testsupport::fill_linear_buffer(buf, sys, 20, 40, data_rng);

    Rng rng(83);
    for (int epoch = 0; epoch < 20; ++epoch) trainer.train_epoch(buf, rng);

    // normalized-units MSE of the posterior-mean prediction on held-out
    // episodes drawn from the same process
    auto theta = trainer.transition().mean_theta();
    const auto& norm = trainer.normalizer();
    Rng eval_rng(84);
    double mse = 0.0;
    int count = 0;
    for (int ep = 0; ep < 5; ++ep) {
        std::vector<double> s{eval_rng.normal(), eval_rng.normal()};
        for (int t = 0; t < 40; ++t) {
            double a = eval_rng.uniform(-1.0, 1.0);
            auto s_true = sys.step(s, a, eval_rng);
            auto pred = predict_next_state(trainer.transition(), s, {a}, theta, norm);
            for (int k = 0; k < 2; ++k) {
                double e = (pred.mean[k] - s_true[k]) / norm.state_std[k];
                mse += e * e;
                ++count;
            }
            s = s_true;
        }
    }
    mse /= count;
    CHECK(mse < 1e-2);
}

TEST_CASE("mode equivalence: collapsed posterior matches unit-variance point model") {
    const std::size_t h = 6;
    TrainerConfig bcfg;
    bcfg.mode = ModelMode::bayesian;
    bcfg.hidden = h;
    bcfg.reward_hidden = 4;
    bcfg.recognition_variance = 1.0;
    bcfg.kl_weight = 0.0;
    Rng binit(91);
    Trainer bayes(2, 1, bcfg, binit);
    auto& vw = bayes.transition().variational();
    double rho_tiny = softplus_inverse(1e-24);
    for (int l = 0; l < 6; ++l)
        for (std::size_t i = 0; i < vw.rho[l].size(); ++i) vw.rho[l][i] = rho_tiny;

    TrainerConfig pcfg = bcfg;
    pcfg.mode = ModelMode::point_estimate;
    Rng pinit(92);
    Trainer point(2, 1, pcfg, pinit);
    auto& pw = point.transition().point();
    // copy mean weights; zero the variance head, bias tuned to unit variance
    pw.tensors[0] = vw.mu[0];
    pw.tensors[1] = vw.mu[1];
    pw.tensors[2] = vw.mu[2];
    pw.tensors[3] = vw.mu[3];
    for (std::size_t i = 0; i < pw.tensors[4].size(); ++i) pw.tensors[4][i] = 0.0;
    for (std::size_t i = 0; i < pw.tensors[5].size(); ++i) pw.tensors[5][i] = 0.0;
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < 2; ++c)
            pw.tensors[4].at(r, c) = vw.mu[4].at(r, c);
    for (std::size_t c = 0; c < 2; ++c) pw.tensors[5][c] = vw.mu[5][c];
    double unit_bias =
        softplus_inverse(1.0 - point.transition().variance_floor());
    pw.tensors[5][2] = unit_bias;
    pw.tensors[5][3] = unit_bias;

    ReplayBuffer buf(2, 1);
    Rng data_rng(93);
    testsupport::fill_linear_buffer(buf, LinearSystem{}, 2, 10, data_rng);

    FeConfig fe;
    fe.kl_weight = 0.0;
    fe.dataset_size = buf.size();
    fe.recognition_variance = 1.0;
    auto norm = Normalizer::identity(2, 1);

    Rng r1(94), r2(94);
    auto b_terms = free_energy_batch(bayes.transition(), bayes.reward(),
                                     whole_buffer(buf), norm, fe, r1, false);
    auto p_terms = free_energy_batch(point.transition(), point.reward(),
                                     whole_buffer(buf), norm, fe, r2, false);
    CHECK(std::abs(b_terms.terms.state_kl - p_terms.terms.state_kl) < 1e-10);
}

TEST_CASE("trainer checkpoint round-trip") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 8;
    cfg.reward_hidden = 8;
    cfg.batches_per_epoch = 10;
    cfg.batch_size = 16;
    Rng init(95);
    Trainer trainer(2, 1, cfg, init);

    ReplayBuffer buf(2, 1);
    Rng data_rng(96);
    testsupport::fill_linear_buffer(buf, LinearSystem{}, 2, 20, data_rng);
    Rng rng(97);
    trainer.train_epoch(buf, rng);

    std::string path = "genmodel_ckpt_test.bin";
    trainer.save(path);
    Trainer loaded = Trainer::load(path);
    std::remove(path.c_str());

    auto p1 = trainer.transition().parameters();
    auto p2 = loaded.transition().parameters();
    REQUIRE(p1.size() == p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i)
        CHECK(std::memcmp(p1[i]->data(), p2[i]->data(),
                          p1[i]->size() * sizeof(double)) == 0);
    CHECK(loaded.normalizer().state_mean == trainer.normalizer().state_mean);
    CHECK(loaded.normalizer().reward_std == trainer.normalizer().reward_std);

    // predictions agree bit-for-bit
    auto theta1 = trainer.transition().mean_theta();
    auto theta2 = loaded.transition().mean_theta();
    auto g1 = predict_next_state(trainer.transition(), {0.2, -0.1}, {0.4}, theta1,
                                 trainer.normalizer());
    auto g2 = predict_next_state(loaded.transition(), {0.2, -0.1}, {0.4}, theta2,
                                 loaded.normalizer());
    CHECK(std::memcmp(g1.mean.data(), g2.mean.data(), 2 * sizeof(double)) == 0);
}

TEST_CASE("snapshot sampling matches model theta sampling") {
    TrainerConfig cfg;
    cfg.mode = ModelMode::bayesian;
    cfg.hidden = 8;
    cfg.reward_hidden = 8;
    Rng init(99);
    Trainer trainer(2, 1, cfg, init);
    auto snap = make_snapshot(trainer);

    Rng r1(7), r2(7);
    auto from_model = trainer.transition().sample_theta(r1);
    std::vector<diffcore::Tensor> from_snap = snap.transition_mu;
    snap.sample_theta(r2, from_snap);
    for (int l = 0; l < 6; ++l)
        for (std::size_t i = 0; i < from_snap[l].size(); ++i)
            CHECK(from_snap[l][i] == doctest::Approx(from_model.weights[l][i]).epsilon(1e-15));
}
