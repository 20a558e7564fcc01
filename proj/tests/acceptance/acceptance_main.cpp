// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Heavy criteria (1, 2) run desk-scale configurations whose knobs are pinned
// here; --epochs/--seeds trim them for smoke runs (full scale by default).

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "aif/agentloop/experiment.hpp"
#include "aif/cli/selftest.hpp"
#include "aif/envsim/action_repeat.hpp"
#include "aif/envsim/mountain_car.hpp"
#include "aif/envsim/pendulum.hpp"
#include "aif/envsim/remote.hpp"
#include "aif/genmodel/snapshot.hpp"
#include "support/fixtures.hpp"
#include "support/subprocess.hpp"

#ifndef AIF_CLI_PATH
#define AIF_CLI_PATH "aif"
#endif

using namespace aif;
using namespace aif::agentloop;

namespace {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    bool informational = false;
    std::string detail;
};

struct Options {
    int criterion = 0;  // 0 = all
    std::size_t epochs_override = 0;
    std::size_t seeds_override = 0;
    std::size_t jobs = 2;
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

void progress(const std::string& msg) {
    std::cerr << "  [" << msg << "]\n" << std::flush;
}

// run one experiment per (agent, seed) pair across worker threads
template <typename MakeEnv, typename MakeCfg>
std::vector<ExperimentRecord> run_grid(const std::vector<AgentKind>& agents,
                                       const std::vector<std::uint64_t>& seeds,
                                       MakeEnv make_env_fn, MakeCfg make_cfg_fn,
                                       std::size_t jobs, const char* tag) {
    struct Job {
        AgentKind agent;
        std::uint64_t seed;
        std::size_t index;
    };
    std::vector<Job> todo;
    for (std::size_t a = 0; a < agents.size(); ++a)
        for (std::size_t s = 0; s < seeds.size(); ++s)
            todo.push_back({agents[a], seeds[s], a * seeds.size() + s});

    std::vector<ExperimentRecord> records(todo.size());
    std::mutex next_mutex;
    std::size_t next = 0;
    auto worker = [&] {
        for (;;) {
            std::size_t idx;
            {
                std::lock_guard<std::mutex> lk(next_mutex);
                if (next >= todo.size()) return;
                idx = next++;
            }
            const Job& job = todo[idx];
            auto env = make_env_fn();
            ExperimentConfig cfg = make_cfg_fn(job.agent);
            records[job.index] = run_experiment(*env, cfg, job.seed);
            std::ostringstream msg;
            msg << tag << " " << to_string(job.agent) << " seed " << job.seed
                << " done";
            progress(msg.str());
        }
    };
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < std::max<std::size_t>(jobs, 1); ++i)
        workers.emplace_back(worker);
    for (auto& w : workers) w.join();
    return records;
}

// ---------------------------------------------------------------------
// criterion 1: exploration coverage ordering on mountain car
// ---------------------------------------------------------------------

ExperimentConfig exploration_config(AgentKind kind) {
    ExperimentConfig cfg;
    cfg.agent.kind = kind;
    cfg.agent.exploration_noise_variance = 0.3;
    cfg.agent.info_gain_weight = 1.0;
    cfg.agent.trainer.mode = genmodel::ModelMode::bayesian;
    cfg.agent.trainer.hidden = 20;
    cfg.agent.trainer.reward_hidden = 8;
    cfg.agent.trainer.k_theta = 1;
    cfg.agent.trainer.batches_per_epoch = 100;
    cfg.agent.trainer.batch_size = 50;
    cfg.agent.planner.horizon = 10;
    cfg.agent.planner.candidates = 48;
    cfg.agent.planner.elites = 6;
    cfg.agent.planner.iterations = 4;
    cfg.agent.planner.theta_samples = 5;
    cfg.agent.planner.particles_per_theta = 3;
    cfg.epochs = 100;
    cfg.track_coverage = true;
    cfg.coverage_resolution = 32;
    cfg.record_traces = false;
    return cfg;
}

CriterionResult criterion1(const Options& opts) {
    CriterionResult res{1, "exploration ordering (coverage)"};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    if (opts.seeds_override) seeds.resize(std::min(seeds.size(), opts.seeds_override));
    std::vector<AgentKind> agents = {AgentKind::active_inference,
                                     AgentKind::epsilon_greedy,
                                     AgentKind::reward_only};

    auto records = run_grid(
        agents, seeds, [] { return std::make_unique<envsim::MountainCarEnv>(200); },
        [&](AgentKind kind) {
            ExperimentConfig cfg = exploration_config(kind);
            if (opts.epochs_override) cfg.epochs = opts.epochs_override;
            return cfg;
        },
        opts.jobs, "criterion 1:");

    double mean_cov[3] = {0, 0, 0};
    for (std::size_t a = 0; a < agents.size(); ++a)
        for (std::size_t s = 0; s < seeds.size(); ++s)
            mean_cov[a] += records[a * seeds.size() + s].epochs.back().coverage_fraction /
                           static_cast<double>(seeds.size());

    double active = mean_cov[0], eps = mean_cov[1], reward = mean_cov[2];
    bool ordering = active > eps && active > reward;
    bool margin = active >= 1.25 * reward;
    res.pass = ordering && margin;
    res.detail = "mean coverage: active=" + fmt(active) + " eps_greedy=" + fmt(eps) +
                 " reward_only=" + fmt(reward) +
                 " (active/reward=" + fmt(reward > 0 ? active / reward : 0.0, 3) + ")";
    return res;
}

// ---------------------------------------------------------------------
// criterion 2: pendulum swing-up learning in point-estimate mode
// ---------------------------------------------------------------------

ExperimentConfig exploitation_config() {
    ExperimentConfig cfg;
    cfg.agent.kind = AgentKind::reward_only;  // extrinsic value only
    cfg.agent.trainer.mode = genmodel::ModelMode::point_estimate;
    cfg.agent.trainer.hidden = 32;
    cfg.agent.trainer.reward_hidden = 32;
    cfg.agent.trainer.recognition_variance = 0.001;  // sharp recognition: the
    // elite ranking needs tight rollouts near the upright reward peak
    cfg.agent.trainer.batches_per_epoch = 100;
    cfg.agent.trainer.batch_size = 50;
    cfg.agent.planner.horizon = 12;     // pinned
    cfg.agent.planner.candidates = 1000;
    cfg.agent.planner.elites = 100;
    cfg.agent.planner.iterations = 10;
    cfg.agent.planner.particles_per_theta = 4;
    cfg.epochs = 100;
    cfg.action_repeat = 3;
    cfg.track_coverage = false;
    cfg.record_traces = false;
    return cfg;
}

double random_pendulum_baseline(std::size_t episodes) {
    double total = 0.0;
    for (std::size_t e = 0; e < episodes; ++e) {
        envsim::ActionRepeat env(std::make_unique<envsim::PendulumEnv>(200), 3);
        env.reset(1000 + e);
        Rng rng(derive_seed(77, e));
        double ep_return = 0.0;
        for (;;) {
            auto r = env.step({rng.uniform(-2.0, 2.0)});
            ep_return += r.reward;
            if (r.terminal || r.truncated) break;
        }
        total += ep_return;
    }
    return total / static_cast<double>(episodes);
}

CriterionResult criterion2(const Options& opts) {
    CriterionResult res{2, "exploitation learning (pendulum swing-up)"};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    if (opts.seeds_override) seeds.resize(std::min(seeds.size(), opts.seeds_override));

    double baseline = random_pendulum_baseline(20);
    progress("criterion 2: random baseline " + fmt(baseline, 5));

    auto records = run_grid(
        std::vector<AgentKind>{AgentKind::reward_only}, seeds,
        [] {
            return std::make_unique<envsim::ActionRepeat>(
                std::make_unique<envsim::PendulumEnv>(200), 3);
        },
        [&](AgentKind) {
            ExperimentConfig cfg = exploitation_config();
            if (opts.epochs_override) cfg.epochs = opts.epochs_override;
            return cfg;
        },
        opts.jobs, "criterion 2:");

    int passed_seeds = 0;
    std::string per_seed;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        const auto& epochs = records[s].epochs;
        std::size_t last = std::min<std::size_t>(10, epochs.size());
        double mean_last = 0.0;
        for (std::size_t i = epochs.size() - last; i < epochs.size(); ++i)
            mean_last += epochs[i].episode_return / static_cast<double>(last);
        if (mean_last > -300.0) ++passed_seeds;
        per_seed += (s ? "," : "") + fmt(mean_last, 5);
    }
    res.pass = passed_seeds >= 4 || (seeds.size() < 5 && passed_seeds == int(seeds.size()));
    res.detail = "last-10 mean returns per seed: [" + per_seed + "], threshold -300, " +
                 std::to_string(passed_seeds) + "/" + std::to_string(seeds.size()) +
                 " seeds pass; random baseline " + fmt(baseline, 5);
    return res;
}

// ---------------------------------------------------------------------
// criterion 3: out-of-scope comparisons, substituted by property suites
// ---------------------------------------------------------------------

CriterionResult criterion3(const Options&) {
    CriterionResult res{3, "hopper/DDPG comparisons"};
    res.pass = true;
    res.informational = true;
    res.detail = "not reproducible at desk scale (external physics engine, unpublished "
                 "baseline tuning); substituted by criteria 4-6 property suites per "
                 "the acceptance contract";
    return res;
}

// ---------------------------------------------------------------------
// criterion 4: fast numerical oracle suite
// ---------------------------------------------------------------------

CriterionResult criterion4(const Options&) {
    CriterionResult res{4, "numerical oracle suite"};
    auto t0 = std::chrono::steady_clock::now();
    auto checks = cli::run_selftest();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    bool all = true;
    std::string detail;
    for (const auto& c : checks) {
        all = all && c.passed;
        detail += c.name + "=" + fmt(c.measured, 3) + (c.passed ? " " : "(FAIL) ");
    }
    res.pass = all && secs < 60.0;
    res.detail = detail + "runtime " + fmt(secs, 3) + "s (limit 60)";
    return res;
}

// ---------------------------------------------------------------------
// criterion 5: model-learning property on the synthetic linear system
// ---------------------------------------------------------------------

CriterionResult criterion5(const Options& opts) {
    CriterionResult res{5, "model learning on the linear system"};
    std::vector<std::uint64_t> seeds = {101, 202, 303, 404, 505};
    if (opts.seeds_override) seeds.resize(std::min(seeds.size(), opts.seeds_override));

    int fe_ok = 0, mse_ok = 0, contraction_ok = 0;
    std::string mse_detail;
    std::mutex detail_mutex;
    std::size_t next = 0;
    std::mutex next_mutex;

    auto one_seed = [&](std::uint64_t seed) {
        genmodel::TrainerConfig tcfg;
        tcfg.mode = genmodel::ModelMode::bayesian;
        tcfg.hidden = 8;
        tcfg.reward_hidden = 8;
        tcfg.k_theta = 4;
        tcfg.recognition_variance = 0.01;
        tcfg.batches_per_epoch = 100;
        tcfg.batch_size = 50;
        Rng init(seed);
        genmodel::Trainer trainer(2, 1, tcfg, init);

        testsupport::LinearSystem sys;
        ReplayBuffer buffer(2, 1);
        Rng data_rng(seed + 1);
        testsupport::fill_linear_buffer(buffer, sys, 50, 80, data_rng);

        Rng rng(seed + 2);
        double fe_first10 = 0.0, fe_last10_of_1000 = 0.0;
        double unc_100 = 0.0, unc_5000 = 0.0;
        for (int epoch = 0; epoch < 100; ++epoch) {  // 10000 batches
            auto stats = trainer.train_epoch(buffer, rng);
            if (epoch == 0) {
                for (int i = 0; i < 10; ++i) fe_first10 += stats[i].total / 10.0;
                unc_100 = genmodel::parameter_uncertainty(trainer.transition());
            }
            if (epoch == 9)
                for (int i = 90; i < 100; ++i) fe_last10_of_1000 += stats[i].total / 10.0;
            if (epoch == 49)
                unc_5000 = genmodel::parameter_uncertainty(trainer.transition());
        }

        // one-step prediction MSE in normalized units, held-out episodes
        auto theta = trainer.transition().mean_theta();
        const auto& norm = trainer.normalizer();
        Rng eval_rng(seed + 3);
        double mse = 0.0;
        int count = 0;
        for (int ep = 0; ep < 5; ++ep) {
            std::vector<double> s{eval_rng.normal(), eval_rng.normal()};
            for (int t = 0; t < 40; ++t) {
                double a = eval_rng.uniform(-1.0, 1.0);
                auto s_true = sys.step(s, a, eval_rng);
                auto pred =
                    genmodel::predict_next_state(trainer.transition(), s, {a}, theta, norm);
                for (int k = 0; k < 2; ++k) {
                    double e = (pred.mean[k] - s_true[k]) / norm.state_std[k];
                    mse += e * e;
                    ++count;
                }
                s = s_true;
            }
        }
        mse /= count;

        std::lock_guard<std::mutex> lk(detail_mutex);
        if (fe_last10_of_1000 < fe_first10) ++fe_ok;
        if (mse < 1e-2) ++mse_ok;
        if (unc_5000 < unc_100) ++contraction_ok;
        mse_detail += (mse_detail.empty() ? "" : ",") + fmt(mse, 3);
        progress("criterion 5: seed " + std::to_string(seed) + " mse " + fmt(mse, 3) +
                 " unc " + fmt(unc_100, 3) + "->" + fmt(unc_5000, 3));
    };

    auto worker = [&] {
        for (;;) {
            std::size_t idx;
            {
                std::lock_guard<std::mutex> lk(next_mutex);
                if (next >= seeds.size()) return;
                idx = next++;
            }
            one_seed(seeds[idx]);
        }
    };
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < std::max<std::size_t>(opts.jobs, 1); ++i)
        workers.emplace_back(worker);
    for (auto& w : workers) w.join();

    int n = static_cast<int>(seeds.size());
    res.pass = fe_ok == n && mse_ok == n && contraction_ok == n;
    res.detail = "free-energy decrease " + std::to_string(fe_ok) + "/" +
                 std::to_string(n) + ", mse [" + mse_detail + "] < 1e-2 " +
                 std::to_string(mse_ok) + "/" + std::to_string(n) +
                 ", posterior contraction " + std::to_string(contraction_ok) + "/" +
                 std::to_string(n);
    return res;
}

// ---------------------------------------------------------------------
// criterion 6: ablation identities (bit-exact traces)
// ---------------------------------------------------------------------

bool traces_bit_equal(const ExperimentRecord& a, const ExperimentRecord& b) {
    if (a.collected_episodes.size() != b.collected_episodes.size()) return false;
    for (std::size_t e = 0; e < a.collected_episodes.size(); ++e) {
        const auto& ta = a.collected_episodes[e];
        const auto& tb = b.collected_episodes[e];
        if (ta.size() != tb.size()) return false;
        for (std::size_t t = 0; t < ta.size(); ++t) {
            if (ta[t].state.size() != tb[t].state.size() ||
                std::memcmp(ta[t].state.data(), tb[t].state.data(),
                            ta[t].state.size() * sizeof(double)) != 0)
                return false;
            if (ta[t].action.size() != tb[t].action.size() ||
                std::memcmp(ta[t].action.data(), tb[t].action.data(),
                            ta[t].action.size() * sizeof(double)) != 0)
                return false;
            if (std::memcmp(&ta[t].reward, &tb[t].reward, sizeof(double)) != 0)
                return false;
        }
    }
    return true;
}

CriterionResult criterion6(const Options&) {
    CriterionResult res{6, "ablation identities"};
    auto make_cfg = [](AgentKind kind) {
        ExperimentConfig cfg;
        cfg.agent.kind = kind;
        cfg.agent.trainer.mode = genmodel::ModelMode::bayesian;
        cfg.agent.trainer.hidden = 12;
        cfg.agent.trainer.reward_hidden = 8;
        cfg.agent.trainer.batches_per_epoch = 10;
        cfg.agent.trainer.batch_size = 16;
        cfg.agent.planner.horizon = 5;
        cfg.agent.planner.candidates = 24;
        cfg.agent.planner.elites = 4;
        cfg.agent.planner.iterations = 3;
        cfg.agent.planner.theta_samples = 3;
        cfg.agent.planner.particles_per_theta = 2;
        cfg.epochs = 3;
        cfg.track_coverage = true;
        cfg.record_traces = true;
        return cfg;
    };

    bool all_equal = true;
    for (std::uint64_t seed : {11ULL, 12ULL}) {
        envsim::MountainCarEnv env_a(60), env_b(60), env_c(60);
        auto reward_cfg = make_cfg(AgentKind::reward_only);
        auto reward_rec = run_experiment(env_a, reward_cfg, seed);

        auto ai_cfg = make_cfg(AgentKind::active_inference);
        ai_cfg.agent.info_gain_weight = 0.0;
        auto ai_rec = run_experiment(env_b, ai_cfg, seed);

        auto eps_cfg = make_cfg(AgentKind::epsilon_greedy);
        eps_cfg.agent.exploration_noise_variance = 0.0;
        auto eps_rec = run_experiment(env_c, eps_cfg, seed);

        all_equal = all_equal && traces_bit_equal(reward_rec, ai_rec) &&
                    traces_bit_equal(reward_rec, eps_rec);
    }
    res.pass = all_equal;
    res.detail = all_equal ? "info-gain-0 and epsilon-0 traces bit-equal reward_only "
                             "(2 seeds, 3 epochs each)"
                           : "trace mismatch";
    return res;
}

// ---------------------------------------------------------------------
// criterion 7: remote protocol conformance behind env-serve
// ---------------------------------------------------------------------

CriterionResult criterion7(const Options&) {
    CriterionResult res{7, "remote env protocol conformance"};

    // host the CLI's env-serve in the background on an ephemeral port
    std::string cmd = std::string(AIF_CLI_PATH) + " env-serve --env mountain-car --port 0";
    FILE* server = popen(cmd.c_str(), "r");
    if (!server) {
        res.detail = "could not spawn env-serve";
        return res;
    }
    char line[256];
    std::string port;
    if (fgets(line, sizeof line, server)) {
        std::string s(line);
        auto pos = s.rfind(':');
        if (pos != std::string::npos) port = s.substr(pos + 1);
        while (!port.empty() && (port.back() == '\n' || port.back() == '\r'))
            port.pop_back();
    }
    if (port.empty()) {
        pclose(server);
        res.detail = "env-serve did not report a port";
        return res;
    }

    bool all_equal = true;
    std::size_t episodes = 0;
    try {
        envsim::RemoteEnv remote("127.0.0.1:" + port, 10.0);
        envsim::MountainCarEnv local(200);
        for (std::uint64_t seed = 1; seed <= 10 && all_equal; ++seed) {
            auto sr = remote.reset(seed);
            auto sl = local.reset(seed);
            all_equal = std::memcmp(sr.data(), sl.data(), 2 * sizeof(double)) == 0;
            Rng rng(derive_seed(900, seed));
            while (all_equal) {
                std::vector<double> a{rng.uniform(-1.0, 1.0)};
                auto rr = remote.step(a);
                auto rl = local.step(a);
                all_equal = std::memcmp(rr.next_state.data(), rl.next_state.data(),
                                        2 * sizeof(double)) == 0 &&
                            std::memcmp(&rr.reward, &rl.reward, sizeof(double)) == 0 &&
                            rr.terminal == rl.terminal && rr.truncated == rl.truncated;
                if (rr.terminal || rr.truncated) break;
            }
            ++episodes;
        }
    } catch (const std::exception& e) {
        res.detail = std::string("protocol error: ") + e.what();
        all_equal = false;
    }
    // pclose blocks until the server exits; kill it via pkill on our command
    (void)testsupport::run_command("pkill -f 'env-serve --env mountain-car --port 0'");
    pclose(server);

    res.pass = all_equal && episodes == 10;
    if (res.pass)
        res.detail = "10 seeded episodes bit-identical between remote and in-process";
    else if (res.detail.empty())
        res.detail = "trace mismatch after " + std::to_string(episodes) + " episodes";
    return res;
}

}  // namespace

int main(int argc, char** argv) {
    Options opts;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        auto next_val = [&](const char* flag) -> std::string {
            if (i + 1 >= argc) {
                std::cerr << flag << " expects a value\n";
                std::exit(2);
            }
            return argv[++i];
        };
        if (arg == "--criterion") {
            std::string v = next_val("--criterion");
            opts.criterion = v == "all" ? 0 : std::stoi(v);
        } else if (arg == "--epochs") {
            opts.epochs_override = std::stoul(next_val("--epochs"));
        } else if (arg == "--seeds") {
            opts.seeds_override = std::stoul(next_val("--seeds"));
        } else if (arg == "--jobs") {
            opts.jobs = std::stoul(next_val("--jobs"));
        } else {
            std::cerr << "usage: acceptance [--criterion N|all] [--epochs N] "
                         "[--seeds N] [--jobs N]\n";
            return 2;
        }
    }

    using CriterionFn = CriterionResult (*)(const Options&);
    const CriterionFn fns[] = {criterion1, criterion2, criterion3, criterion4,
                               criterion5, criterion6, criterion7};

    bool all_pass = true;
    for (int id = 1; id <= 7; ++id) {
        if (opts.criterion != 0 && opts.criterion != id) continue;
        CriterionResult r = fns[id - 1](opts);
        std::string status = r.informational ? "note" : (r.pass ? "PASS" : "FAIL");
        std::cout << "criterion " << r.id << " (" << r.name << "): " << status
                  << " - " << r.detail << "\n"
                  << std::flush;
        if (!r.informational) all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}
