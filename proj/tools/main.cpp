#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "aif/cli/commands.hpp"

using namespace aif;

int main(int argc, char** argv) {
    CLI::App app{"aif: model-based agent with free-energy training and "
                 "expected-free-energy planning"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "run an experiment (per seed) and aggregate");
    std::string config_path, task, agent, seeds, out, mode;
    std::uint64_t epochs = 0, jobs = 0;
    std::uint64_t ph = 0, pn = 0, pm = 0, pi = 0, pb = 0, pj = 0, hidden = 0;
    std::vector<std::string> sets;
    run->add_option("--config", config_path, "config file (flat-section key = value)");
    run->add_option("--task", task,
                    "task defaults: explore-mountaincar | exploit-pendulum | custom "
                    "(default explore-mountaincar)");
    run->add_option("--agent", agent,
                    "active_inference | reward_only | epsilon_greedy (task default)");
    run->add_option("--seeds", seeds, "comma-separated seed list (default 1,2,3,4,5)");
    run->add_option("--epochs", epochs, "train/collect cycles per seed (default 100)");
    run->add_option("--out", out, "output directory (default $AIF_OUT_ROOT or ./runs)");
    run->add_option("--jobs", jobs, "parallel seed workers (default 1)");
    run->add_option("--planner.H", ph, "planning horizon (default 12)");
    run->add_option("--planner.N", pn, "candidate policies per iteration (default 1000)");
    run->add_option("--planner.M", pm, "elite count (default 100)");
    run->add_option("--planner.I", pi, "refit iterations (default 10)");
    run->add_option("--planner.B", pb, "transition-parameter samples (default 5)");
    run->add_option("--planner.J", pj, "particles per parameter sample (default 4)");
    run->add_option("--model.mode", mode, "bayesian | point_estimate (task default)");
    run->add_option("--model.hidden", hidden, "transition network width (default 500)");
    run->add_option("--set", sets, "extra overrides as section.key=value; see configs/reference.ini for all keys")
        ->take_all();

    // ---- plot ----
    auto* plot = app.add_subcommand("plot", "render curves/heatmaps from run dirs");
    std::vector<std::string> plot_dirs;
    std::string plot_out = ".";
    plot->add_option("dirs", plot_dirs, "run directories")->required();
    plot->add_option("--out", plot_out, "output directory for SVGs");

    // ---- selftest ----
    auto* selftest = app.add_subcommand("selftest", "fast numerical oracle suite");
    double inject_bias = 0.0;
    selftest->add_option("--inject-entropy-bias", inject_bias,
                         "test seam: bias the entropy estimate");

    // ---- env-serve ----
    auto* serve = app.add_subcommand("env-serve",
                                     "host an in-process environment on a socket");
    std::string serve_env = "mountain-car";
    int serve_port = 0;
    serve->add_option("--env", serve_env, "mountain-car | pendulum");
    serve->add_option("--port", serve_port, "TCP port (0 picks a free one)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            cli::RunConfig cfg = cli::RunConfig::defaults_for_task(
                task.empty() ? "explore-mountaincar" : task);
            if (const char* root = std::getenv("AIF_OUT_ROOT")) cfg.out = root;
            if (!config_path.empty()) cfg = cli::RunConfig::parse_file(config_path, cfg);
            if (!agent.empty()) cfg.set("agent", agent);
            if (!seeds.empty()) cfg.set("seeds", seeds);
            if (run->count("--epochs")) cfg.set("epochs", std::to_string(epochs));
            if (!out.empty()) cfg.set("out", out);
            if (run->count("--jobs")) cfg.set("jobs", std::to_string(jobs));
            if (run->count("--planner.H")) cfg.set("planner.H", std::to_string(ph));
            if (run->count("--planner.N")) cfg.set("planner.N", std::to_string(pn));
            if (run->count("--planner.M")) cfg.set("planner.M", std::to_string(pm));
            if (run->count("--planner.I")) cfg.set("planner.I", std::to_string(pi));
            if (run->count("--planner.B")) cfg.set("planner.B", std::to_string(pb));
            if (run->count("--planner.J")) cfg.set("planner.J", std::to_string(pj));
            if (!mode.empty()) cfg.set("model.mode", mode);
            if (run->count("--model.hidden"))
                cfg.set("model.hidden", std::to_string(hidden));
            for (const auto& kv : sets) {
                auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw cli::ConfigError("--set expects key=value, got '" + kv + "'");
                cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
            }
            return cli::cmd_run(cfg, std::cout);
        }
        if (plot->parsed()) return cli::cmd_plot(plot_dirs, plot_out, std::cout);
        if (selftest->parsed()) return cli::cmd_selftest(inject_bias, std::cout);
        if (serve->parsed()) return cli::cmd_env_serve(serve_env, serve_port, std::cout);
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
