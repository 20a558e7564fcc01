#include "aif/cli/commands.hpp"

#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>

#include "aif/cli/selftest.hpp"
#include "aif/cli/svg.hpp"
#include "aif/envsim/action_repeat.hpp"
#include "aif/envsim/remote.hpp"
#include "aif/genmodel/trainer.hpp"

namespace aif::cli {

namespace fs = std::filesystem;

namespace {

std::unique_ptr<envsim::Env> build_env(const RunConfig& cfg) {
    std::unique_ptr<envsim::Env> env;
    if (!cfg.remote_endpoint.empty())
        env = envsim::remote_env(cfg.remote_endpoint);
    else
        env = envsim::make_env(cfg.env);
    if (cfg.action_repeat > 1)
        env = std::make_unique<envsim::ActionRepeat>(std::move(env), cfg.action_repeat);
    return env;
}

std::string agent_label_from_config(const std::string& config_text) {
    std::istringstream is(config_text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("agent = ", 0) == 0) return line.substr(8);
    }
    return "agent";
}

std::vector<SeedResult> read_run_dir(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("seed_", 0) == 0 && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    }
    check_runtime(!files.empty(), "no seed_*.csv result files in " + dir);
    std::sort(files.begin(), files.end());
    std::vector<SeedResult> seeds;
    for (const auto& f : files) seeds.push_back(read_record_csv(f.string()));
    return seeds;
}

HeatmapPanel coverage_panel(const std::string& dir, const std::string& label) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("coverage_seed_", 0) == 0 && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    }
    HeatmapPanel panel;
    panel.label = label;
    if (files.empty()) return panel;
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto rows = read_coverage_csv(f.string());
        if (panel.resolution == 0) {
            panel.resolution = rows.size();
            panel.cells.assign(panel.resolution * panel.resolution, 0.0);
        }
        check_runtime(rows.size() == panel.resolution,
                      "coverage grid size mismatch in " + f.string());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < rows[r].size(); ++c)
                panel.cells[r * panel.resolution + c] +=
                    rows[r][c] / static_cast<double>(files.size());
    }
    return panel;
}

}  // namespace

int cmd_run(const RunConfig& cfg, std::ostream& log) {
    // surface config problems (unknown agent, bad mode) before any work
    (void)cfg.experiment_config();
    if (!cfg.remote_endpoint.empty() && cfg.jobs > 1)
        throw ConfigError("remote runs serialize on one connection; use jobs = 1");

    fs::create_directories(cfg.out);
    const std::string resolved = cfg.serialize();
    write_text_file((fs::path(cfg.out) / "config_resolved.ini").string(), resolved);

    std::mutex log_mutex;
    std::vector<std::string> errors;
    std::size_t next = 0;
    std::mutex next_mutex;

    auto worker = [&] {
        for (;;) {
            std::size_t idx;
            {
                std::lock_guard<std::mutex> lk(next_mutex);
                if (next >= cfg.seeds.size()) return;
                idx = next++;
            }
            std::uint64_t seed = cfg.seeds[idx];
            try {
                auto env = build_env(cfg);
                std::optional<genmodel::Trainer> trainer;
                auto record =
                    agentloop::run_experiment(*env, cfg.experiment_config(), seed,
                                              &trainer);
                fs::path base(cfg.out);
                write_record_csv((base / ("seed_" + std::to_string(seed) + ".csv")).string(),
                                 resolved, record);
                if (record.coverage_resolution > 0)
                    write_coverage_csv(
                        (base / ("coverage_seed_" + std::to_string(seed) + ".csv")).string(),
                        record);
                if (cfg.write_step_traces)
                    write_step_trace(
                        (base / ("trace_seed_" + std::to_string(seed) + ".jsonl")).string(),
                        record);
                trainer->save((base / ("model_seed_" + std::to_string(seed) + ".ckpt")).string());
                std::lock_guard<std::mutex> lk(log_mutex);
                log << "seed " << seed << ": " << record.epochs.size()
                    << " epochs, final return "
                    << (record.epochs.empty() ? 0.0 : record.epochs.back().episode_return)
                    << "\n";
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(log_mutex);
                errors.push_back("seed " + std::to_string(seed) + ": " + e.what());
            }
        }
    };

    std::size_t n_workers = std::max<std::size_t>(1, std::min(cfg.jobs, cfg.seeds.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    for (const auto& e : errors) log << "error: " << e << "\n";
    if (!errors.empty()) return 1;  // partial artifacts stay on disk

    auto seeds = read_run_dir(cfg.out);
    auto report = aggregate(seeds);
    write_aggregate_csv((fs::path(cfg.out) / "aggregate.csv").string(), report);

    CurveSeries series;
    series.label = cfg.agent;
    series.mean = report.mean_return;
    series.lo = report.return_lo;
    series.hi = report.return_hi;
    write_text_file((fs::path(cfg.out) / "learning_curve.svg").string(),
                    render_learning_curve_svg({series}, "return"));

    HeatmapPanel panel = coverage_panel(cfg.out, cfg.agent);
    if (panel.resolution > 0)
        write_text_file((fs::path(cfg.out) / "coverage.svg").string(),
                        render_coverage_svg({panel}));

    log << "wrote " << cfg.out << "/aggregate.csv and plots\n";
    return 0;
}

int cmd_plot(const std::vector<std::string>& run_dirs, const std::string& out_dir,
             std::ostream& log) {
    check_arg(!run_dirs.empty(), "cmd_plot: at least one run directory required");
    fs::create_directories(out_dir);

    std::vector<CurveSeries> curves;
    std::vector<HeatmapPanel> panels;
    for (const auto& dir : run_dirs) {
        auto seeds = read_run_dir(dir);
        auto report = aggregate(seeds);
        CurveSeries s;
        s.label = agent_label_from_config(seeds[0].config_text);
        s.mean = report.mean_return;
        s.lo = report.return_lo;
        s.hi = report.return_hi;
        curves.push_back(std::move(s));
        HeatmapPanel panel = coverage_panel(dir, agent_label_from_config(seeds[0].config_text));
        if (panel.resolution > 0) panels.push_back(std::move(panel));
    }

    write_text_file((fs::path(out_dir) / "learning_curve.svg").string(),
                    render_learning_curve_svg(curves, "return"));
    log << "wrote " << out_dir << "/learning_curve.svg\n";
    if (!panels.empty()) {
        write_text_file((fs::path(out_dir) / "coverage.svg").string(),
                        render_coverage_svg(panels));
        log << "wrote " << out_dir << "/coverage.svg\n";
    }
    return 0;
}

int cmd_selftest(double inject_entropy_bias, std::ostream& log) {
    SelftestOptions opts;
    opts.inject_entropy_bias = inject_entropy_bias;
    auto checks = run_selftest(opts);
    bool ok = report_selftest(checks, log);
    return ok ? 0 : 1;
}

int cmd_env_serve(const std::string& env_name, int port, std::ostream& log) {
    (void)envsim::make_env(env_name);  // validate the name up front
    envsim::EnvServer server([env_name] { return envsim::make_env(env_name); },
                             static_cast<std::uint16_t>(port));
    log << "listening on 127.0.0.1:" << server.port() << "\n" << std::flush;
    server.serve_forever();
    return 0;
}

}  // namespace aif::cli
