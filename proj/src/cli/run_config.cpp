#include "aif/cli/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace aif::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        return std::stoull(trim(v));
    } catch (...) {
        throw ConfigError("invalid integer for key '" + key + "': " + v);
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        return std::stod(trim(v));
    } catch (...) {
        throw ConfigError("invalid number for key '" + key + "': " + v);
    }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& v) {
    std::vector<std::uint64_t> out;
    std::istringstream is(v);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(parse_u64("seeds", tok));
    }
    if (out.empty()) throw ConfigError("seeds list is empty");
    return out;
}

}  // namespace

RunConfig RunConfig::defaults_for_task(const std::string& task) {
    RunConfig cfg;
    cfg.task = task;
    if (task == "explore-mountaincar") {
        cfg.env = "mountain-car";
        cfg.agent = "active_inference";
        cfg.mode = "bayesian";
        cfg.action_repeat = 1;
    } else if (task == "exploit-pendulum") {
        cfg.env = "pendulum";
        cfg.agent = "reward_only";
        cfg.mode = "point_estimate";
        cfg.action_repeat = 3;
    } else if (task == "custom") {
        // general defaults
    } else {
        throw ConfigError("unknown task '" + task + "'");
    }
    return cfg;
}

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
    const std::string& k = dotted_key;
    // top level
    if (k == "task") { *this = defaults_for_task(trim(value)); return; }
    if (k == "agent") { agent = trim(value); return; }
    if (k == "epochs") { epochs = parse_u64(k, value); return; }
    if (k == "seeds") { seeds = parse_seed_list(value); return; }
    if (k == "out") { out = trim(value); return; }
    if (k == "env") { env = trim(value); return; }
    if (k == "remote_endpoint") { remote_endpoint = trim(value); return; }
    if (k == "action_repeat") { action_repeat = parse_u64(k, value); return; }
    if (k == "seed_episodes") { seed_episodes = parse_u64(k, value); return; }
    if (k == "jobs") { jobs = parse_u64(k, value); return; }
    if (k == "step_traces") { write_step_traces = trim(value) == "true" || trim(value) == "1"; return; }
    // planner
    if (k == "planner.H") { planner_h = parse_u64(k, value); return; }
    if (k == "planner.N") { planner_n = parse_u64(k, value); return; }
    if (k == "planner.M") { planner_m = parse_u64(k, value); return; }
    if (k == "planner.I") { planner_i = parse_u64(k, value); return; }
    if (k == "planner.B") { planner_b = parse_u64(k, value); return; }
    if (k == "planner.J") { planner_j = parse_u64(k, value); return; }
    if (k == "planner.info_gain_weight") { info_gain_weight = parse_double(k, value); return; }
    if (k == "planner.variance_floor") { policy_variance_floor = parse_double(k, value); return; }
    if (k == "planner.threads") { planner_threads = parse_u64(k, value); return; }
    // model
    if (k == "model.mode") { mode = trim(value); return; }
    if (k == "model.hidden") { hidden = parse_u64(k, value); return; }
    if (k == "model.reward_hidden") { reward_hidden = parse_u64(k, value); return; }
    if (k == "model.K") { k_theta = static_cast<int>(parse_u64(k, value)); return; }
    if (k == "model.recognition_variance") { recognition_variance = parse_double(k, value); return; }
    if (k == "model.kl_weight") { kl_weight = parse_double(k, value); return; }
    if (k == "model.learning_rate") { learning_rate = parse_double(k, value); return; }
    if (k == "model.batches_per_epoch") { batches_per_epoch = parse_u64(k, value); return; }
    if (k == "model.batch_size") { batch_size = parse_u64(k, value); return; }
    if (k == "model.init_weight_variance") { init_weight_variance = parse_double(k, value); return; }
    // agent
    if (k == "agent.noise_variance") { noise_variance = parse_double(k, value); return; }
    // coverage
    if (k == "coverage.resolution") { coverage_resolution = parse_u64(k, value); return; }
    throw ConfigError("unknown config key '" + k + "'");
}

std::string RunConfig::serialize() const {
    std::ostringstream os;
    os << "task = " << task << "\n";
    os << "agent = " << agent << "\n";
    os << "epochs = " << epochs << "\n";
    os << "seeds = ";
    for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
    os << "\n";
    os << "out = " << out << "\n";
    os << "env = " << env << "\n";
    os << "remote_endpoint = " << remote_endpoint << "\n";
    os << "action_repeat = " << action_repeat << "\n";
    os << "seed_episodes = " << seed_episodes << "\n";
    os << "jobs = " << jobs << "\n";
    os << "step_traces = " << (write_step_traces ? "true" : "false") << "\n";
    os << "\n[planner]\n";
    os << "H = " << planner_h << "\n";
    os << "N = " << planner_n << "\n";
    os << "M = " << planner_m << "\n";
    os << "I = " << planner_i << "\n";
    os << "B = " << planner_b << "\n";
    os << "J = " << planner_j << "\n";
    os << "info_gain_weight = " << fmt_double(info_gain_weight) << "\n";
    os << "variance_floor = " << fmt_double(policy_variance_floor) << "\n";
    os << "threads = " << planner_threads << "\n";
    os << "\n[model]\n";
    os << "mode = " << mode << "\n";
    os << "hidden = " << hidden << "\n";
    os << "reward_hidden = " << reward_hidden << "\n";
    os << "K = " << k_theta << "\n";
    os << "recognition_variance = " << fmt_double(recognition_variance) << "\n";
    os << "kl_weight = " << fmt_double(kl_weight) << "\n";
    os << "learning_rate = " << fmt_double(learning_rate) << "\n";
    os << "batches_per_epoch = " << batches_per_epoch << "\n";
    os << "batch_size = " << batch_size << "\n";
    os << "init_weight_variance = " << fmt_double(init_weight_variance) << "\n";
    os << "\n[agent]\n";
    os << "noise_variance = " << fmt_double(noise_variance) << "\n";
    os << "\n[coverage]\n";
    os << "resolution = " << coverage_resolution << "\n";
    return os.str();
}

RunConfig RunConfig::parse(const std::string& text, const RunConfig& base) {
    // two passes: a task key switches the defaults, so apply it before
    // every other key regardless of its position in the file
    std::vector<std::pair<std::string, std::string>> kvs;
    std::istringstream is(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key = value, got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        kvs.emplace_back(section.empty() ? key : section + "." + key, value);
    }
    RunConfig cfg = base;
    for (const auto& [k, v] : kvs)
        if (k == "task") cfg.set(k, v);
    for (const auto& [k, v] : kvs)
        if (k != "task") cfg.set(k, v);
    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path, const RunConfig& base) {
    std::ifstream is(path);
    if (!is.good()) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return parse(os.str(), base);
}

agentloop::ExperimentConfig RunConfig::experiment_config() const {
    agentloop::ExperimentConfig ec;
    ec.agent.kind = agentloop::agent_kind_from_string(agent);
    ec.agent.exploration_noise_variance = noise_variance;
    ec.agent.info_gain_weight = info_gain_weight;
    ec.agent.planner.horizon = planner_h;
    ec.agent.planner.candidates = planner_n;
    ec.agent.planner.elites = planner_m;
    ec.agent.planner.iterations = planner_i;
    ec.agent.planner.theta_samples = planner_b;
    ec.agent.planner.particles_per_theta = planner_j;
    ec.agent.planner.policy_variance_floor = policy_variance_floor;
    ec.agent.planner.threads = planner_threads;
    ec.agent.trainer.mode = genmodel::mode_from_string(mode);
    ec.agent.trainer.hidden = hidden;
    ec.agent.trainer.reward_hidden = reward_hidden;
    ec.agent.trainer.k_theta = k_theta;
    ec.agent.trainer.recognition_variance = recognition_variance;
    ec.agent.trainer.kl_weight = kl_weight;
    ec.agent.trainer.batches_per_epoch = batches_per_epoch;
    ec.agent.trainer.batch_size = batch_size;
    ec.agent.trainer.init_weight_variance = init_weight_variance;
    ec.agent.trainer.adam.learning_rate = learning_rate;
    ec.epochs = epochs;
    ec.seed_episodes = seed_episodes;
    ec.action_repeat = action_repeat;
    ec.track_coverage = env == "mountain-car" && coverage_resolution > 0;
    ec.coverage_resolution = coverage_resolution;
    ec.record_traces = write_step_traces;
    return ec;
}

}  // namespace aif::cli
