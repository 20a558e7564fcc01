#include "aif/cli/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aif/common/check.hpp"

namespace aif::cli {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_record_csv(const std::string& path, const std::string& config_text,
                      const agentloop::ExperimentRecord& record) {
    std::ofstream os(path);
    check_runtime(os.good(), "write_record_csv: cannot open " + path);
    os << "# seed = " << record.seed << "\n";
    std::istringstream cfg(config_text);
    std::string line;
    while (std::getline(cfg, line)) os << "# " << line << "\n";
    os << "epoch,return,episode_length,state_kl,parameter_kl,reward_nll,"
          "observation_nll,total_fe,coverage,wall_seconds\n";
    for (const auto& e : record.epochs) {
        os << e.epoch << ',' << fmt(e.episode_return) << ',' << e.episode_length << ','
           << fmt(e.state_kl) << ',' << fmt(e.parameter_kl) << ',' << fmt(e.reward_nll)
           << ',' << fmt(e.observation_nll) << ',' << fmt(e.total_fe) << ','
           << fmt(e.coverage_fraction) << ',' << fmt(e.wall_seconds) << "\n";
    }
    check_runtime(os.good(), "write_record_csv: write failed for " + path);
}

SeedResult read_record_csv(const std::string& path) {
    std::ifstream is(path);
    check_runtime(is.good(), "read_record_csv: cannot open " + path);
    SeedResult result;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.rfind("# seed = ", 0) == 0) {
            result.seed = std::stoull(line.substr(9));
            continue;
        }
        if (!line.empty() && line[0] == '#') {
            std::string body = line.size() > 2 ? line.substr(2) : "";
            result.config_text += body + "\n";
            continue;
        }
        if (!header_seen) {
            check_runtime(line.rfind("epoch,", 0) == 0,
                          path + ":" + std::to_string(line_no) +
                              ": corrupt result file, expected column header");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(row, tok, ',')) cols.push_back(tok);
        check_runtime(cols.size() == 10, path + ":" + std::to_string(line_no) +
                                             ": corrupt result row");
        agentloop::EpochStats e;
        e.epoch = std::stoul(cols[0]);
        e.episode_return = std::stod(cols[1]);
        e.episode_length = std::stoul(cols[2]);
        e.state_kl = std::stod(cols[3]);
        e.parameter_kl = std::stod(cols[4]);
        e.reward_nll = std::stod(cols[5]);
        e.observation_nll = std::stod(cols[6]);
        e.total_fe = std::stod(cols[7]);
        e.coverage_fraction = std::stod(cols[8]);
        e.wall_seconds = std::stod(cols[9]);
        result.rows.push_back(e);
    }
    check_runtime(header_seen, path + ": corrupt result file, no header found");
    return result;
}

void write_coverage_csv(const std::string& path,
                        const agentloop::ExperimentRecord& record) {
    check_arg(record.coverage_resolution > 0, "write_coverage_csv: no coverage data");
    std::ofstream os(path);
    check_runtime(os.good(), "write_coverage_csv: cannot open " + path);
    const std::size_t g = record.coverage_resolution;
    for (std::size_t r = 0; r < g; ++r) {
        for (std::size_t c = 0; c < g; ++c) {
            os << (c ? "," : "") << int(record.coverage_cells[r * g + c]);
        }
        os << "\n";
    }
}

void write_step_trace(const std::string& path,
                      const agentloop::ExperimentRecord& record) {
    std::ofstream os(path);
    check_runtime(os.good(), "write_step_trace: cannot open " + path);
    for (std::size_t e = 0; e < record.collected_episodes.size(); ++e) {
        const auto& episode = record.collected_episodes[e];
        for (std::size_t t = 0; t < episode.size(); ++t) {
            const auto& step = episode[t];
            os << "{\"epoch\":" << (e + 1) << ",\"t\":" << t << ",\"state\":[";
            for (std::size_t i = 0; i < step.state.size(); ++i)
                os << (i ? "," : "") << fmt(step.state[i]);
            os << "],\"action\":[";
            for (std::size_t i = 0; i < step.action.size(); ++i)
                os << (i ? "," : "") << fmt(step.action[i]);
            os << "],\"reward\":" << fmt(step.reward) << "}\n";
        }
    }
}

std::vector<std::vector<int>> read_coverage_csv(const std::string& path) {
    std::ifstream is(path);
    check_runtime(is.good(), "read_coverage_csv: cannot open " + path);
    std::vector<std::vector<int>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<int> row;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) row.push_back(std::stoi(tok));
        rows.push_back(std::move(row));
    }
    return rows;
}

double quantile(std::vector<double> values, double p) {
    check_arg(!values.empty(), "quantile: empty sample");
    check_arg(p >= 0.0 && p <= 1.0, "quantile: p outside [0,1]");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    double h = p * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo >= values.size() - 1) return values.back();
    double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

AggregateReport aggregate(const std::vector<SeedResult>& seeds) {
    check_arg(!seeds.empty(), "aggregate: no seed results");
    AggregateReport rep;
    rep.seed_count = seeds.size();
    rep.epochs = seeds[0].rows.size();
    for (const auto& s : seeds)
        check_arg(s.rows.size() == rep.epochs, "aggregate: epoch count mismatch");

    for (std::size_t e = 0; e < rep.epochs; ++e) {
        std::vector<double> returns, coverages;
        for (const auto& s : seeds) {
            returns.push_back(s.rows[e].episode_return);
            coverages.push_back(s.rows[e].coverage_fraction);
        }
        double mean_r = 0, mean_c = 0;
        for (double v : returns) mean_r += v / static_cast<double>(returns.size());
        for (double v : coverages) mean_c += v / static_cast<double>(coverages.size());
        rep.mean_return.push_back(mean_r);
        rep.return_lo.push_back(quantile(returns, 0.025));
        rep.return_hi.push_back(quantile(returns, 0.975));
        rep.mean_coverage.push_back(mean_c);
        rep.coverage_lo.push_back(quantile(coverages, 0.025));
        rep.coverage_hi.push_back(quantile(coverages, 0.975));
    }
    return rep;
}

void write_aggregate_csv(const std::string& path, const AggregateReport& rep) {
    std::ofstream os(path);
    check_runtime(os.good(), "write_aggregate_csv: cannot open " + path);
    os << "# seeds = " << rep.seed_count << "\n";
    os << "# quantile_method = linear_interpolation\n";
    os << "epoch,mean_return,return_q025,return_q975,mean_coverage,coverage_q025,"
          "coverage_q975\n";
    for (std::size_t e = 0; e < rep.epochs; ++e) {
        os << (e + 1) << ',' << fmt(rep.mean_return[e]) << ',' << fmt(rep.return_lo[e])
           << ',' << fmt(rep.return_hi[e]) << ',' << fmt(rep.mean_coverage[e]) << ','
           << fmt(rep.coverage_lo[e]) << ',' << fmt(rep.coverage_hi[e]) << "\n";
    }
}

}  // namespace aif::cli
