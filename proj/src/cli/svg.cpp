#include "aif/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "aif/common/check.hpp"

namespace aif::cli {

namespace {

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b"};

std::string f3(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

std::string render_learning_curve_svg(const std::vector<CurveSeries>& series,
                                      const std::string& y_label) {
    check_arg(!series.empty() && !series[0].mean.empty(),
              "render_learning_curve_svg: no data");
    const double width = 720, height = 440;
    const double ml = 70, mr = 20, mt = 30, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    std::size_t epochs = series[0].mean.size();
    double y_min = 1e300, y_max = -1e300;
    for (const auto& s : series) {
        for (double v : s.lo) y_min = std::min(y_min, v);
        for (double v : s.hi) y_max = std::max(y_max, v);
    }
    if (y_max <= y_min) y_max = y_min + 1.0;
    double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    auto px = [&](double epoch) {
        return ml + pw * (epoch - 1.0) / std::max<double>(1.0, double(epochs) - 1.0);
    };
    auto py = [&](double v) { return mt + ph * (1.0 - (v - y_min) / (y_max - y_min)); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f3(width) +
           "\" height=\"" + f3(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes
    svg += "<line x1=\"" + f3(ml) + "\" y1=\"" + f3(mt) + "\" x2=\"" + f3(ml) +
           "\" y2=\"" + f3(mt + ph) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + f3(ml) + "\" y1=\"" + f3(mt + ph) + "\" x2=\"" +
           f3(ml + pw) + "\" y2=\"" + f3(mt + ph) + "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double v = y_min + (y_max - y_min) * i / 4.0;
        svg += "<text x=\"" + f3(ml - 8) + "\" y=\"" + f3(py(v) + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + f3(v) + "</text>\n";
        double e = 1.0 + (double(epochs) - 1.0) * i / 4.0;
        svg += "<text x=\"" + f3(px(e)) + "\" y=\"" + f3(mt + ph + 18) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + f3(e) + "</text>\n";
    }
    svg += "<text x=\"" + f3(ml + pw / 2) + "\" y=\"" + f3(height - 12) +
           "\" font-size=\"12\" text-anchor=\"middle\">epoch</text>\n";
    svg += "<text x=\"16\" y=\"" + f3(mt + ph / 2) +
           "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           f3(mt + ph / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kSeriesColors[si % 6];
        // band polygon: hi forward, lo backward
        std::string pts;
        for (std::size_t e = 0; e < epochs; ++e)
            pts += f3(px(double(e + 1))) + "," + f3(py(s.hi[e])) + " ";
        for (std::size_t e = epochs; e-- > 0;)
            pts += f3(px(double(e + 1))) + "," + f3(py(s.lo[e])) + " ";
        svg += "<polygon points=\"" + pts + "\" fill=\"" + color +
               "\" opacity=\"0.18\" stroke=\"none\"/>\n";
        std::string line;
        for (std::size_t e = 0; e < epochs; ++e)
            line += f3(px(double(e + 1))) + "," + f3(py(s.mean[e])) + " ";
        svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + f3(ml + 10) + "\" y=\"" + f3(mt + 16 + 16 * double(si)) +
               "\" font-size=\"12\" fill=\"" + std::string(color) + "\">" + s.label +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_coverage_svg(const std::vector<HeatmapPanel>& panels) {
    check_arg(!panels.empty(), "render_coverage_svg: no panels");
    const double cell = 9.0, gap = 40.0, mt = 40.0, ml = 20.0;
    std::size_t g = panels[0].resolution;
    for (const auto& p : panels)
        check_arg(p.resolution == g && p.cells.size() == g * g,
                  "render_coverage_svg: inconsistent panel resolution");

    double panel_w = cell * double(g);
    double width = ml * 2 + panel_w * double(panels.size()) +
                   gap * double(panels.size() - 1);
    double height = mt + panel_w + 30.0;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f3(width) +
           "\" height=\"" + f3(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t pi = 0; pi < panels.size(); ++pi) {
        const auto& p = panels[pi];
        double x0 = ml + double(pi) * (panel_w + gap);
        svg += "<text x=\"" + f3(x0 + panel_w / 2) + "\" y=\"" + f3(mt - 12) +
               "\" font-size=\"13\" text-anchor=\"middle\">" + p.label + "</text>\n";
        for (std::size_t r = 0; r < g; ++r) {
            for (std::size_t c = 0; c < g; ++c) {
                double v = std::clamp(p.cells[r * g + c], 0.0, 1.0);
                if (v <= 0.0) continue;  // white background
                // shared color scale: white -> dark blue
                int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
                char color[16];
                std::snprintf(color, sizeof color, "#%02x%02xff", shade, shade);
                // grid x = first state dim (rows), y flipped so the second
                // dim increases upward
                svg += "<rect x=\"" + f3(x0 + cell * double(r)) + "\" y=\"" +
                       f3(mt + cell * double(g - 1 - c)) + "\" width=\"" + f3(cell) +
                       "\" height=\"" + f3(cell) + "\" fill=\"" + color + "\"/>\n";
            }
        }
        svg += "<rect x=\"" + f3(x0) + "\" y=\"" + f3(mt) + "\" width=\"" + f3(panel_w) +
               "\" height=\"" + f3(panel_w) +
               "\" fill=\"none\" stroke=\"black\" stroke-width=\"0.7\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    check_runtime(os.good(), "write_text_file: cannot open " + path);
    os << content;
    check_runtime(os.good(), "write_text_file: write failed for " + path);
}

}  // namespace aif::cli
