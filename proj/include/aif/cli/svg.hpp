#pragma once

#include <string>
#include <vector>

#include "aif/cli/results.hpp"

namespace aif::cli {

/// One labelled learning curve with its interquartile band.
struct CurveSeries {
    std::string label;
    std::vector<double> mean, lo, hi;
};

/// Mean-return curves with shaded 95% interquartile bands. Output is byte
/// deterministic for identical inputs.
std::string render_learning_curve_svg(const std::vector<CurveSeries>& series,
                                      const std::string& y_label);

/// Occupancy heatmaps on a shared [0, 1] color scale, one panel per entry;
/// cell values are per-seed visit frequencies.
struct HeatmapPanel {
    std::string label;
    std::size_t resolution = 0;
    std::vector<double> cells;  // row-major, in [0, 1]
};

std::string render_coverage_svg(const std::vector<HeatmapPanel>& panels);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace aif::cli
