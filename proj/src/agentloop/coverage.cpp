#include "aif/agentloop/coverage.hpp"

#include "aif/common/check.hpp"

namespace aif::agentloop {

CoverageGrid::CoverageGrid(std::size_t resolution, double x_lo, double x_hi,
                           double y_lo, double y_hi)
    : resolution_(resolution), x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi),
      cells_(resolution * resolution, 0) {
    check_arg(resolution >= 1, "CoverageGrid: resolution must be positive");
    check_arg(x_lo < x_hi && y_lo < y_hi, "CoverageGrid: empty box");
}

void CoverageGrid::mark(double x, double y) {
    auto cell = [this](double v, double lo, double hi) {
        double t = (v - lo) / (hi - lo);
        auto idx = static_cast<long>(t * static_cast<double>(resolution_));
        if (idx < 0) idx = 0;
        if (idx >= static_cast<long>(resolution_)) idx = static_cast<long>(resolution_) - 1;
        return static_cast<std::size_t>(idx);
    };
    std::size_t i = cell(x, x_lo_, x_hi_) * resolution_ + cell(y, y_lo_, y_hi_);
    if (!cells_[i]) {
        cells_[i] = 1;
        visited_count_ += 1;
    }
}

void coverage_update(CoverageGrid& grid, const std::vector<Transition>& transitions,
                     std::size_t first) {
    for (std::size_t i = first; i < transitions.size(); ++i) {
        const auto& t = transitions[i];
        check_arg(t.state.size() == 2, "coverage_update: 2-D states required");
        grid.mark(t.state[0], t.state[1]);
    }
}

}  // namespace aif::agentloop
