#pragma once

#include <cstdint>
#include <vector>

#include "aif/agentloop/replay_buffer.hpp"

namespace aif::agentloop {

/// 2-D occupancy histogram over a state box; cumulative coverage fraction
/// is visited cells / G^2 and never decreases. States outside the box are
/// clamped to the boundary cell (and counted).
class CoverageGrid {
public:
    CoverageGrid(std::size_t resolution, double x_lo, double x_hi, double y_lo,
                 double y_hi);

    void mark(double x, double y);
    std::size_t visited_cells() const { return visited_count_; }
    double fraction() const {
        return static_cast<double>(visited_count_) /
               static_cast<double>(resolution_ * resolution_);
    }
    std::size_t resolution() const { return resolution_; }
    const std::vector<std::uint8_t>& cells() const { return cells_; }

private:
    std::size_t resolution_;
    double x_lo_, x_hi_, y_lo_, y_hi_;
    std::vector<std::uint8_t> cells_;
    std::size_t visited_count_ = 0;
};

/// Marks the pre-step state of every transition.
void coverage_update(CoverageGrid& grid, const std::vector<Transition>& transitions,
                     std::size_t first = 0);

}  // namespace aif::agentloop
