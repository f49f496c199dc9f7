#pragma once

#include "movo/dataio.hpp"

#include <string>
#include <vector>

namespace movo {

struct PlotSeries {
    std::string label;
    Trajectory trajectory;
    bool dashed = false;  // ground truth is drawn dashed
};

/// Top-down (XZ) trajectory plot with equal-aspect axes and a legend.
/// Output bytes are deterministic for identical input.
std::string render_trajectories_svg(const std::vector<PlotSeries>& series);

}  // namespace movo
