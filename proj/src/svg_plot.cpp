#include "movo/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace movo {

namespace {

const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

std::string render_trajectories_svg(const std::vector<PlotSeries>& series) {
    constexpr double kCanvas = 800.0;
    constexpr double kMargin = 60.0;

    double min_x = 1e300, max_x = -1e300, min_z = 1e300, max_z = -1e300;
    for (const PlotSeries& s : series) {
        for (const auto& [frame, pose] : s.trajectory.poses) {
            (void)frame;
            min_x = std::min(min_x, pose.translation.x());
            max_x = std::max(max_x, pose.translation.x());
            min_z = std::min(min_z, pose.translation.z());
            max_z = std::max(max_z, pose.translation.z());
        }
    }
    if (min_x > max_x) {
        min_x = max_x = min_z = max_z = 0.0;
    }
    const double span = std::max({max_x - min_x, max_z - min_z, 1e-9});
    const double scale = (kCanvas - 2.0 * kMargin) / span;  // equal aspect
    const double cx = 0.5 * (min_x + max_x);
    const double cz = 0.5 * (min_z + max_z);

    auto to_px = [&](double x, double z) {
        // x right, z up (forward motion plotted upward).
        const double px = kCanvas / 2.0 + (x - cx) * scale;
        const double py = kCanvas / 2.0 - (z - cz) * scale;
        return std::make_pair(px, py);
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas << "\" height=\""
        << kCanvas << "\" viewBox=\"0 0 " << kCanvas << " " << kCanvas << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    size_t color_idx = 0;
    for (const PlotSeries& s : series) {
        const char* color = s.dashed ? "#000000" : kPalette[color_idx++ % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (s.dashed) out << " stroke-dasharray=\"6 4\"";
        out << " points=\"";
        bool first = true;
        for (const auto& [frame, pose] : s.trajectory.poses) {
            (void)frame;
            const auto [px, py] = to_px(pose.translation.x(), pose.translation.z());
            if (!first) out << ' ';
            out << fmt(px) << ',' << fmt(py);
            first = false;
        }
        out << "\"/>\n";
    }

    // Legend.
    double ly = 24.0;
    color_idx = 0;
    for (const PlotSeries& s : series) {
        const char* color = s.dashed ? "#000000" : kPalette[color_idx++ % 6];
        out << "<line x1=\"20\" y1=\"" << fmt(ly) << "\" x2=\"52\" y2=\"" << fmt(ly)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
        if (s.dashed) out << " stroke-dasharray=\"6 4\"";
        out << "/>\n";
        out << "<text x=\"58\" y=\"" << fmt(ly + 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"14\">" << s.label << "</text>\n";
        ly += 20.0;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace movo
