#include "movo/scale.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace movo {

std::vector<DepthRatioSample> collect_ratios(
    const std::vector<std::pair<int, double>>& triangulated, const DepthMap& depth_map,
    const std::vector<FeatureMatch>& matches) {
    std::vector<DepthRatioSample> out;
    for (const auto& [idx, tri_depth] : triangulated) {
        if (tri_depth <= 0.0) continue;
        const Point2& kp = matches[idx].prev;
        const int px = static_cast<int>(std::lround(kp.u));
        const int py = static_cast<int>(std::lround(kp.v));
        if (px < 0 || py < 0 || px >= depth_map.width || py >= depth_map.height) continue;
        const double ext = depth_map.at(px, py);
        if (ext <= 0.0) continue;  // invalid-depth marker
        const double ratio = tri_depth / ext;
        if (!std::isfinite(ratio) || ratio <= 0.0) continue;
        out.push_back({tri_depth, ext, ratio});
    }
    if (out.empty()) throw NoValidSamples("collect_ratios: no valid depth-ratio samples");
    return out;
}

ScaleEstimate estimate_scale(const std::vector<DepthRatioSample>& samples,
                             const RansacConfig& cfg, const ScaleConfig& scfg) {
    if (samples.empty()) throw NoValidSamples("estimate_scale: empty sample list");
    const int n = static_cast<int>(samples.size());

    // Canonical order makes the estimate permutation-invariant for a fixed seed.
    std::vector<double> ratios(n);
    for (int i = 0; i < n; ++i) ratios[i] = samples[i].ratio;
    std::sort(ratios.begin(), ratios.end());

    int best_count = 0;
    double best_hyp = ratios[0];
    const int iterations = std::min(cfg.max_iterations, std::max(n, 1));
    for (int iter = 0; iter < iterations; ++iter) {
        std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(iter));
        std::uniform_int_distribution<int> dist(0, n - 1);
        const double hyp = ratios[dist(rng)];
        int count = 0;
        for (double r : ratios) {
            if (std::abs(r - hyp) / hyp < scfg.relative_gate) ++count;
        }
        if (count > best_count) {
            best_count = count;
            best_hyp = hyp;
        }
    }

    const int floor_count =
        std::max(scfg.min_consensus_abs,
                 static_cast<int>(std::ceil(scfg.min_consensus_frac * n)));
    if (best_count < floor_count) {
        throw NoConsensus("estimate_scale: consensus below floor");
    }

    std::vector<double> inliers;
    inliers.reserve(best_count);
    for (double r : ratios) {
        if (std::abs(r - best_hyp) / best_hyp < scfg.relative_gate) inliers.push_back(r);
    }
    const size_t m = inliers.size();
    const double median = (m % 2 == 1)
                              ? inliers[m / 2]
                              : 0.5 * (inliers[m / 2 - 1] + inliers[m / 2]);

    // Ratios are unit-baseline depth over metric depth, so the metric
    // baseline is the inverse of the consensus ratio.
    ScaleEstimate est;
    est.scale = 1.0 / median;
    est.inlier_count = static_cast<int>(m);
    est.total = n;
    return est;
}

Pose apply_scale(const Pose& motion, const ScaleEstimate& est) {
    Pose out = motion;
    out.translation *= est.scale;
    return out;
}

}  // namespace movo
