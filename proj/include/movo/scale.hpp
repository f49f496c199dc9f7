#pragma once

#include "movo/core.hpp"
#include "movo/dataio.hpp"
#include "movo/twoview.hpp"

#include <vector>

namespace movo {

/// One depth-ratio observation: triangulated depth over external (map) depth.
struct DepthRatioSample {
    double triangulated = 0.0;  // D'_i, from unit-baseline two-view triangulation
    double external = 0.0;      // D_i, sampled from the depth map
    double ratio = 0.0;         // D'_i / D_i
};

struct ScaleEstimate {
    double scale = 1.0;  // multiplier: t_metric = scale * t_unit
    int inlier_count = 0;
    int total = 0;
};

struct ScaleConfig {
    double relative_gate = 0.1;      // |ratio - hypothesis| / hypothesis
    int min_consensus_abs = 10;
    double min_consensus_frac = 0.2;
};

/// Pair each gated triangulated depth with the depth-map value at the
/// frame-(k-1) keypoint (nearest pixel); invalid map pixels are skipped.
std::vector<DepthRatioSample> collect_ratios(
    const std::vector<std::pair<int, double>>& triangulated, const DepthMap& depth_map,
    const std::vector<FeatureMatch>& matches);

/// Single-parameter RANSAC over the ratio vector; final scale is the inverse
/// of the median inlier ratio. Throws NoConsensus below the consensus floor.
ScaleEstimate estimate_scale(const std::vector<DepthRatioSample>& samples,
                             const RansacConfig& cfg, const ScaleConfig& scfg = {});

/// Scales the unit translation; rotation passes through untouched.
Pose apply_scale(const Pose& motion, const ScaleEstimate& est);

}  // namespace movo
