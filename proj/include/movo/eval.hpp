#pragma once

#include "movo/core.hpp"
#include "movo/dataio.hpp"

#include <utility>

namespace movo {

enum class AlignMode { None, Rigid6DoF, Similarity7DoF };

struct MetricsReport {
    double t_err = 0.0;  // percent
    double r_err = 0.0;  // degrees per 100 m
    double ate = 0.0;    // meters, RMSE
    double rpe_t = 0.0;  // meters, mean frame-to-frame
    double rpe_r = 0.0;  // degrees, mean frame-to-frame
};

/// Closed-form least-squares alignment of est onto gt over positions:
/// similarity (7DoF) or rigid (6DoF, scale fixed at 1). Applied to every pose.
Trajectory umeyama_align(const Trajectory& est, const Trajectory& gt, AlignMode mode);

/// RMSE over per-frame position differences.
double ate(const Trajectory& est, const Trajectory& gt);

/// Mean frame-to-frame relative-pose discrepancy: (translation m, rotation deg).
std::pair<double, double> rpe(const Trajectory& est, const Trajectory& gt);

/// KITTI subsequence errors over lengths 100..800 m: (t_err %, r_err deg/100m).
std::pair<double, double> kitti_seg_errors(const Trajectory& est, const Trajectory& gt);

/// Full report: align, then all four metrics.
MetricsReport evaluate(const Trajectory& est, const Trajectory& gt, AlignMode mode);

}  // namespace movo
