#pragma once

#include "movo/core.hpp"
#include "movo/twoview.hpp"

#include <vector>

namespace movo {

/// 3D point in frame k-1 camera coordinates paired with its frame-k pixel.
struct Correspondence3D2D {
    Point3 point;
    Point2 pixel;
};

struct PnpResult {
    Pose motion;
    std::vector<bool> inlier_mask;
    double final_cost = 0.0;                 // mean squared reprojection error, px^2
    std::vector<double> refit_cost_history;  // accepted-step costs of the final refit
};

/// depth * normalized ray through the pixel. Throws InvalidDepth for depth <= 0.
Point3 backproject(const Point2& pixel, double depth, const CameraIntrinsics& k);

/// Per-correspondence reprojection residual (x_hat - x) in pixels.
/// Behind-camera points yield a (1e6, 1e6) sentinel instead of throwing.
std::vector<Eigen::Vector2d> reprojection_residuals(
    const std::vector<Correspondence3D2D>& corrs, const Pose& motion,
    const CameraIntrinsics& k);

/// Analytic Jacobian of one residual w.r.t. the 6 twist parameters
/// (rotation first, then translation), left-multiplicative perturbation.
Eigen::Matrix<double, 2, 6> reprojection_jacobian(const Correspondence3D2D& corr,
                                                  const Pose& motion,
                                                  const CameraIntrinsics& k);

/// Robust reprojection-error minimization: 6-sample RANSAC around a damped
/// Gauss-Newton (LM) refinement seeded from `init`. Default gate 2 px.
PnpResult solve_pnp(const std::vector<Correspondence3D2D>& corrs, const CameraIntrinsics& k,
                    const Pose& init, const RansacConfig& cfg);

}  // namespace movo
