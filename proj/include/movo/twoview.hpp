#pragma once

#include "movo/core.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace movo {

struct RansacConfig {
    int max_iterations = 2000;
    double threshold = 1.0;   // px; Sampson (E/F) or symmetric transfer (H) gate
    std::uint64_t seed = 0;
    double confidence = 0.99;
};

struct EssentialResult {
    Eigen::Matrix3d e = Eigen::Matrix3d::Zero();  // unit Frobenius norm
    std::vector<bool> inlier_mask;
    Pose motion;                                  // rotation + unit-norm translation
    std::vector<std::pair<int, double>> triangulated;  // (match index, depth in frame k-1)
};

struct HomographyResult {
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();  // h(2,2) == 1
    std::vector<bool> inlier_mask;
};

/// Squared Sampson distance of a pixel match to the epipolar constraint of F.
double sampson_sq(const Eigen::Matrix3d& f, const FeatureMatch& m);

/// Squared symmetric transfer error of a pixel match under H (both directions summed).
double symmetric_transfer_sq(const Eigen::Matrix3d& h, const FeatureMatch& m);

/// Normalized 8-point solve over the given matches in normalized camera
/// coordinates, projected onto the essential manifold. Used by RANSAC and refit.
Eigen::Matrix3d eight_point_essential(const std::vector<FeatureMatch>& matches,
                                      const std::vector<int>& idx, const CameraIntrinsics& k);

/// RANSAC essential-matrix estimation followed by motion decomposition.
EssentialResult estimate_essential(const std::vector<FeatureMatch>& matches,
                                   const CameraIntrinsics& k, const RansacConfig& cfg);

/// RANSAC estimation of the essential matrix only (no chirality decomposition).
/// Same contract as estimate_essential minus motion/triangulation.
EssentialResult estimate_essential_matrix(const std::vector<FeatureMatch>& matches,
                                          const CameraIntrinsics& k, const RansacConfig& cfg);

/// Enumerate the four (R, t) candidates of E and select by chirality over the
/// given matches. Throws ChiralityAmbiguous when the best candidate's
/// positive-depth count beats the runner-up by less than 10% of the matches.
std::pair<Pose, std::vector<std::pair<int, double>>> decompose_essential(
    const Eigen::Matrix3d& e, const std::vector<FeatureMatch>& matches,
    const CameraIntrinsics& k);

/// Linear DLT triangulation; returns the point in frame k-1 camera coordinates.
Point3 triangulate(const Point2& x_prev, const Point2& x_curr, const Pose& motion,
                   const CameraIntrinsics& k);

HomographyResult estimate_homography(const std::vector<FeatureMatch>& matches,
                                     const RansacConfig& cfg);

enum class GricModel { Fundamental, Homography };

/// GRIC = sum_i min(e_i^2/sigma^2, 2(r-d)) + ln(4) d n + ln(4n) k,
/// with (d=3, k=7) for F and (d=2, k=8) for H, r = 4, natural logs.
double gric_score(const std::vector<double>& squared_residuals, GricModel model, int n,
                  double sigma);

// Triangulated depths outside this window are dropped before scale recovery.
constexpr double kMinTriangulatedDepth = 0.1;
constexpr double kMaxTriangulatedDepth = 400.0;

}  // namespace movo
